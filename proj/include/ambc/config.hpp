// SPDX-License-Identifier: Apache-2.0
//
// irs-ambc: IRS-assisted ambient backscatter link simulator and DDPG lab
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Experiment configuration and its JSON form. Every field has a default;
// a config file only needs the keys it changes. Unknown keys are rejected.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ambc/benchmarks.hpp"
#include "ambc/channel.hpp"
#include "ambc/ddpg.hpp"
#include "ambc/errors.hpp"
#include "ambc/signal_model.hpp"

namespace ambc {

using Json = nlohmann::json;

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> m{"drl", "bench1_zf", "bench2_eig", "bench3_zf_irs", "bench4_eig_irs"};
    return m;
}

struct ExperimentConfig {
    NodeGeometry geometry;
    int antennas = 4;
    std::vector<int> reflectors{16, 64};
    double source_power_dbm = 20.0;
    double noise_power_dbm = -95.0;
    double tag_coefficient = 1.0;
    double rician_k = 3.0;
    int training_samples = 150;
    int data_samples = 20;
    TrainingSchedule schedule;
    AgentConfig agent;
    NoiseEstimate noise_estimate = NoiseEstimate::estimated;
    FinalSelection final_selection = FinalSelection::best;
    AscentOptions ascent;
    int realizations = 50;
    std::uint64_t seed = 1;
    std::vector<std::string> methods = known_methods();
    std::string out_dir = "out";
    int threads = 0;  // 0 -> hardware concurrency
    bool write_traces = false;
    // Sweeps run the DRL method only, at a single IRS size.
    int sweep_reflectors = 64;
    std::vector<int> sweep_training_samples{20, 100, 150};
    std::vector<int> sweep_random_steps{0, 250, 500, 1000};

    SystemParameters system() const {
        SystemParameters p;
        p.source_power_mw = dbm_to_mw(source_power_dbm);
        p.noise_power_mw = dbm_to_mw(noise_power_dbm);
        p.tag_coefficient = tag_coefficient;
        p.training_samples = training_samples;
        p.data_samples = data_samples;
        return p;
    }

    EpisodeSettings episode_settings() const {
        EpisodeSettings s;
        s.system = system();
        s.schedule = schedule;
        s.agent = agent;
        s.noise_estimate = noise_estimate;
        s.final_selection = final_selection;
        s.record_true_grcd = write_traces;
        return s;
    }

    bool wants(const std::string& method) const {
        return std::find(methods.begin(), methods.end(), method) != methods.end();
    }

    void validate() const {
        geometry.validate();
        system().validate();
        schedule.validate();
        if (antennas < 1) throw InvalidInput("config: antennas must be >= 1");
        if (reflectors.empty()) throw InvalidInput("config: reflectors list is empty");
        for (int n : reflectors)
            if (n < 1) throw InvalidInput("config: reflector counts must be >= 1");
        if (realizations < 1) throw InvalidInput("config: realizations must be >= 1");
        if (!(rician_k >= 0.0)) throw InvalidInput("config: rician_k must be >= 0");
        for (const auto& m : methods)
            if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
                throw InvalidInput("config: unknown method '" + m + "'");
        if (ascent.restarts < 0 || ascent.max_sweeps < 1 || ascent.coarse_grid < 2)
            throw InvalidInput("config: bad benchmark ascent options");
    }
};

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

inline Json point_json(Point2 p) { return Json::array({p.x, p.y}); }

inline Point2 point_from(const Json& j, const char* key) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(std::string("config: ") + key + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Json optimizer_json(const OptimizerConfig& o) {
    return {{"learning_rate", o.learning_rate},
            {"momentum", o.momentum},
            {"decay", o.decay},
            {"epsilon", o.epsilon},
            {"nesterov", o.nesterov}};
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) throw SchemaError("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
            throw SchemaError("config: unknown key '" + where + (where.empty() ? "" : ".") + it.key() + "'");
}

inline void optimizer_from(const Json& j, OptimizerConfig& o, const std::string& where) {
    reject_unknown(j, {"learning_rate", "momentum", "decay", "epsilon", "nesterov"}, where);
    take(j, "learning_rate", o.learning_rate);
    take(j, "momentum", o.momentum);
    take(j, "decay", o.decay);
    take(j, "epsilon", o.epsilon);
    take(j, "nesterov", o.nesterov);
}

}  // namespace detail

inline Json to_json(const ExperimentConfig& c) {
    using detail::point_json;
    return Json{
        {"geometry",
         {{"source", point_json(c.geometry.source)},
          {"tag", point_json(c.geometry.tag)},
          {"irs", point_json(c.geometry.irs)},
          {"reader", point_json(c.geometry.reader)},
          {"carrier_hz", c.geometry.carrier_hz},
          {"path_loss_exponent", c.geometry.path_loss_exponent},
          {"reference_loss_db", c.geometry.reference_loss_db}}},
        {"antennas", c.antennas},
        {"reflectors", c.reflectors},
        {"source_power_dbm", c.source_power_dbm},
        {"noise_power_dbm", c.noise_power_dbm},
        {"tag_coefficient", c.tag_coefficient},
        {"rician_k", c.rician_k},
        {"training_samples", c.training_samples},
        {"data_samples", c.data_samples},
        {"schedule",
         {{"random_steps", c.schedule.random_steps},
          {"actor_steps", c.schedule.actor_steps},
          {"batch_size", c.schedule.batch_size},
          {"discount", c.schedule.discount},
          {"target_period", c.schedule.target_period},
          {"replay_capacity", c.schedule.replay_capacity}}},
        {"agent",
         {{"actor", detail::optimizer_json(c.agent.actor)},
          {"critic", detail::optimizer_json(c.agent.critic)},
          {"tau", c.agent.tau},
          {"ou_theta", c.agent.noise.theta},
          {"ou_sigma", c.agent.noise.sigma},
          {"ou_dt", c.agent.noise.dt}}},
        {"noise_estimate", c.noise_estimate == NoiseEstimate::estimated ? "estimated" : "known"},
        {"final_selection", c.final_selection == FinalSelection::best ? "best" : "last"},
        {"ascent",
         {{"restarts", c.ascent.restarts},
          {"max_sweeps", c.ascent.max_sweeps},
          {"coarse_grid", c.ascent.coarse_grid},
          {"fine_grid", c.ascent.fine_grid},
          {"tolerance", c.ascent.tolerance}}},
        {"realizations", c.realizations},
        {"seed", c.seed},
        {"methods", c.methods},
        {"out_dir", c.out_dir},
        {"threads", c.threads},
        {"write_traces", c.write_traces},
        {"sweep_reflectors", c.sweep_reflectors},
        {"sweep_training_samples", c.sweep_training_samples},
        {"sweep_random_steps", c.sweep_random_steps},
    };
}

inline ExperimentConfig config_from_json(const Json& j) {
    using detail::take;
    ExperimentConfig c;
    try {
        detail::reject_unknown(j,
                               {"geometry", "antennas", "reflectors", "source_power_dbm", "noise_power_dbm",
                                "tag_coefficient", "rician_k", "training_samples", "data_samples", "schedule",
                                "agent", "noise_estimate", "final_selection", "ascent", "realizations", "seed",
                                "methods", "out_dir", "threads", "write_traces", "sweep_reflectors",
                                "sweep_training_samples", "sweep_random_steps", "comment"},
                               "");
        if (j.contains("geometry")) {
            const auto& g = j.at("geometry");
            detail::reject_unknown(g,
                                   {"source", "tag", "irs", "reader", "carrier_hz", "path_loss_exponent",
                                    "reference_loss_db"},
                                   "geometry");
            if (g.contains("source")) c.geometry.source = detail::point_from(g.at("source"), "geometry.source");
            if (g.contains("tag")) c.geometry.tag = detail::point_from(g.at("tag"), "geometry.tag");
            if (g.contains("irs")) c.geometry.irs = detail::point_from(g.at("irs"), "geometry.irs");
            if (g.contains("reader")) c.geometry.reader = detail::point_from(g.at("reader"), "geometry.reader");
            take(g, "carrier_hz", c.geometry.carrier_hz);
            take(g, "path_loss_exponent", c.geometry.path_loss_exponent);
            take(g, "reference_loss_db", c.geometry.reference_loss_db);
        }
        take(j, "antennas", c.antennas);
        take(j, "reflectors", c.reflectors);
        take(j, "source_power_dbm", c.source_power_dbm);
        take(j, "noise_power_dbm", c.noise_power_dbm);
        take(j, "tag_coefficient", c.tag_coefficient);
        take(j, "rician_k", c.rician_k);
        take(j, "training_samples", c.training_samples);
        take(j, "data_samples", c.data_samples);
        if (j.contains("schedule")) {
            const auto& s = j.at("schedule");
            detail::reject_unknown(
                s, {"random_steps", "actor_steps", "batch_size", "discount", "target_period", "replay_capacity"},
                "schedule");
            take(s, "random_steps", c.schedule.random_steps);
            take(s, "actor_steps", c.schedule.actor_steps);
            take(s, "batch_size", c.schedule.batch_size);
            take(s, "discount", c.schedule.discount);
            take(s, "target_period", c.schedule.target_period);
            take(s, "replay_capacity", c.schedule.replay_capacity);
        }
        if (j.contains("agent")) {
            const auto& a = j.at("agent");
            detail::reject_unknown(a, {"actor", "critic", "tau", "ou_theta", "ou_sigma", "ou_dt"}, "agent");
            if (a.contains("actor")) detail::optimizer_from(a.at("actor"), c.agent.actor, "agent.actor");
            if (a.contains("critic")) detail::optimizer_from(a.at("critic"), c.agent.critic, "agent.critic");
            take(a, "tau", c.agent.tau);
            take(a, "ou_theta", c.agent.noise.theta);
            take(a, "ou_sigma", c.agent.noise.sigma);
            take(a, "ou_dt", c.agent.noise.dt);
        }
        if (j.contains("noise_estimate")) {
            const auto v = j.at("noise_estimate").get<std::string>();
            if (v != "estimated" && v != "known") throw SchemaError("config: noise_estimate must be estimated|known");
            c.noise_estimate = v == "known" ? NoiseEstimate::known : NoiseEstimate::estimated;
        }
        if (j.contains("final_selection")) {
            const auto v = j.at("final_selection").get<std::string>();
            if (v != "best" && v != "last") throw SchemaError("config: final_selection must be best|last");
            c.final_selection = v == "last" ? FinalSelection::last : FinalSelection::best;
        }
        if (j.contains("ascent")) {
            const auto& a = j.at("ascent");
            detail::reject_unknown(a, {"restarts", "max_sweeps", "coarse_grid", "fine_grid", "tolerance"}, "ascent");
            take(a, "restarts", c.ascent.restarts);
            take(a, "max_sweeps", c.ascent.max_sweeps);
            take(a, "coarse_grid", c.ascent.coarse_grid);
            take(a, "fine_grid", c.ascent.fine_grid);
            take(a, "tolerance", c.ascent.tolerance);
        }
        take(j, "realizations", c.realizations);
        take(j, "seed", c.seed);
        take(j, "methods", c.methods);
        take(j, "out_dir", c.out_dir);
        take(j, "threads", c.threads);
        take(j, "write_traces", c.write_traces);
        take(j, "sweep_reflectors", c.sweep_reflectors);
        take(j, "sweep_training_samples", c.sweep_training_samples);
        take(j, "sweep_random_steps", c.sweep_random_steps);
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
    return c;
}

// Applies "dotted.key=value" to a JSON document. The value is parsed as JSON
// when possible (numbers, booleans, arrays) and taken as a string otherwise.
inline void apply_override(Json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::exception&) {
        value = text;
    }
    std::string pointer = "/";
    for (char ch : key) pointer += ch == '.' ? '/' : ch;
    doc[Json::json_pointer(pointer)] = value;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const Json::exception& e) {
        throw SchemaError("config file '" + path + "': " + e.what());
    }
}

// Realization count and IRS grid of the full-size study.
inline void apply_full_scale(ExperimentConfig& c) {
    c.realizations = 1000;
    c.reflectors = {16, 36, 64, 100};
}

}  // namespace ambc
