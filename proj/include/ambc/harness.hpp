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

// Experiment orchestration. Work is split into (variant, realization) tasks
// that run on a thread pool; every task derives its own seeds from the master
// seed, so the output does not depend on the thread count or on scheduling.
//
// Seeds: the channel of realization r depends on (master, r) only, and the
// generator fills reflector columns in order, so the N = 16 channel is a
// prefix of the N = 64 one. DRL and benchmark streams depend on
// (master, N, r). Neither depends on L_t or T_1, so sweeps compare settings
// on common random numbers.

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ambc/benchmarks.hpp"
#include "ambc/channel.hpp"
#include "ambc/config.hpp"
#include "ambc/ddpg.hpp"
#include "ambc/random.hpp"
#include "ambc/report.hpp"

namespace ambc {

struct Variant {
    int reflectors = 0;
    int training_samples = 0;
    int random_steps = 0;
};

using ProgressFn = std::function<void(const std::string&)>;

struct ExperimentResult {
    std::vector<RawRow> rows;
    std::vector<SummaryRow> summary;
    std::filesystem::path raw_path;
    std::filesystem::path summary_path;
    int failures = 0;
};

enum class SeedStream : std::uint64_t { channel = 1, drl = 2, benchmarks = 3 };

inline std::uint64_t channel_seed(std::uint64_t master, int realization) {
    return derive_seed(master, {static_cast<std::uint64_t>(SeedStream::channel), static_cast<std::uint64_t>(realization)});
}

inline std::uint64_t method_seed(std::uint64_t master, SeedStream stream, int reflectors, int realization) {
    return derive_seed(master, {static_cast<std::uint64_t>(stream), static_cast<std::uint64_t>(reflectors),
                                static_cast<std::uint64_t>(realization)});
}

namespace detail {

inline void write_trace(const std::filesystem::path& path, const EpisodeResult& ep) {
    auto out = open_for_write(path);
    out << "# ambc-trace v1\nstep,reward,sample_grcd,true_grcd,failed\n";
    for (const auto& s : ep.trace)
        out << s.step << ',' << format_number(s.reward) << ',' << format_number(s.sample_grcd) << ','
            << format_number(s.true_grcd) << ',' << (s.failed ? 1 : 0) << '\n';
    finish_write(out, path);
}

inline std::vector<RawRow> run_task(const ExperimentConfig& cfg, const Variant& v, int realization,
                                    const std::vector<std::string>& methods) {
    using clock = std::chrono::steady_clock;
    const auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    const auto wants = [&](const std::string& m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

    RawRow base;
    base.reflectors = v.reflectors;
    base.realization = realization;
    base.seed = channel_seed(cfg.seed, realization);
    base.training_samples = v.training_samples;
    base.random_steps = v.random_steps;

    std::vector<RawRow> rows;
    const auto failed_row = [&](const std::string& method, const std::string& why) {
        RawRow r = base;
        r.method = method;
        r.status = "error:" + why;
        for (char& c : r.status)
            if (c == ',' || c == '\n') c = ';';
        return r;
    };

    ChannelRealization ch;
    try {
        Rng channel_rng(base.seed);
        ch = generate_realization(cfg.geometry, cfg.antennas, v.reflectors, cfg.rician_k, channel_rng);
    } catch (const std::exception& e) {
        for (const auto& m : methods) rows.push_back(failed_row(m, e.what()));
        return rows;
    }

    if (wants("drl")) {
        const auto t0 = clock::now();
        EpisodeSettings es = cfg.episode_settings();
        es.system.training_samples = v.training_samples;
        es.schedule.random_steps = v.random_steps;
        try {
            Rng rng(method_seed(cfg.seed, SeedStream::drl, v.reflectors, realization));
            const EpisodeResult ep = run_episode(ch, es, rng);
            RawRow r = base;
            r.method = "drl";
            r.failed_steps = ep.failed_steps;
            if (ep.ok) {
                r.grcd_true = ep.true_grcd;
                r.grcd_sample = ep.sample_grcd;
                r.ber = ep.ber;
            } else {
                r.status = "error:no successful step";
            }
            r.wall_ms = ms_since(t0);
            rows.push_back(r);
            if (cfg.write_traces)
                write_trace(std::filesystem::path(cfg.out_dir) / "traces" /
                                ("drl_n" + std::to_string(v.reflectors) + "_lt" + std::to_string(v.training_samples) +
                                 "_t1" + std::to_string(v.random_steps) + "_r" + std::to_string(realization) + ".csv"),
                            ep);
        } catch (const IoError&) {
            throw;
        } catch (const std::exception& e) {
            rows.push_back(failed_row("drl", e.what()));
        }
    }

    const bool any_bench = std::any_of(methods.begin(), methods.end(), [](const std::string& m) { return m != "drl"; });
    if (any_bench) {
        const auto t0 = clock::now();
        try {
            Rng rng(method_seed(cfg.seed, SeedStream::benchmarks, v.reflectors, realization));
            const auto bench = evaluate_benchmarks(ch, cfg.system(), cfg.ascent, rng);
            const double ms = ms_since(t0);
            for (const auto& b : bench) {
                const std::string& name = known_methods()[static_cast<std::size_t>(b.id)];
                if (!wants(name)) continue;
                RawRow r = base;
                r.method = name;
                r.grcd_true = b.grcd;
                r.ber = b.ber;
                if (!b.ok) r.status = failed_row(name, b.error).status;
                r.wall_ms = ms / 4.0;
                rows.push_back(r);
            }
        } catch (const std::exception& e) {
            for (const auto& m : methods)
                if (m != "drl") rows.push_back(failed_row(m, e.what()));
        }
    }
    return rows;
}

}  // namespace detail

// Runs every (variant, realization) pair with the given methods. Row order
// in the result is canonical (sorted), independent of scheduling.
inline std::vector<RawRow> run_variants(const ExperimentConfig& cfg, const std::vector<Variant>& variants,
                                        const std::vector<std::string>& methods, const ProgressFn& progress = {}) {
    cfg.validate();
    if (methods.empty()) throw InvalidInput("no methods selected");
    for (const auto& v : variants) {
        if (v.reflectors < 1) throw InvalidInput("variant with fewer than one reflector");
        if (v.training_samples < 2) throw InvalidInput("variant with L_t < 2");
        if (v.random_steps < 0) throw InvalidInput("variant with negative T_1");
    }
    struct Task {
        std::size_t variant;
        int realization;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < variants.size(); ++i)
        for (int r = 0; r < cfg.realizations; ++r) tasks.push_back({i, r});

    std::vector<std::vector<RawRow>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;
    std::exception_ptr fatal;

    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                results[i] = detail::run_task(cfg, variants[tasks[i].variant], tasks[i].realization, methods);
            } catch (...) {
                std::lock_guard lock(log_mutex);
                if (!fatal) fatal = std::current_exception();
                next = tasks.size();
                return;
            }
            const std::size_t finished = ++done;
            if (progress) {
                const Variant& v = variants[tasks[i].variant];
                std::lock_guard lock(log_mutex);
                progress("task " + std::to_string(finished) + "/" + std::to_string(tasks.size()) + " N=" +
                         std::to_string(v.reflectors) + " L_t=" + std::to_string(v.training_samples) +
                         " T_1=" + std::to_string(v.random_steps) + " realization " +
                         std::to_string(tasks[i].realization));
            }
        }
    };

    unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (fatal) std::rethrow_exception(fatal);

    std::vector<RawRow> rows;
    for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
    std::sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.key() < b.key(); });
    return rows;
}

inline ExperimentResult finish_experiment(const ExperimentConfig& cfg, std::vector<RawRow> rows,
                                          const std::string& prefix) {
    ExperimentResult res;
    res.summary = summarize(rows, cfg.data_samples);
    for (const auto& r : rows)
        if (r.status != "ok") ++res.failures;
    const std::filesystem::path dir(cfg.out_dir);
    res.raw_path = dir / (prefix + "raw.csv");
    res.summary_path = dir / (prefix + "summary.csv");
    write_raw_csv(res.raw_path, rows);
    write_summary_csv(res.summary_path, res.summary);
    res.rows = std::move(rows);
    return res;
}

// Every configured IRS size, with the DRL method and the enabled benchmarks
// on the same realizations. Writes raw.csv and summary.csv.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
    std::vector<Variant> variants;
    for (int n : cfg.reflectors) variants.push_back({n, cfg.training_samples, cfg.schedule.random_steps});
    return finish_experiment(cfg, run_variants(cfg, variants, cfg.methods, progress), "");
}

// DRL only, at sweep_reflectors, for each training symbol length.
inline ExperimentResult sweep_lt(const ExperimentConfig& cfg, const std::vector<int>& values,
                                 const ProgressFn& progress = {}) {
    if (values.empty()) throw InvalidInput("sweep_lt: no L_t values");
    std::vector<Variant> variants;
    for (int lt : values) variants.push_back({cfg.sweep_reflectors, lt, cfg.schedule.random_steps});
    return finish_experiment(cfg, run_variants(cfg, variants, {"drl"}, progress), "sweep_lt_");
}

// DRL only, at sweep_reflectors, for each random-phase length.
inline ExperimentResult sweep_t1(const ExperimentConfig& cfg, const std::vector<int>& values,
                                 const ProgressFn& progress = {}) {
    if (values.empty()) throw InvalidInput("sweep_t1: no T_1 values");
    std::vector<Variant> variants;
    for (int t1 : values) variants.push_back({cfg.sweep_reflectors, cfg.training_samples, t1});
    return finish_experiment(cfg, run_variants(cfg, variants, {"drl"}, progress), "sweep_t1_");
}

// Kendall rank correlation (tau-a) between two equally long sequences.
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("kendall_tau: need two equal-length series");
    long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double s = (x[i] - x[j]) * (y[i] - y[j]);
            if (s > 0) ++concordant;
            if (s < 0) ++discordant;
        }
    const double pairs = 0.5 * static_cast<double>(x.size() * (x.size() - 1));
    return static_cast<double>(concordant - discordant) / pairs;
}

}  // namespace ambc
