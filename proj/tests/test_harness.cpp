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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ambc/config.hpp"
#include "ambc/harness.hpp"
#include "ambc/report.hpp"
#include "test_support.hpp"

using namespace ambc;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ambc_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

ExperimentConfig tiny_config(const fs::path& out) {
    ExperimentConfig c;
    c.reflectors = {4};
    c.realizations = 2;
    c.schedule.random_steps = 20;
    c.schedule.actor_steps = 10;
    c.ascent.restarts = 1;
    c.ascent.max_sweeps = 5;
    c.threads = 1;
    c.out_dir = out.string();
    return c;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("benchmark-only run accounts for every row", "[harness]") {
    const auto dir = scratch_dir("rows");
    auto cfg = tiny_config(dir);
    cfg.reflectors = {16};
    cfg.methods = {"bench1_zf", "bench2_eig", "bench3_zf_irs", "bench4_eig_irs"};
    const auto res = run_experiment(cfg);
    CHECK(res.rows.size() == 8);
    CHECK(res.summary.size() == 4);
    CHECK(res.failures == 0);
    CHECK(fs::exists(res.raw_path));
    CHECK(fs::exists(res.summary_path));
    const auto raw = slurp(res.raw_path);
    CHECK(raw.rfind("# ambc-raw v1", 0) == 0);
    const auto t = read_csv(res.raw_path);
    CHECK(t.rows.size() == 8);
    for (const auto& r : res.rows) {
        CHECK(r.status == "ok");
        CHECK(r.grcd_true >= 1.0);
        CHECK(r.ber > 0.0);
        CHECK(r.ber <= 0.5);
        CHECK(std::isnan(r.grcd_sample));
    }
}

TEST_CASE("methods share the realization", "[harness]") {
    const auto dir = scratch_dir("fair");
    auto cfg = tiny_config(dir);
    const auto res = run_experiment(cfg);
    REQUIRE(res.rows.size() == 2 * 5);
    for (const auto& r : res.rows) {
        CHECK(r.seed == channel_seed(cfg.seed, r.realization));
        if (r.method == "drl") CHECK(r.grcd_sample >= 1.0);
    }
    // Seeds of the channel stream do not depend on N, so realizations nest across IRS sizes.
    CHECK(channel_seed(1, 3) != channel_seed(1, 4));
    CHECK(method_seed(1, SeedStream::drl, 16, 0) != method_seed(1, SeedStream::benchmarks, 16, 0));
}

TEST_CASE("summary is reproducible byte for byte", "[harness]") {
    const auto a = scratch_dir("det_a"), b = scratch_dir("det_b"), c = scratch_dir("det_c");
    auto cfg = tiny_config(a);
    cfg.reflectors = {4, 8};
    const auto ra = run_experiment(cfg);
    cfg.out_dir = b.string();
    const auto rb = run_experiment(cfg);
    cfg.out_dir = c.string();
    cfg.threads = 3;
    const auto rc = run_experiment(cfg);
    CHECK(slurp(ra.summary_path) == slurp(rb.summary_path));
    CHECK(slurp(ra.summary_path) == slurp(rc.summary_path));

    // Different seed, different numbers.
    cfg.seed = 2;
    const auto rd = run_experiment(cfg);
    CHECK(slurp(rd.summary_path) != slurp(ra.summary_path));
}

TEST_CASE("summary medians follow from the raw rows", "[harness]") {
    const auto dir = scratch_dir("recompute");
    auto cfg = tiny_config(dir);
    cfg.realizations = 3;
    const auto res = run_experiment(cfg);
    const auto raw = read_csv(res.raw_path);
    std::map<std::string, std::vector<double>> grcd, ber;
    for (const auto& r : raw.rows) {
        grcd[r[raw.column("method")]].push_back(std::stod(r[raw.column("grcd_true")]));
        ber[r[raw.column("method")]].push_back(std::stod(r[raw.column("ber")]));
    }
    const auto summary = read_summary_csv(res.summary_path);
    REQUIRE(summary.size() == 5);
    for (const auto& s : summary) {
        CHECK(s.count == 3);
        CHECK(s.median_grcd == median(grcd[s.method]));
        CHECK(s.median_ber == median(ber[s.method]));
        CHECK(s.ber_of_median_grcd == Approx(ber_from_grcd(s.median_grcd, cfg.data_samples)));
    }
}

TEST_CASE("summaries count failed rows at the no-information values", "[harness]") {
    RawRow ok;
    ok.reflectors = 4;
    ok.method = "drl";
    ok.grcd_true = 9.0;
    ok.ber = 0.01;
    RawRow bad = ok;
    bad.status = "error:x";
    bad.grcd_true = 1.0;
    bad.ber = 0.5;
    RawRow ok2 = ok;
    ok2.grcd_true = 3.0;
    ok2.ber = 0.1;
    const auto s = summarize({ok, bad, ok2}, 20);
    REQUIRE(s.size() == 1);
    CHECK(s[0].failures == 1);
    CHECK(s[0].median_grcd == 3.0);
    CHECK(s[0].median_ber == 0.1);
}

TEST_CASE("configuration JSON", "[harness]") {
    const ExperimentConfig defaults;
    CHECK(defaults.antennas == 4);
    CHECK(defaults.system().noise_power_mw == Approx(dbm_to_mw(-95.0)));
    CHECK(defaults.schedule.random_steps == 1000);
    CHECK(defaults.schedule.actor_steps == 500);
    CHECK(defaults.schedule.batch_size == 16);
    CHECK(defaults.agent.tau == 0.0005);
    CHECK(defaults.agent.noise.sigma == 0.05);

    SECTION("round trip") {
        ExperimentConfig c;
        c.reflectors = {8, 12};
        c.seed = 77;
        c.geometry.reference_loss_db = 12.5;
        c.agent.critic.nesterov = true;
        c.final_selection = FinalSelection::last;
        c.noise_estimate = NoiseEstimate::known;
        const auto back = config_from_json(to_json(c));
        CHECK(to_json(back) == to_json(c));
        CHECK(back.reflectors == std::vector<int>{8, 12});
        CHECK(back.geometry.reference_loss_db == 12.5);
    }
    SECTION("unknown keys are rejected with their name") {
        Json j = to_json(defaults);
        j["schedule"]["randm_steps"] = 3;
        CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("randm_steps"));
        Json k = {{"comment", "fine"}, {"realizations", 3}};
        CHECK(config_from_json(k).realizations == 3);
    }
    SECTION("overrides") {
        Json j = to_json(defaults);
        apply_override(j, "schedule.random_steps=250");
        apply_override(j, "reflectors=[16,36]");
        apply_override(j, "out_dir=somewhere");
        const auto c = config_from_json(j);
        CHECK(c.schedule.random_steps == 250);
        CHECK(c.reflectors == std::vector<int>{16, 36});
        CHECK(c.out_dir == "somewhere");
        CHECK_THROWS_AS(apply_override(j, "novalue"), SchemaError);
    }
    SECTION("validation") {
        ExperimentConfig c;
        c.methods = {"drl", "nonsense"};
        CHECK_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("nonsense"));
        c = ExperimentConfig{};
        c.reflectors.clear();
        CHECK_THROWS_AS(c.validate(), InvalidInput);
        c = ExperimentConfig{};
        c.geometry.tag = c.geometry.source;
        CHECK_THROWS_AS(c.validate(), InvalidGeometry);
    }
    SECTION("full scale") {
        ExperimentConfig c;
        apply_full_scale(c);
        CHECK(c.realizations == 1000);
        CHECK(c.reflectors == std::vector<int>{16, 36, 64, 100});
    }
    SECTION("shipped config files parse") {
        for (const char* name : {"default.json", "smoke.json", "free_space_reference.json"}) {
            INFO(name);
            const auto path = fs::path(AMBC_SOURCE_DIR) / "configs" / name;
            CHECK_NOTHROW(config_from_json(read_json_file(path.string())).validate());
        }
        const auto shipped = config_from_json(read_json_file((fs::path(AMBC_SOURCE_DIR) / "configs/default.json").string()));
        CHECK(to_json(shipped) == to_json(ExperimentConfig{}));
    }
}

TEST_CASE("plots from summary files", "[harness]") {
    const auto dir = scratch_dir("plots");
    const auto summary = dir / "s.csv";
    write_text(summary,
               "# test\n"
               "reflectors,method,training_samples,random_steps,count,failures,median_grcd,median_sample_grcd,"
               "median_ber,ber_of_median_grcd\n"
               "16,drl,150,1000,5,0,3.5,3.4,0.01,0.009\n"
               "64,drl,150,1000,5,0,5.5,5.0,0.001,0.0009\n"
               "16,bench2_eig,150,1000,5,0,2.5,nan,0.05,0.04\n"
               "64,bench2_eig,150,1000,5,0,2.5,nan,0.05,0.04\n");
    const auto files = emit_plots({summary}, dir);
    REQUIRE(files.size() == 2);
    for (const auto& f : files) {
        const auto svg = slurp(f);
        CHECK(count_of(svg, "class=\"series\"") == 2);
        CHECK(svg.find("data-name=\"drl\"") != std::string::npos);
    }
    const auto ber_svg = slurp(dir / "ber_vs_n.svg");
    CHECK(ber_svg.find("log scale") != std::string::npos);
    CHECK(ber_svg.find(">1e-4<") != std::string::npos);
    CHECK(ber_svg.find(">1e-1<") != std::string::npos);
    CHECK(slurp(dir / "grcd_vs_n.svg").find("log scale") == std::string::npos);

    SECTION("missing column is named") {
        const auto broken = dir / "broken.csv";
        write_text(broken, "reflectors,method,median_grcd\n16,drl,3\n");
        CHECK_THROWS_WITH(emit_plots({broken}, dir), Catch::Matchers::ContainsSubstring("ber_of_median_grcd"));
    }
    SECTION("no methods") {
        const auto empty = dir / "empty.csv";
        write_text(empty,
                   "reflectors,method,training_samples,random_steps,count,failures,median_grcd,median_sample_grcd,"
                   "median_ber,ber_of_median_grcd\n");
        CHECK_THROWS_AS(emit_plots({empty}, dir), InvalidInput);
    }
    SECTION("log axis refuses non-positive values") {
        PlotSpec spec{"t", "x", "y", true, {{"a", {1, 2}, {0.1, 0.0}}}};
        CHECK_THROWS_AS(write_svg_plot(dir / "bad.svg", spec), InvalidInput);
    }
}

TEST_CASE("sweeps", "[harness]") {
    const auto dir = scratch_dir("sweeps");
    auto cfg = tiny_config(dir);
    cfg.sweep_reflectors = 4;
    cfg.methods = {"drl"};

    SECTION("a single L_t reduces to the main experiment") {
        const auto main = run_experiment(cfg);
        const auto sweep = sweep_lt(cfg, {cfg.training_samples});
        REQUIRE(main.rows.size() == sweep.rows.size());
        for (std::size_t i = 0; i < main.rows.size(); ++i) {
            CHECK(main.rows[i].grcd_true == sweep.rows[i].grcd_true);
            CHECK(main.rows[i].grcd_sample == sweep.rows[i].grcd_sample);
        }
        CHECK(sweep.summary_path.filename() == "sweep_lt_summary.csv");
    }
    SECTION("a single T_1 reduces to the main experiment") {
        const auto main = run_experiment(cfg);
        const auto sweep = sweep_t1(cfg, {cfg.schedule.random_steps});
        REQUIRE(main.rows.size() == sweep.rows.size());
        for (std::size_t i = 0; i < main.rows.size(); ++i) CHECK(main.rows[i].grcd_true == sweep.rows[i].grcd_true);
    }
    SECTION("several values") {
        const auto res = sweep_t1(cfg, {0, 10, 20});
        CHECK(res.summary.size() == 3);
        CHECK(res.rows.size() == 6);
        CHECK_THROWS_AS(sweep_lt(cfg, {}), InvalidInput);
        CHECK_THROWS_AS(sweep_lt(cfg, {1}), InvalidInput);
    }
}

TEST_CASE("traces are written on request", "[harness]") {
    const auto dir = scratch_dir("traces");
    auto cfg = tiny_config(dir);
    cfg.realizations = 1;
    cfg.methods = {"drl"};
    cfg.write_traces = true;
    run_experiment(cfg);
    const auto trace = dir / "traces" / "drl_n4_lt150_t120_r0.csv";
    REQUIRE(fs::exists(trace));
    const auto t = read_csv(trace);
    CHECK(t.rows.size() == 30);
    CHECK(t.rows[0][t.column("true_grcd")] != "nan");
}

TEST_CASE("unwritable output is reported with its path", "[harness]") {
    const auto dir = scratch_dir("io");
    write_text(dir / "blocker", "x");
    auto cfg = tiny_config(dir / "blocker" / "sub");
    cfg.methods = {"bench1_zf"};
    CHECK_THROWS_WITH(run_experiment(cfg), Catch::Matchers::ContainsSubstring("blocker"));
}

TEST_CASE("Kendall rank correlation", "[harness]") {
    CHECK(kendall_tau({1, 2, 3, 4}, {10, 20, 30, 40}) == 1.0);
    CHECK(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}) == -1.0);
    CHECK(kendall_tau({1, 2, 3, 4}, {1, 3, 2, 4}) == Approx(4.0 / 6.0));
    CHECK(kendall_tau({1, 2, 3}, {5, 5, 5}) == 0.0);
    CHECK_THROWS_AS(kendall_tau({1}, {1}), InvalidInput);
    CHECK_THROWS_AS(kendall_tau({1, 2}, {1}), InvalidInput);
}
