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

// Command-line front end:
//
//   ambc run       --config cfg.json [--set key=value ...]
//   ambc sweep-lt  --values 20,100,150
//   ambc sweep-t1  --values 0,250,500,1000
//   ambc plot      out/summary.csv [--x reflectors]
//   ambc config    (print the effective configuration)

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ambc/config.hpp"
#include "ambc/harness.hpp"
#include "ambc/report.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    std::optional<int> threads;
    std::string out_dir;
    bool full_scale = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", o.overrides, "Override a config key, e.g. --set schedule.random_steps=250");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("-r,--realizations", o.realizations, "Channel realizations per setting");
    cmd->add_option("-j,--threads", o.threads, "Worker threads (0 = all cores)");
    cmd->add_option("-o,--out-dir", o.out_dir, "Output directory");
    cmd->add_flag("--full-scale", o.full_scale, "1000 realizations over N = 16, 36, 64, 100");
    cmd->add_flag("-q,--quiet", o.quiet, "No progress output");
}

ambc::ExperimentConfig load_config(const CommonOptions& o) {
    ambc::Json doc = o.config_path.empty() ? ambc::to_json(ambc::ExperimentConfig{}) : ambc::read_json_file(o.config_path);
    for (const auto& s : o.overrides) ambc::apply_override(doc, s);
    ambc::ExperimentConfig cfg = ambc::config_from_json(doc);
    if (o.full_scale) ambc::apply_full_scale(cfg);
    if (o.seed) cfg.seed = *o.seed;
    if (o.realizations) cfg.realizations = *o.realizations;
    if (o.threads) cfg.threads = *o.threads;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    cfg.validate();
    return cfg;
}

ambc::ProgressFn progress_printer(bool quiet) {
    if (quiet) return {};
    return [](const std::string& line) { std::cerr << line << '\n'; };
}

void print_summary(const ambc::ExperimentResult& res) {
    std::printf("%-5s %-15s %5s %5s %12s %12s %4s\n", "N", "method", "L_t", "T_1", "median_grcd", "ber", "fail");
    for (const auto& s : res.summary)
        std::printf("%-5d %-15s %5d %5d %12.5g %12.4g %4d\n", s.reflectors, s.method.c_str(), s.training_samples,
                    s.random_steps, s.median_grcd, s.ber_of_median_grcd, s.failures);
    std::printf("raw:     %s\nsummary: %s\n", res.raw_path.c_str(), res.summary_path.c_str());
    if (res.failures) std::fprintf(stderr, "%d row(s) failed; see the status column\n", res.failures);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IRS-assisted ambient backscatter simulator with a DDPG reflection optimizer"};
    app.require_subcommand(1);

    CommonOptions run_opts, lt_opts, t1_opts, cfg_opts;
    auto* run = app.add_subcommand("run", "DRL and benchmarks over the configured IRS sizes");
    add_common(run, run_opts);

    std::vector<int> lt_values;
    auto* slt = app.add_subcommand("sweep-lt", "DRL median GRCD against the training symbol length");
    add_common(slt, lt_opts);
    slt->add_option("--values", lt_values, "L_t values (default from the config)")->delimiter(',');

    std::vector<int> t1_values;
    auto* st1 = app.add_subcommand("sweep-t1", "DRL median GRCD against the random-phase length");
    add_common(st1, t1_opts);
    st1->add_option("--values", t1_values, "T_1 values (default from the config)")->delimiter(',');

    std::vector<std::string> summaries;
    std::string plot_dir = ".";
    std::string x_axis = "reflectors";
    auto* plot = app.add_subcommand("plot", "SVG figures from summary CSV files");
    plot->add_option("summary", summaries, "summary.csv files")->required()->check(CLI::ExistingFile);
    plot->add_option("-o,--out-dir", plot_dir, "Directory for the SVG files");
    plot->add_option("--x", x_axis, "x-axis column")
        ->check(CLI::IsMember({"reflectors", "training_samples", "random_steps"}));

    auto* show = app.add_subcommand("config", "Print the effective configuration as JSON");
    add_common(show, cfg_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = load_config(run_opts);
            const auto res = ambc::run_experiment(cfg, progress_printer(run_opts.quiet));
            print_summary(res);
            for (const auto& p : ambc::emit_plots({res.summary_path}, cfg.out_dir)) std::printf("plot:    %s\n", p.c_str());
        } else if (*slt) {
            const auto cfg = load_config(lt_opts);
            const auto res = ambc::sweep_lt(cfg, lt_values.empty() ? cfg.sweep_training_samples : lt_values,
                                            progress_printer(lt_opts.quiet));
            print_summary(res);
            for (const auto& p : ambc::emit_plots({res.summary_path}, cfg.out_dir, ambc::PlotAxis::training_samples))
                std::printf("plot:    %s\n", p.c_str());
        } else if (*st1) {
            const auto cfg = load_config(t1_opts);
            const auto res = ambc::sweep_t1(cfg, t1_values.empty() ? cfg.sweep_random_steps : t1_values,
                                            progress_printer(t1_opts.quiet));
            print_summary(res);
            for (const auto& p : ambc::emit_plots({res.summary_path}, cfg.out_dir, ambc::PlotAxis::random_steps))
                std::printf("plot:    %s\n", p.c_str());
        } else if (*plot) {
            std::vector<std::filesystem::path> files(summaries.begin(), summaries.end());
            const auto axis = x_axis == "training_samples" ? ambc::PlotAxis::training_samples
                              : x_axis == "random_steps"   ? ambc::PlotAxis::random_steps
                                                           : ambc::PlotAxis::reflectors;
            for (const auto& p : ambc::emit_plots(files, plot_dir, axis)) std::printf("%s\n", p.c_str());
        } else if (*show) {
            std::cout << ambc::to_json(load_config(cfg_opts)).dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ambc: %s\n", e.what());
        return 2;
    }
    return 0;
}
