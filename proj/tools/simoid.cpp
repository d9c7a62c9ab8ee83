// SPDX-License-Identifier: Apache-2.0
//
// simoid: blind identification / equalization experiments on SIMO Wiener systems.
//
//   simoid identify [--config cfg.json] [--out dir] ...
//   simoid sweep    [--config cfg.json] [--out dir] ...
//   simoid channels [--config cfg.json] [--out dir] ...

#include "wiener/experiment.hpp"
#include "wiener/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out{"."};
    int jobs{1};
    std::vector<std::string> algos;
    std::vector<std::string> overrides;
    bool timing{false};
};

void add_common(CLI::App* cmd, Options& opt)
{
    cmd->add_option("--config", opt.config, "JSON experiment configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "base seed (overrides the config)");
    cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
    cmd->add_option("--jobs", opt.jobs, "worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--algo", opt.algos, "algorithm(s): akcca, akcca_i, cca_linear, ls_linear")->delimiter(',');
    cmd->add_option("--set", opt.overrides, "override a config value, e.g. --set akcca.c=1e-4");
    cmd->add_flag("--timing", opt.timing, "record wall-clock time per trial (output is no longer reproducible)");
}

wiener::xp::ExperimentConfig resolve(wiener::xp::ExperimentKind kind, const Options& opt)
{
    using namespace wiener::xp;
    ExperimentConfig cfg = opt.config.empty() ? default_config(kind) : load_config(opt.config, kind);
    if (cfg.experiment != kind) {
        throw ConfigError("config describes a '" + std::string(to_string(cfg.experiment))
                          + "' experiment, but the subcommand runs '" + std::string(to_string(kind)) + "'");
    }
    std::vector<std::string> overrides = opt.overrides;
    if (opt.seed) overrides.push_back("seed=" + std::to_string(*opt.seed));
    if (opt.timing) overrides.emplace_back("timing=true");
    if (!opt.algos.empty()) {
        std::string list = "[";
        for (std::size_t i = 0; i < opt.algos.size(); ++i) {
            list += (i ? ",\"" : "\"") + opt.algos[i] + "\"";
        }
        overrides.push_back("algorithms=" + list + "]");
    }
    cfg = apply_overrides(cfg, overrides);
    validate(cfg);
    return cfg;
}

int run(wiener::xp::ExperimentKind kind, const Options& opt)
{
    using namespace wiener;
    const xp::ExperimentConfig cfg = resolve(kind, opt);
    const std::filesystem::path out_dir(opt.out);
    std::filesystem::create_directories(out_dir);

    const char* stem = kind == xp::ExperimentKind::identify         ? "identify"
                       : kind == xp::ExperimentKind::equalize_sweep ? "sweep"
                                                                    : "channels_sweep";
    {
        std::ofstream echo(out_dir / (std::string(stem) + "_config.json"), std::ios::binary);
        echo << xp::to_json(cfg);
    }

    const std::vector<xp::ResultRecord> records = xp::run_experiment(cfg, opt.jobs);
    const std::filesystem::path results = out_dir / (std::string(stem) + ".csv");
    report::write_results(records, results);

    std::size_t failed = 0;
    for (const auto& r : records) failed += r.failure.empty() ? 0 : 1;
    std::cerr << "wrote " << records.size() << " records to " << results.string();
    if (failed) std::cerr << " (" << failed << " failed trials)";
    std::cerr << '\n';

    if (kind == xp::ExperimentKind::identify) {
        for (xp::Algorithm a : cfg.algorithms) {
            if (a != xp::Algorithm::akcca && a != xp::Algorithm::akcca_i) continue;
            const xp::TrialOutcome trial = xp::run_trial(cfg, xp::branch_counts(cfg).front(), 0, 0, a);
            if (!trial.estimate) continue;
            const std::filesystem::path dir = out_dir / (std::string("identification_") + std::string(xp::to_string(a)));
            report::dump_identification(*trial.estimate, trial.system, trial.simulation.outputs, dir);
            std::cerr << "wrote identification tables to " << dir.string() << '\n';
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Blind identification and equalization of SIMO Wiener systems"};
    app.require_subcommand(1);

    Options identify_opt;
    Options sweep_opt;
    Options channels_opt;
    CLI::App* identify = app.add_subcommand("identify", "identify channels and inverse nonlinearities");
    CLI::App* sweep = app.add_subcommand("sweep", "equalization MSE/BER over an SNR list");
    CLI::App* channels = app.add_subcommand("channels", "equalization over the number of output channels");
    add_common(identify, identify_opt);
    add_common(sweep, sweep_opt);
    add_common(channels, channels_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*identify) return run(wiener::xp::ExperimentKind::identify, identify_opt);
        if (*sweep) return run(wiener::xp::ExperimentKind::equalize_sweep, sweep_opt);
        if (*channels) return run(wiener::xp::ExperimentKind::channel_sweep, channels_opt);
    } catch (const wiener::xp::ConfigError& e) {
        std::cerr << "simoid: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "simoid: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
