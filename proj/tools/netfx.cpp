#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "netfx/harness/config.hpp"
#include "netfx/harness/report.hpp"
#include "netfx/harness/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct ConfigArgs {
    std::string path;
    std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App& cmd, ConfigArgs& args) {
    cmd.add_option("--config", args.path, "flat JSON experiment config")->required()->check(CLI::ExistingFile);
    for (const auto& key : netfx::detail::config_keys()) {
        cmd.add_option_function<std::string>(
               "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; },
               "override config key " + key)
            ->group("Config overrides");
    }
}

netfx::ExperimentConfig load(const ConfigArgs& args, bool paper_scale) {
    auto j = netfx::read_json_file(args.path);
    if (paper_scale && !args.overrides.count("replications")) j["replications"] = netfx::kPaperReplications;
    for (const auto& [k, v] : args.overrides) netfx::apply_override(j, k, v);
    return netfx::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netfx: total treatment effect experiments under network interference"};
    app.require_subcommand(1);

    ConfigArgs run_args;
    bool paper_scale = false;
    auto* run = app.add_subcommand("run", "run an experiment and write its report files");
    add_config_options(*run, run_args);
    run->add_option_function<std::string>(
        "--seed", [&](const std::string& v) { run_args.overrides["master_seed"] = v; }, "master seed");
    run->add_option_function<std::string>(
        "--out", [&](const std::string& v) { run_args.overrides["output_dir"] = v; }, "output directory");
    run->add_flag("--paper-scale", paper_scale, "5000 replications unless --replications is given");

    std::string figure_id, figure_dir;
    auto* figure = app.add_subcommand("figure", "emit figure data from a finished run");
    figure->add_option("--id", figure_id, "fig2 | fig3 | fig4 | fig5 | fig5-right | trajectory")->required();
    figure->add_option("--in", figure_dir, "run output directory")->required()->check(CLI::ExistingDirectory);

    ConfigArgs validate_args;
    auto* validate = app.add_subcommand("validate", "check a config and print it fully resolved");
    add_config_options(*validate, validate_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*validate) {
            const auto cfg = load(validate_args, false);
            cfg.validate();
            std::cout << netfx::config_to_json(cfg).dump(2) << '\n';
            return kOk;
        }
        if (*figure) {
            const auto path = netfx::emit_figure_data(figure_dir, figure_id);
            std::cout << path.string() << '\n';
            return kOk;
        }
        auto cfg = load(run_args, paper_scale);
        if (cfg.output_dir.empty()) cfg.output_dir = "netfx-results";
        const auto res = netfx::run_experiment(cfg);
        netfx::write_experiment(res, cfg.output_dir);
        std::cout << cfg.output_dir << ": " << res.records.size() << " succeeded, " << res.failures.size()
                  << " failed\n";
        if (res.records.empty()) {
            std::cerr << "error: no replication succeeded\n";
            return kRuntimeError;
        }
        return kOk;
    } catch (const netfx::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
