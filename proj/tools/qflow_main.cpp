// Scenario runner for the Lagrangian quantum-fluid toolkit.
//
//   qflow run <config>        full run, CSV time series + report
//   qflow converge <config>   refinement study with observed orders
//   qflow demo <scenario>     run a named scenario with its defaults
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "qflow/runner.hpp"

namespace {

int dispatch(const std::function<qflow::ScenarioConfig()>& load, bool do_converge,
             const qflow::RunOptions& options) {
    try {
        const qflow::ScenarioConfig config = load();
        if (do_converge) {
            const qflow::ConvergenceTable table = qflow::converge(config, options);
            if (!options.quiet) std::fputs(table.text.c_str(), stdout);
        } else {
            const qflow::RunReport report = qflow::run_scenario(config, options);
            if (!options.quiet) std::fputs(report.text.c_str(), stdout);
        }
        return 0;
    } catch (const qflow::ConfigError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return 1;
    } catch (const qflow::NumericalError& err) {
        std::fprintf(stderr, "numerical failure: %s\n", err.what());
        return 2;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lagrangian quantum-fluid scenario runner"};
    app.require_subcommand(1);
    app.fallthrough();

    qflow::RunOptions options;
    options.out_dir = "out";
    app.add_option("--out-dir", options.out_dir, "Directory for CSV and report output");
    app.add_flag("--quiet", options.quiet, "Suppress stdout reporting");

    std::string config_path, scenario;
    auto* run = app.add_subcommand("run", "Run a scenario from a config file");
    run->add_option("config", config_path, "Config file path")->required();
    auto* conv = app.add_subcommand("converge", "Refinement study from a config file");
    conv->add_option("config", config_path, "Config file path")->required();
    auto* demo = app.add_subcommand("demo", "Run a named scenario with defaults");
    demo->add_option("scenario", scenario, "Scenario name")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return dispatch([&] { return qflow::parse_config_file(config_path); }, false, options);
    if (conv->parsed())
        return dispatch([&] { return qflow::parse_config_file(config_path); }, true, options);
    return dispatch(
        [&] { return qflow::default_config(qflow::scenario_from_name(scenario)); }, false,
        options);
}
