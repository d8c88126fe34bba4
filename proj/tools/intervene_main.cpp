// Command-line driver for the measurement-driven intervention experiments.
//
// Exit codes: 0 all checks passed, 1 usage/configuration error,
// 2 a check failed or an invariant guard tripped at runtime.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "intervene/experiments.hpp"

namespace cli = intervene::cli;

namespace {

void print_experiment_list() {
    std::printf("available experiments:\n");
    for (const cli::ExperimentDef& def : cli::registry()) {
        std::printf("  %-22s %s\n", def.name.c_str(), def.summary.c_str());
        std::printf("  %-22s defaults:", "");
        for (const auto& [k, v] : def.defaults) std::printf(" %s=%s", k.c_str(), v.c_str());
        std::printf("\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"intervene: measurement, feedback and collision experiments with "
                 "machine-readable reports"};
    app.set_version_flag("--version", cli::version_string());

    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> out_flag;
    std::vector<std::string> raw_params;
    bool list_only = false;

    app.add_option("experiment", experiment,
                   "experiment to run (see --list for the catalogue)");
    app.add_option("--config", config_path, "key = value configuration file")
        ->option_text("FILE");
    app.add_option("--seed", [&seed_flag](const std::vector<std::string>& vals) {
           try {
               seed_flag = std::stoull(vals.at(0));
           } catch (const std::exception&) {
               return false;
           }
           return true;
       },
       "random seed (non-negative integer, default 1)")
        ->option_text("N")
        ->expected(1);
    app.add_option("--out", [&out_flag](const std::vector<std::string>& vals) {
           out_flag = vals.at(0);
           return true;
       },
       "output directory for report.json, timings.json and artifacts")
        ->option_text("DIR")
        ->expected(1);
    app.add_option("--param", raw_params,
                   "override a single parameter; repeatable")
        ->option_text("KEY=VALUE")
        ->take_all();
    app.add_flag("--list", list_only, "list experiments with their parameters and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (list_only) {
        print_experiment_list();
        return 0;
    }

    try {
        if (experiment.empty())
            throw cli::usage_error("no experiment named; try --list for the catalogue");

        std::vector<std::pair<std::string, std::string>> flag_params;
        for (const std::string& raw : raw_params) {
            const auto eq = raw.find('=');
            if (eq == std::string::npos || eq == 0)
                throw cli::usage_error("--param expects KEY=VALUE, got '" + raw + "'");
            flag_params.emplace_back(raw.substr(0, eq), raw.substr(eq + 1));
        }

        std::vector<std::pair<std::string, std::string>> file_entries;
        if (!config_path.empty()) file_entries = cli::parse_config_file(config_path);

        const cli::ExperimentConfig cfg =
            cli::resolve_config(experiment, file_entries, flag_params, seed_flag, out_flag);
        const int rc = cli::run_experiment(cfg);
        std::printf("report: %s/report.json (%s)\n", cfg.output_dir.c_str(),
                    rc == 0 ? "all checks passed" : "CHECK FAILURES, see report");
        return rc;
    } catch (const cli::usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return 2;
    }
}
