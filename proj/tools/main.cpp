#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "driftlab/config.hpp"
#include "driftlab/runner.hpp"

// driftlab run <config.json> [--output-dir DIR]
// driftlab check <config.json>   (validate + echo the normalized config)
//
// Exit codes: 0 pass/success, 1 fail, 2 inconclusive, 3 error.
int main(int argc, char** argv) {
    CLI::App app{"stochastic contraction toolkit: simulate, solve, and verify"};
    app.require_subcommand(1);

    std::string run_config, check_config, output_dir;
    auto* run_cmd = app.add_subcommand("run", "execute the experiment described by a config file");
    run_cmd->add_option("config", run_config, "JSON config file")->required();
    run_cmd->add_option("--output-dir", output_dir,
                        "override the configured output directory");

    auto* check_cmd =
        app.add_subcommand("check", "validate a config file and print its normalized form");
    check_cmd->add_option("config", check_config, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    if (run_cmd->parsed()) {
        if (!output_dir.empty()) {
            try {
                auto cfg = driftlab::config::load_config_file(run_config);
                cfg.output_dir = output_dir;
                return driftlab::runner::run(cfg);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 3;
            }
        }
        return driftlab::runner::run_config_file(run_config);
    }
    try {
        const auto cfg = driftlab::config::load_config_file(check_config);
        std::cout << driftlab::config::save_config(cfg);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
