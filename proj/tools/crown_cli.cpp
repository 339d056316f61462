#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crown/runconfig.hpp"

int main(int argc, char** argv) {
    CLI::App app{"crown: multi-bubble laboratory for a critical Hamiltonian system"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    app.add_option("-c,--config", config_path, "configuration file (key = value sections)");
    app.add_option("-s,--set", overrides,
                   "override one config entry, e.g. --set polygon.r=2 (repeatable)");
    app.add_option("-o,--out", out_dir, "output directory (overrides run.out_dir)");
    app.add_flag_callback(
        "--print-config",
        [&] {
            crown::cli::RunConfig defaults;
            std::cout << crown::cli::serialize(defaults);
            std::exit(crown::cli::exit_ok);
        },
        "print the default configuration and exit");

    const char* names[] = {"ground-state", "constants",  "phi-check", "expansion",
                           "error-norm",   "landscape",  "scaling-check"};
    const char* descs[] = {
        "solve the radial ground state; profile CSV + tail report",
        "interaction constants of the energy expansion (JSON)",
        "interaction profile: Monte Carlo vs asymptotic ratio table",
        "two-scale energy expansion convergence table",
        "weighted error-norm decay table",
        "reduced landscape grid and interior maximizer",
        "ansatz and landscape scaling-invariance checks"};
    for (int i = 0; i < 7; ++i) app.add_subcommand(names[i], descs[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? crown::cli::exit_ok : crown::cli::exit_config_error;
    }

    crown::cli::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = crown::cli::parse_config_file(config_path);
        for (const auto& ov : overrides) crown::cli::apply_override(cfg, ov);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":{\"code\":2,\"message\":\"" << e.what() << "\"}}\n";
        return crown::cli::exit_config_error;
    }

    return crown::cli::run_command(app.get_subcommands().front()->get_name(), cfg, std::cout);
}
