#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "thermovisco/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Coupled thermo-visco-elastic Galerkin solver"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::int64_t> samples;
    std::optional<std::uint64_t> seed;
    std::string levels;

    auto* run = app.add_subcommand("run", "Run the solver and write ledger, snapshots and summary");
    run->add_option("config", config, "INI configuration file")->required();

    auto* check = app.add_subcommand("check-constitutive", "Randomized admissibility check of the flow rule");
    check->add_option("config", config, "INI configuration file")->required();
    check->add_option("--samples", samples, "Number of random samples (default 10000)");
    check->add_option("--seed", seed, "Random seed (default material.seed)");

    auto* conv = app.add_subcommand("convergence", "Refinement study over coarse-to-fine levels");
    conv->add_option("config", config, "INI configuration file")->required();
    conv->add_option("--levels", levels, "cells,n,k,dt;... (n and k may be 'all')")->required();

    auto* oracle = app.add_subcommand("oracle", "Run the 1D finite-difference reference and compare");
    oracle->add_option("config", config, "INI configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : thermovisco::kExitConfigError;
    }

    if (*run) {
        return thermovisco::cmd_run(config, std::cout, std::cerr);
    }
    if (*check) {
        return thermovisco::cmd_check_constitutive(config, samples, seed, std::cout, std::cerr);
    }
    if (*conv) {
        return thermovisco::cmd_convergence(config, levels, std::cout, std::cerr);
    }
    return thermovisco::cmd_oracle(config, std::cout, std::cerr);
}
