#include <iostream>

#include <CLI11.hpp>

#include "sgdelta/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sine-Gordon with a point impurity: simulation, spectra and experiments"};
    app.require_subcommand(1, 1);

    sgd::CommandLine cmd;
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto* config_opt = app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    const char* help[] = {"evolve a datum and write the energy series", "bottom spectrum of the linearization",
                          "perturbation trial around a stable wave", "growth-rate trial around an unstable wave",
                          "kink-impurity scattering sweep", "gradient-flow energy minimization",
                          "run the acceptance suite"};
    for (std::size_t i = 0; i < sgd::command_names().size(); ++i) {
        app.add_subcommand(sgd::command_names()[i], help[i])->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sgd::kExitRejected;
    }

    cmd.command = app.get_subcommands().front()->get_name();
    if (*config_opt) cmd.config_path = config_path;
    if (*out_opt) cmd.out_dir = out_dir;
    if (*seed_opt) cmd.seed = seed;
    if (*threads_opt) cmd.threads = threads;
    return sgd::run_command(cmd, std::cout, std::cerr);
}
