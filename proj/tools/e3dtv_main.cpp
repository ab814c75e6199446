#include "e3dtv/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace e3dtv::cli;

    CLI::App app{"E-3DTV hyperspectral denoising and compressed-sensing reconstruction"};
    std::string command;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string seed;
    std::string threads;

    app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(command_names()));
    app.add_option("--config", config_path, "Flat key = value config file");
    app.add_option("--set", overrides, "Override one config key (key=value); repeatable")->take_all();
    app.add_option("--seed", seed, "Root seed for every random stage");
    app.add_option("--threads", threads, "Worker threads (1 gives bit-reproducible output)");
    app.footer("Keys: seed, threads, input, reference, measurement, output_dir, export_bands, ...\n"
               "See README.md for the full list. Exit codes: 0 ok, 1 config, 2 i/o or format, 3 numerical.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    RunConfig cfg;
    try {
        for (const auto& o : overrides) cfg.set_assignment(o);
        if (!seed.empty()) cfg.set("seed", seed, RunConfig::Origin::CommandLine);
        if (!threads.empty()) cfg.set("threads", threads, RunConfig::Origin::CommandLine);
        if (!config_path.empty()) cfg.merge_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return run_command(command, cfg, std::cout, std::cerr);
}
