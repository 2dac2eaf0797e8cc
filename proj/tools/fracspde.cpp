// fracspde: run one experiment from an INI config and write its artifacts.
//
//   fracspde <command> --config run.ini --out results/ [--seed N] [--replicas N]
//   fracspde rerun --manifest results/manifest.json --out again/

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fracspde/cli.hpp"

namespace cli = fracspde::cli;

int main(int argc, char** argv) {
    CLI::App app{"Simulation and analysis of fractional stochastic heat equations with jump noise", "fracspde"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replicas;
    app.add_option("--config", config_path, "INI configuration file (defaults when omitted)");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "master seed, overrides run.seed");
    app.add_option("--replicas", replicas, "ensemble size, overrides run.replicas");

    const char* help[] = {
        "kernel slices: subordination and spectral Green function",
        "Mittag-Leffler function on a z grid",
        "density of the inverse stable subordinator",
        "Monte Carlo check of the Poisson isometries",
        "one solution path",
        "ensemble moments and growth-rate fit",
        "contraction constants, renewal envelopes, blow-up certificate",
        "upsilon(gamma) table",
        "blow-up time of the nonlinear renewal inequality",
    };
    for (int i = 0; i < int(std::size(help)); ++i) {
        app.add_subcommand(cli::to_string(static_cast<cli::Command>(i)), help[i]);
    }
    std::string manifest;
    CLI::App* rerun = app.add_subcommand("rerun", "rerun the experiment recorded in a manifest");
    rerun->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (*rerun) return cli::rerun(manifest, out_dir, std::cout, std::cerr);

    const std::string name = app.get_subcommands().front()->get_name();
    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "cannot read " << config_path << '\n';
            return 1;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return cli::run(*cli::parse_command(name), text, {seed, replicas}, out_dir, std::cout, std::cerr);
}
