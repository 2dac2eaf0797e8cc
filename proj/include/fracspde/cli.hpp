#pragma once

// Command runners behind the fracspde executable. Each run writes CSV files,
// summary.txt, plot.gp and manifest.json into the output directory.
//
// Exit status: 0 success, 1 invalid input (parse, validation, domain,
// existence conditions, grid resolution), 2 numerical failure
// (quadrature, divergence, non-convergence, exploded paths).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "fracspde/config.hpp"

namespace fracspde::cli {

enum class Command { kernel, ml, density, isometry, simulate, moments, bounds, upsilon, blowup };

const char* to_string(Command cmd) noexcept;
std::optional<Command> parse_command(std::string_view name);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replicas;
};

/// Runs a validated config. Throws on failure; see exit_status.
void run_command(Command cmd, const config::ExperimentConfig& config, const std::filesystem::path& out_dir,
                 std::ostream& log);

/// Maps the exception currently being handled to an exit status and reports it on `err`.
int exit_status(std::ostream& err);

/// Parses config text, applies overrides, runs, and returns the exit status.
int run(Command cmd, const std::string& config_text, const Overrides& overrides,
        const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);

/// Reruns the experiment recorded in a manifest into out_dir.
int rerun(const std::filesystem::path& manifest, const std::filesystem::path& out_dir, std::ostream& log,
          std::ostream& err);

/// %.17g, the number format of every CSV cell.
std::string format_number(double v);

/// 64-bit FNV-1a, used for the condition-report and output hashes in manifests.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

}  // namespace fracspde::cli
