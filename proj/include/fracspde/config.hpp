#pragma once

// Experiment configuration: an INI document with one section per concern.
//
//   [model]   alpha beta nu d
//   [grid]    half_width n T nt
//   [sigma]   kind = zero | linear | bounded | power, coefficient, exponent
//   [mu]      kind = none | point | exponential | power, ...
//   [noise]   kind = compensated | noncompensated, override_conditions, explosion_guard
//   [initial] kind = constant | sine | bump, value, amplitude
//   [run]     seed replicas
// plus one section per command for its own options.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracspde/grid.hpp"
#include "fracspde/kernels.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/solver.hpp"

namespace fracspde::config {

struct SigmaConfig {
    std::string kind = "linear";
    double coefficient = 1.0;
    double exponent = 2.0;  // power kind only
    bool operator==(const SigmaConfig&) const = default;
};

struct MuConfig {
    std::string kind = "point";
    double h = 1.0;  // point mark, first coordinate
    double h2 = 0.0; // point mark, second coordinate (d = 2)
    double mass = 1.0;
    double scale = 1.0;
    double rate = 1.0;   // exponential kind
    double index = 0.5;  // power kind
    double eps = 0.1;
    double R = 10.0;
    bool operator==(const MuConfig&) const = default;
};

struct NoiseConfig {
    solver::NoiseKind kind = solver::NoiseKind::compensated;
    bool override_conditions = false;
    double explosion_guard = 1e12;
    bool operator==(const NoiseConfig&) const = default;
};

struct InitialConfig {
    std::string kind = "constant";
    double value = 1.0;
    double amplitude = 0.5;
    bool operator==(const InitialConfig&) const = default;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::uint64_t replicas = 1000;
    bool operator==(const RunConfig&) const = default;
};

struct KernelConfig {
    std::vector<double> times{0.5, 1.0};
    double x_max = 4.0;
    int points = 101;
    bool operator==(const KernelConfig&) const = default;
};

struct MlConfig {
    double beta = 0.5;
    double z_min = -10.0;
    double z_max = 0.0;
    int points = 101;
    bool operator==(const MlConfig&) const = default;
};

struct DensityConfig {
    double beta = 0.5;
    double t = 1.0;
    double x_max = 5.0;
    int points = 101;
    bool operator==(const DensityConfig&) const = default;
};

struct IsometryConfig {
    std::string integrand = "constant";  // constant: X = c; time_mark: X = c s |h|
    double c = 1.0;
    bool operator==(const IsometryConfig&) const = default;
};

struct MomentsConfig {
    /// Fit window; the last half of the horizon when unset.
    std::optional<double> window_start;
    std::optional<double> window_end;
    bool operator==(const MomentsConfig&) const = default;
};

struct BoundsConfig {
    double target = 0.25;
    double growth_exponent = 2.0;  // rho > 1 of the energy certificate
    double eta = 1.0;
    int renewal_points = 1000;
    bool operator==(const BoundsConfig&) const = default;
};

struct UpsilonConfig {
    double gamma_min = 0.1;
    double gamma_max = 10.0;
    int points = 50;
    bool operator==(const UpsilonConfig&) const = default;
};

struct BlowupConfig {
    double C = 1.0;
    double D = 1.0;
    double gamma_exp = 1.0;
    double theta = 0.0;
    double T = 2.0;
    int points = 1000;
    bool operator==(const BlowupConfig&) const = default;
};

struct ExperimentConfig {
    kernels::ModelParams model;
    GridSpec grid;
    kernels::TruncationPolicy truncation;
    SigmaConfig sigma;
    MuConfig mu;
    NoiseConfig noise;
    InitialConfig initial;
    RunConfig run;
    KernelConfig kernel;
    MlConfig ml;
    DensityConfig density;
    IsometryConfig isometry;
    MomentsConfig moments;
    BoundsConfig bounds;
    UpsilonConfig upsilon;
    BlowupConfig blowup;

    bool operator==(const ExperimentConfig&) const;
};

/// Parses and validates. Throws ParseError (with line) on malformed text and
/// ValidationError (with the dotted key) on unknown keys or bad values.
ExperimentConfig parse_config(const std::string& text);

/// Every field, one key per line; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Throws ValidationError naming the first offending key.
void validate_config(const ExperimentConfig& config);

noise::SigmaSpec make_sigma(const ExperimentConfig& config);
noise::LevyMeasureSpec make_mu(const ExperimentConfig& config);
/// Initial field on the grid.
std::vector<double> make_initial(const ExperimentConfig& config);

}  // namespace fracspde::config
