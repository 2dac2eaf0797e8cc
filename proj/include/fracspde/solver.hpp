#pragma once

// Mild-solution march on the periodic grid and the Picard fixed-point iteration.
//
//   u(t_k) = P_{t_k} u0 + sum_{m <= k} G_{k-m} * [sources of step m built from u(t_{m-1})]

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fracspde/grid.hpp"
#include "fracspde/kernels.hpp"
#include "fracspde/noise.hpp"

namespace fracspde::solver {

using Field = std::vector<double>;

enum class NoiseKind { compensated, noncompensated };

const char* to_string(NoiseKind kind) noexcept;

struct SolutionPath {
    kernels::ModelParams params;
    GridSpec grid;
    std::string sigma;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    /// values[k] = u(t_k, .). Steps after an explosion hold NaN.
    std::vector<Field> values;
    bool exploded = false;
    int explosion_step = -1;
    double explosion_time = 0.0;
};

/// Lattice convolution of slice k with u0 (times the cell volume).
Field deterministic_part(std::span<const double> u0, const kernels::GreenTable& table, int k);

struct SimulationOptions {
    /// Skip the existence-condition check (blow-up experiments).
    bool override_conditions = false;
    double explosion_guard = 1e12;
};

/// Throws ConditionViolation unless the condition matching `kind` holds.
void require_existence(const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind);

/// Marches one path driven by a given noise realization.
SolutionPath simulate_path(const kernels::GreenTable& table, std::span<const double> u0,
                           const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind,
                           const noise::NoiseRealization& noise, const SimulationOptions& options = {});

/// Samples the noise from (seed, stream) and marches.
SolutionPath simulate_path(const kernels::GreenTable& table, std::span<const double> u0,
                           const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind,
                           std::uint64_t seed, std::uint64_t stream = 0, const SimulationOptions& options = {});

/// Builds the Green table with the default truncation policy first.
SolutionPath simulate_path(const kernels::ModelParams& params, const GridSpec& grid, std::span<const double> u0,
                           const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind,
                           std::uint64_t seed, const SimulationOptions& options = {});

/// max_k max_x e^{-gamma t_k} |u(t_k, x)|^p, then the p-th root. Ignores NaN steps.
double weighted_norm(const SolutionPath& path, double gamma, int p);

struct PicardDiagnostics {
    int iterations = 0;
    std::vector<double> differences;  // weighted norm of u^{(n)} - u^{(n-1)}, n = 1, 2, ...
    std::vector<double> ratios;       // differences[n] / differences[n-1]
    double residual = 0.0;            // weighted norm of u - (P u0 + A u) at the returned path
    bool converged = false;
};

struct PicardResult {
    SolutionPath path;
    PicardDiagnostics diagnostics;
};

/// u^{(0)} = P u0; u^{(n+1)} = P u0 + A u^{(n)} on one fixed noise realization,
/// until the weighted norm (p = 2 compensated, p = 1 otherwise) of the update
/// is at most tol. Throws ConvergenceError after max_iter.
PicardResult picard_solve(const kernels::GreenTable& table, std::span<const double> u0,
                          const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                          const noise::NoiseRealization& noise, double gamma, int max_iter, double tol,
                          NoiseKind kind = NoiseKind::compensated);

/// u^{(0)} = P u0 followed by `iterations` Picard iterates on one realization.
std::vector<std::vector<Field>> picard_iterates(const kernels::GreenTable& table, std::span<const double> u0,
                                                const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                                                const noise::NoiseRealization& noise, int iterations,
                                                NoiseKind kind = NoiseKind::compensated);

}  // namespace fracspde::solver
