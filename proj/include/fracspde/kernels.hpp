#pragma once

// Kernels of the space-time fractional heat operator
//   d^beta_t u = -nu (-Laplace)^{alpha/2} u   on R^d, d in {1, 2}.
//
//   p_s(x)   transition density of the isotropic alpha-stable process, symbol exp(-s nu |xi|^alpha)
//   G_t(x)   Green function, symbol E_beta(-nu |xi|^alpha t^beta); G_t = int p_s f_{E_t}(s) ds
//
// Point arguments are spans of length d. All free functions are reentrant.

#include <cstddef>
#include <span>
#include <vector>

#include "fracspde/grid.hpp"
#include "fracspde/specfun.hpp"

namespace fracspde::kernels {

struct ModelParams {
    double alpha = 2.0;
    double beta = 1.0;
    double nu = 1.0;
    int d = 1;

    /// Throws DomainError naming the failing constraint, including the
    /// standing assumption d < min(2, 1/beta) alpha.
    void validate() const;
    /// beta d / alpha, the exponent of t in the L2 norm of G_t.
    double scaling() const noexcept { return beta * d / alpha; }
    specfun::FracOrder order() const { return specfun::FracOrder(beta); }

    bool operator==(const ModelParams&) const = default;
};

enum class GreenMethod { subordination, spectral };

/// p_s(x). Uses closed forms for alpha in {1, 2}; otherwise a Zolotarev-type
/// integral (d = 1) or Gaussian subordination (d = 2).
double stable_transition_density(const ModelParams& params, double s, std::span<const double> x);
double stable_transition_density_radial(const ModelParams& params, double s, double r);

/// p_s at radius r by direct Fourier inversion of the symbol, never using a
/// closed form. Slower; kept as an independent check of the production path.
double stable_transition_density_fourier(const ModelParams& params, double s, double r);

/// G_t(x). Returns +infinity at x = 0 when beta < 1 and d >= alpha.
double green_function(const ModelParams& params, double t, std::span<const double> x, GreenMethod method);
double green_function_radial(const ModelParams& params, double t, double r, GreenMethod method);

/// int G_t(x)^2 dx by spatial quadrature of the subordination route.
double green_l2_norm(const ModelParams& params, double t);

/// C* with int G_t^2 dx = C* t^{-beta d / alpha}, from the spectral integral.
double c_star(const ModelParams& params);

/// Thresholds checked by build_green_table. The defaults are strict; subdiffusive
/// (beta < 1) or heavy-tailed (alpha < 2) kernels decay too slowly to meet them
/// on desk-sized grids, and experiments relax them explicitly.
struct TruncationPolicy {
    double nyquist_symbol = 1e-8;
    double tail_mass = 1e-6;
};

/// Diagnostics of the truncation heuristics for a (params, grid) pair.
struct TruncationReport {
    double nyquist_symbol = 0.0;  // symbol at the axis Nyquist frequency, t = dt
    double tail_mass = 0.0;       // estimated mass of G_T outside the box
};

TruncationReport truncation_report(const ModelParams& params, const GridSpec& grid);

/// Periodized Green slices G(k dt, .) for k = 0..nt on the lattice of a grid.
/// Slice 0 is the lattice delta. Immutable after construction.
class GreenTable {
public:
    const ModelParams& params() const noexcept { return params_; }
    const GridSpec& grid() const noexcept { return grid_; }
    const TruncationReport& report() const noexcept { return report_; }
    int slices() const noexcept { return grid_.nt + 1; }

    /// Real-space values of slice k indexed by lattice lag, row-major with
    /// index i standing for lag i h (periodic, so i >= n/2 is a negative lag).
    std::span<const double> slice(int k) const;

    /// Lattice Fourier multiplier of slice k on the half-complex layout
    /// n^{d-1} x (n/2 + 1): E_beta(-nu |xi|^alpha (k dt)^beta). Real because G is even.
    std::span<const double> symbol(int k) const;

    /// Slice k at an arbitrary lag, periodic multilinear interpolation.
    double value(int k, std::span<const double> lag) const;

    /// Throws BindingError unless `other` is this table's grid.
    void require_grid(const GridSpec& other, const char* what) const;

private:
    friend GreenTable build_green_table(const ModelParams&, const GridSpec&, const TruncationPolicy&);
    GreenTable(const ModelParams& params, const GridSpec& grid) : params_(params), grid_(grid) {}

    ModelParams params_;
    GridSpec grid_;
    TruncationReport report_;
    std::size_t real_size_ = 0;
    std::size_t spectral_size_ = 0;
    std::vector<double> values_;
    std::vector<double> symbols_;
};

/// Throws ResolutionError naming the failed heuristic and parameter.
GreenTable build_green_table(const ModelParams& params, const GridSpec& grid, const TruncationPolicy& policy = {});

}  // namespace fracspde::kernels
