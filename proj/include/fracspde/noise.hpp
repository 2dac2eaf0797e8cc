#pragma once

// Poisson random measure N on [0, T] x box x R^d with intensity dt dx mu(dh),
// multiplicative coefficients sigma(u, h), and stochastic convolutions of
// sigma(u, h) against a Green table, with or without compensation.

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracspde/grid.hpp"
#include "fracspde/kernels.hpp"
#include "fracspde/rng.hpp"

namespace fracspde::noise {

struct LevyAtom {
    Point h{};
    double mass = 0.0;
};

/// Jump-size measure mu. Either a finite list of atoms, or a radial density
/// rho(|h|) dh restricted to the shell eps <= |h| <= R.
class LevyMeasureSpec {
public:
    enum class Form { discrete, density };
    enum class Radial { exponential, power };

    /// Unit-free empty measure (no jumps).
    static LevyMeasureSpec none(int d);
    static LevyMeasureSpec point(int d, Point h, double mass = 1.0);
    static LevyMeasureSpec discrete(int d, std::vector<LevyAtom> atoms);
    /// rho(r) = scale exp(-rate r).
    static LevyMeasureSpec exponential(int d, double scale, double rate, double eps, double R);
    /// rho(r) = scale r^{-d-index}; infinite activity before truncation.
    static LevyMeasureSpec power(int d, double scale, double index, double eps, double R);

    int d() const noexcept { return d_; }
    Form form() const noexcept { return form_; }
    Radial radial() const noexcept { return radial_; }
    const std::vector<LevyAtom>& atoms() const noexcept { return atoms_; }
    double scale() const noexcept { return scale_; }
    double shape() const noexcept { return shape_; }
    double eps() const noexcept { return eps_; }
    double R() const noexcept { return R_; }

    /// mu of the truncated support, from the closed-form radial mass.
    double total_mass() const noexcept { return total_mass_; }
    /// rho(r) for the density form, before truncation.
    double radial_density(double r) const;

    /// int f(h) mu(dh) over the truncated support. Discrete: exact sum.
    /// Density: adaptive quadrature in log |h|, with a 64-point angular rule when d = 2.
    double integrate(const std::function<double(const Point&)>& f) const;
    /// int f(h) dh over the shell eps <= |h| <= R (density form; NaN for atoms).
    double integrate_lebesgue(const std::function<double(const Point&)>& f) const;

    /// int (1 ^ |h|^2) mu(dh) over the truncated support, by quadrature.
    double levy_integral() const;
    /// int_{|h| < eps} |h|^2 mu(dh), the second moment discarded by truncation.
    double small_jump_second_moment() const;

    /// Draws from mu / total_mass. Requires total_mass > 0.
    Point sample_mark(rng::Philox& gen) const;

    std::string describe() const;

private:
    LevyMeasureSpec() = default;
    double radial_mass(double r) const;  // mu(eps <= |h| <= r)
    double shell_weight(double r) const;  // rho(r) times the surface measure of the r-sphere

    int d_ = 1;
    Form form_ = Form::discrete;
    Radial radial_ = Radial::exponential;
    std::vector<LevyAtom> atoms_;
    std::vector<double> cumulative_;
    double scale_ = 0.0;
    double shape_ = 0.0;
    double eps_ = 0.0;
    double R_ = 0.0;
    double total_mass_ = 0.0;
};

/// sigma(u, h) = amplitude(u) * mark_factor(h). The product form lets the
/// compensator integrate over mu once instead of at every grid point.
struct SigmaSpec {
    enum class Kind { linear_lipschitz, power_growth };

    Kind kind = Kind::linear_lipschitz;
    std::string name;
    std::function<double(double)> amplitude;
    std::function<double(const Point&)> mark_factor;
    /// Upper envelope: |sigma(x,h) - sigma(y,h)| <= J(h) lip |x - y|.
    std::function<double(const Point&)> J;
    /// Lower envelope: |sigma(x,h)| >= L J_bar(h) |x|^growth_exponent. Empty if none declared.
    std::function<double(const Point&)> J_bar;
    double lip = 0.0;
    double L = 0.0;
    double growth_exponent = 1.0;

    double operator()(double u, const Point& h) const { return amplitude(u) * mark_factor(h); }

    static SigmaSpec zero();
    /// c |h| u.
    static SigmaSpec linear(double c);
    /// c |h| sin u: Lipschitz and bounded, no lower envelope.
    static SigmaSpec bounded(double c);
    /// c |h| |u|^rho sign(u), rho > 1: superlinear, not Lipschitz.
    static SigmaSpec power(double c, double rho);
};

struct ConditionReport {
    double K2 = 0.0;      // int J^2 dmu
    double K1 = 0.0;      // int J dmu
    double kappa2 = 0.0;  // int J_bar^2 dmu (NaN without a lower envelope)
    double kappa1 = 0.0;  // int J_bar dmu
    double kappa1_lebesgue = 0.0;  // int J_bar dh over the truncated shell (NaN for atoms)
    double small_jump_second_moment = 0.0;

    // Sampled pointwise checks of the declared envelopes.
    bool vanishes_at_zero = false;
    bool lipschitz_holds = false;
    bool lower_bound_holds = false;

    bool compensated_existence = false;      // Lipschitz, sigma(0,.) = 0, K2 finite
    bool noncompensated_existence = false;   // Lipschitz, sigma(0,.) = 0, K1 finite
    bool linear_lower_bound = false;         // exponent 1, kappa2 > 0
    bool superlinear_growth = false;         // exponent > 1, kappa2 > 0
    bool noncompensated_lower_bound = false;           // exponent 1, kappa1 > 0 against mu
    bool noncompensated_lower_bound_lebesgue = false;  // same with Lebesgue measure on the shell

    std::string summary() const;
};

ConditionReport validate_conditions(const SigmaSpec& sigma, const LevyMeasureSpec& mu);

struct NoiseAtom {
    double s = 0.0;
    Point y{};
    Point h{};
};

struct NoiseRealization {
    GridSpec grid;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<NoiseAtom> atoms;  // sorted by s
};

/// Atom count ~ Poisson(T |box| total_mass); times and locations uniform; marks
/// from mu / total_mass. Deterministic in (grid, mu, seed, stream).
NoiseRealization sample_noise(const GridSpec& grid, const LevyMeasureSpec& mu, std::uint64_t seed,
                              std::uint64_t stream = 0, bool require_positive = false);

/// Time step m >= 1 with s in (t_{m-1}, t_m]. Sigma sees u(t_{m-1}), and the
/// atom reaches output time t_k through slice k - m.
int atom_step(const GridSpec& grid, double s) noexcept;

/// Lattice field history: history[m] = u(t_m, .), flat row-major.
using FieldHistory = std::span<const std::vector<double>>;

/// Stochastic convolution at grid time t_k and lattice node i, summed atom by
/// atom. history must hold u(t_m) for m = 0..k-1.
double stochastic_convolution(const kernels::GreenTable& table, const NoiseRealization& noise, FieldHistory history,
                              const SigmaSpec& sigma, const LevyMeasureSpec& mu, bool compensated, int k,
                              std::size_t i);

/// The same sum for every node at once: per-step sources are deposited on the
/// lattice and convolved with the Green slices in Fourier space.
class ConvolutionField {
public:
    ConvolutionField(const kernels::GreenTable& table, const NoiseRealization& noise, const SigmaSpec& sigma,
                     const LevyMeasureSpec& mu, bool compensated);
    ~ConvolutionField();
    ConvolutionField(const ConvolutionField&) = delete;
    ConvolutionField& operator=(const ConvolutionField&) = delete;

    /// Records the sources of step m (atoms in (t_{m-1}, t_m] and the
    /// compensator) from u_prev = u(t_{m-1}). Steps must arrive in order 1, 2, ...
    void add_step(int m, std::span<const double> u_prev);
    /// Writes the convolution at t_k using steps 1..k, which must have been added.
    void evaluate(int k, std::span<double> out);
    /// Forgets all steps.
    void reset();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// X(s, x, h) on [0, T] x box x R^d.
using Integrand = std::function<double(double, const Point&, const Point&)>;

struct MomentCheck {
    double mc = 0.0;
    double std_error = 0.0;
    double quadrature = 0.0;
    bool pass = false;  // |mc - quadrature| <= 3 std_error
};

struct IsometryReport {
    MomentCheck second;  // E |int X dN~|^2 vs int X^2 ds dx dmu
    MomentCheck first;   // E int X dN vs int X ds dx dmu
    std::size_t replicas = 0;
};

/// Monte Carlo against quadrature on the grid's domain [0, T] x box.
IsometryReport isometry_check(const Integrand& X, const GridSpec& domain, const LevyMeasureSpec& mu,
                              std::size_t replicas, std::uint64_t seed);

}  // namespace fracspde::noise
