#pragma once

// Explicit constants and bounds, Volterra renewal solvers, ensemble moment
// estimators and growth-rate fits.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracspde/kernels.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/solver.hpp"

namespace fracspde::analysis {

/// C** = lip sqrt(C* K Gamma(1 - s) / gamma^{1 + s}) with s = beta d / alpha.
double contraction_constant(const kernels::ModelParams& params, double K, double lip, double gamma);

/// lip sqrt(K int_0^inf C* tau^{-s} e^{-gamma tau} dtau) = lip sqrt(C* K Gamma(1 - s) / gamma^{1 - s}):
/// the contraction factor of the compensated convolution in the weighted mean-square norm.
double laplace_contraction_constant(const kernels::ModelParams& params, double K, double lip, double gamma);

/// The same factor for the lattice scheme:
/// lip sqrt(K sum_j dt h^d |slice j|^2 e^{-gamma (j + 1) dt}).
double lattice_contraction_constant(const kernels::GreenTable& table, double K, double lip, double gamma);

/// Smallest gamma = 2^{j/8} with contraction_constant(gamma) <= target.
double choose_gamma(const kernels::ModelParams& params, double K, double lip, double target);

/// K lip / gamma.
double contraction_constant_noncomp(double K, double lip, double gamma);

struct RenewalSolution {
    std::vector<double> t;
    std::vector<double> f;
    /// Envelope c2 exp(c3 rate t) with rate = (kappa' Gamma(rho))^{1/rho}.
    double rate = 0.0;
    double c2 = 0.0;
    double c3 = 1.0;
    std::vector<double> envelope;
    /// max_n |f_n - c1 - kappa' (discrete integral)_n| after re-substitution.
    double residual = 0.0;
};

/// n + 1 points T (i/n)^grade. Grade 2 restores second-order accuracy of the
/// renewal solver when the solution behaves like t^rho near 0.
std::vector<double> graded_time_grid(double T, std::size_t n, double grade = 2.0);

/// f(t) = c1 + kappa' int_0^t (t - s)^{rho - 1} f(s) ds by product integration
/// on t_grid (increasing, starting at 0), piecewise linear in f.
RenewalSolution renewal_solve(double c1, double kappa_prime, double rho, std::span<const double> t_grid);

/// (kappa' Gamma(rho))^{1/rho}: growth rate of the renewal solution.
double renewal_rate(double kappa_prime, double rho);

/// First time on t_grid where h(t) = C + D int_0^t h(s)^{1+gamma_exp} (t - s)^{-theta} ds
/// exceeds 1e12 (or the implicit step has no solution).
std::optional<double> blowup_time_on_grid(double C, double D, double gamma_exp, double theta,
                                          std::span<const double> t_grid);

/// The same after one halving of t_grid; nullopt when h stays finite.
std::optional<double> nonlinear_blowup(double C, double D, double gamma_exp, double theta,
                                       std::span<const double> t_grid);

struct MomentSeries {
    std::vector<double> times;
    std::vector<double> sup_moment;
    std::vector<double> inf_moment;
    std::vector<double> std_error;  // at the maximizing node
    int p = 2;
    std::size_t replicas = 0;  // paths used
    std::size_t exploded = 0;  // paths excluded
};

/// Sample mean of |u(t_k, x)|^p per node, then extrema over x.
MomentSeries moment_estimator(std::span<const solver::SolutionPath> paths, int p);

struct EnsembleResult {
    MomentSeries first;
    MomentSeries second;
    /// Sample mean of u and its standard error, [k][node].
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> mean_std_error;
};

/// Runs `replicas` paths (replica r uses noise stream r) in parallel and
/// reduces them in replica order, so results do not depend on the thread count.
EnsembleResult simulate_ensemble(const kernels::GreenTable& table, std::span<const double> u0,
                                 const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                                 solver::NoiseKind kind, std::size_t replicas, std::uint64_t seed,
                                 const solver::SimulationOptions& options = {});

/// Successive Picard differences in the mean-square weighted norm
/// sup_k sup_x e^{-gamma t_k} E|u^{(n+1)} - u^{(n)}|^2 (square root), with the
/// expectation estimated over independent noise realizations.
struct PicardExpectation {
    std::vector<double> differences;
    std::vector<double> ratios;
    std::size_t replicas = 0;
};

PicardExpectation picard_expectation_diagnostics(const kernels::GreenTable& table, std::span<const double> u0,
                                                 const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                                                 double gamma, int iterations, std::size_t replicas,
                                                 std::uint64_t seed);

struct GrowthFit {
    double rate = 0.0;
    double half_width = 0.0;  // 95% confidence
    double intercept = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of log sup_moment against t over [t_begin, t_end].
GrowthFit growth_rate_fit(const MomentSeries& series, double t_begin, double t_end);

/// (2 pi)^{-d} int dxi / (gamma + 2 nu |xi|^alpha), by quadrature. Requires d < alpha.
double upsilon(double alpha, double nu, int d, double gamma);

/// sup{lambda > 0 : upsilon(lambda) > t}, 0 when the set is empty in [1e-12, 1e12].
double upsilon_inverse(double alpha, double nu, int d, double t);

/// Growth rates of the renewal envelopes bounding the second moment.
struct EnvelopeRates {
    double rho = 0.0;    // 1 - beta d / alpha
    double upper = 0.0;  // kappa' = K lip^2 C*
    double lower = 0.0;  // kappa' = kappa L^2 C*
};

EnvelopeRates envelope_rates(const kernels::ModelParams& params, double K, double lip, double kappa, double L);

/// First-moment lower rates for noncompensated noise: kappa L from the
/// mass-one spatial integral of G, and kappa L C* with the extra constant.
struct NoncompensatedRates {
    double without_cstar = 0.0;
    double with_cstar = 0.0;
};

NoncompensatedRates noncompensated_lower_rates(const kernels::ModelParams& params, double kappa, double L);

struct CertificateIteration {
    double theta = 0.0;
    double A = 0.0;
    int steps = 0;
    double final_value = 0.0;
    bool diverged = false;   // passed 1e12
    bool converged = false;  // settled geometrically at eta^2 / (1 - A)
};

struct CertificateReport {
    double C1 = 0.0;
    double exponent = 0.0;          // 1 / (1 - s), solves A(theta0) = 1
    double printed_exponent = 0.0;  // 1 - s
    double theta0 = 0.0;
    double theta0_printed = 0.0;
    double A_at_theta0 = 0.0;
    CertificateIteration below;  // theta0 / 2
    CertificateIteration above;  // 2 theta0

    std::string summary() const;
};

/// theta0 with A(theta) = kappa L^2 C1 theta^{-(1-s)} eta^{2 rho - 2} equal to 1,
/// then x <- eta^2 + A x from x = eta^2 for up to 200 steps at theta0/2 and 2 theta0.
CertificateReport energy_blowup_certificate(const kernels::ModelParams& params, double kappa, double L, double rho,
                                            double eta);

}  // namespace fracspde::analysis
