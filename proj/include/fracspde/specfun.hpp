#pragma once

// Special functions behind the time-fractional Green function.
//
//   E_beta(z)   Mittag-Leffler function, z <= 0
//   g_beta(u)   density of D_1 for the beta-stable subordinator, E exp(-s D_1) = exp(-s^beta)
//   f_{E_t}(x)  density of the inverse subordinator E_t = inf{r : D_r > t}
//
// All functions are pure and reentrant.

namespace fracspde::specfun {

/// Time-fractional order beta in (0, 1]. beta = 1 is ordinary diffusion.
class FracOrder {
public:
    explicit FracOrder(double beta);
    double value() const noexcept { return beta_; }
    bool classical() const noexcept { return beta_ == 1.0; }

private:
    double beta_;
};

/// |z| up to which the power series is used; beyond it the Laplace-type
/// integral representation takes over.
inline constexpr double kSeriesSeam = 1.0;

/// |z| from which the algebraic asymptotic expansion replaces the integral.
inline constexpr double kAsymptoticSeam = 40.0;

/// E_beta(z) for z <= 0, absolute accuracy ~1e-12.
double mittag_leffler(FracOrder beta, double z);

/// Power series branch, exposed for seam checks. Requires |z| <= 5.
double mittag_leffler_series(FracOrder beta, double z);

/// Integral branch E_beta(-x) = sin(beta pi)/(beta pi) * int_0^inf exp(-(x u)^{1/beta}) / (u^2 + 2u cos(beta pi) + 1) du,
/// valid for beta < 1 and z < 0.
double mittag_leffler_integral(FracOrder beta, double z);

/// Asymptotic branch E_beta(-x) ~ sum_k (-1)^{k+1} x^{-k} / Gamma(1 - beta k), for beta < 1 and z <= -kAsymptoticSeam.
double mittag_leffler_asymptotic(FracOrder beta, double z);

/// One-sided beta-stable density g_beta(u); zero for u <= 0. Requires beta < 1.
double stable_density(FracOrder beta, double u);

/// Inverse-subordinator density f_{E_t}(x) = t/beta * x^{-1-1/beta} g_beta(t x^{-1/beta}).
double inv_subordinator_density(FracOrder beta, double t, double x);

}  // namespace fracspde::specfun
