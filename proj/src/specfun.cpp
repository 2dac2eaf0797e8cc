#include "fracspde/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracspde/errors.hpp"
#include "fracspde/quadrature.hpp"
#include "peaked_integral.hpp"

namespace fracspde::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-kUnderflow) is below the smallest normal double.
constexpr double kUnderflow = 745.0;

void require_subordinated(FracOrder beta, const char* op) {
    if (beta.classical()) {
        throw DomainError(std::string(op) +
                          ": beta = 1 has no stable subordinator density; use the deterministic time change E_t = t");
    }
}

// log a(phi) for the Kanter / Zolotarev representation of g_beta; `phi_comp`
// is pi - phi computed without cancellation.
double kanter_log_a(double beta, double phi, double phi_comp) {
    const double s_phi = std::sin(phi < 0.5 * kPi ? phi : phi_comp);
    return beta / (1.0 - beta) * std::log(std::sin(beta * phi)) + std::log(std::sin((1.0 - beta) * phi)) -
           std::log(s_phi) / (1.0 - beta);
}

}  // namespace

FracOrder::FracOrder(double beta) : beta_(beta) {
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("beta must lie in (0, 1], got " + std::to_string(beta));
    }
}

double mittag_leffler_series(FracOrder beta, double z) {
    if (!(std::abs(z) <= 5.0)) throw DomainError("mittag_leffler_series: |z| must be <= 5");
    const double b = beta.value();
    double sum = 1.0;
    if (z == 0.0) return sum;
    const double log_abs = std::log(std::abs(z));
    for (int k = 1; k < 5000; ++k) {
        const double magnitude = std::exp(k * log_abs - std::lgamma(b * k + 1.0));
        const double term = (z < 0.0 && (k & 1)) ? -magnitude : magnitude;
        sum += term;
        if (magnitude < 1e-18 && b * k > 2.0) break;
    }
    return sum;
}

double mittag_leffler_integral(FracOrder beta, double z) {
    if (!(z < 0.0)) throw DomainError("mittag_leffler_integral: requires z < 0");
    require_subordinated(beta, "mittag_leffler_integral");
    const double b = beta.value();
    const double x = -z;
    const double cos_bp = std::cos(b * kPi);
    // With s = (x u)^{1/beta} the integral becomes
    //   beta/x * int_0^inf exp(-s) s^{beta-1} / den(s^beta / x) ds,  den(u) = u^2 + 2u cos(beta pi) + 1.
    // On s < 1 we go back to w = s^beta, where the integrand is bounded.
    auto den = [x, cos_bp](double w) {
        const double u = w / x;
        return u * u + 2.0 * u * cos_bp + 1.0;
    };
    auto f_w = [b, den](double w) { return std::exp(-std::pow(w, 1.0 / b)) / den(w) / b; };
    auto f_s = [b, den](double s) { return std::exp(-s) * std::pow(s, b - 1.0) / den(std::pow(s, b)); };
    // den is smallest at u = -cos(beta pi) when beta > 1/2.
    const double w_peak = cos_bp < 0.0 ? -cos_bp * x : 0.0;
    constexpr double kRel = 1e-11;
    quad::Estimate total;
    // Tanh-sinh only near w = 0, where exp(-w^{1/beta}) is not smooth.
    // Since x > 1, w_peak < 1/4 means |cos(beta pi)| < 1/4 and den is nearly flat.
    const bool peak_inside = w_peak > 0.25 && w_peak < 1.0;
    const double w_edge = 0.5 * (peak_inside ? w_peak : 1.0);
    total += quad::tanh_sinh_estimate(f_w, 0.0, w_edge, kRel);
    if (peak_inside) {
        total += quad::gauss_kronrod_estimate(f_w, w_edge, w_peak, kRel);
        total += quad::gauss_kronrod_estimate(f_w, w_peak, 1.0, kRel);
    } else {
        total += quad::gauss_kronrod_estimate(f_w, w_edge, 1.0, kRel);
    }
    const double s_peak = std::pow(w_peak, 1.0 / b);
    if (s_peak > 1.0 && s_peak < kUnderflow) {
        total += quad::gauss_kronrod_estimate(f_s, 1.0, s_peak, kRel);
        total += quad::gauss_kronrod_estimate(f_s, s_peak, kUnderflow, kRel);
    } else {
        total += quad::gauss_kronrod_estimate(f_s, 1.0, kUnderflow, kRel);
    }
    const double integral = b / x * quad::checked(total, quad::Tolerance{kRel, 1e-12}, "mittag_leffler");
    return std::sin(b * kPi) / (b * kPi) * integral;
}

double mittag_leffler_asymptotic(FracOrder beta, double z) {
    if (!(z <= -kAsymptoticSeam)) throw DomainError("mittag_leffler_asymptotic: requires z <= -kAsymptoticSeam");
    require_subordinated(beta, "mittag_leffler_asymptotic");
    const double b = beta.value();
    const double log_x = std::log(-z);
    // E_beta(-x) ~ sum_{k>=1} (-1)^{k+1} x^{-k} / Gamma(1 - beta k), with
    // 1/Gamma(1-y) = Gamma(y) sin(pi y) / pi. Summed up to the smallest term.
    double sum = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 2000; ++k) {
        const double y = b * k;
        const double magnitude = std::exp(std::lgamma(y) - k * log_x) / kPi;
        if (magnitude > previous) break;
        previous = magnitude;
        const double term = magnitude * std::sin(kPi * y);
        sum += (k & 1) ? term : -term;
        if (magnitude < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double mittag_leffler(FracOrder beta, double z) {
    if (!(z <= 0.0)) {
        throw DomainError("mittag_leffler: only z <= 0 is supported, got " + std::to_string(z));
    }
    if (z == 0.0) return 1.0;
    if (beta.classical()) return std::exp(z);
    if (-z <= kSeriesSeam) return mittag_leffler_series(beta, z);
    if (-z >= kAsymptoticSeam) return mittag_leffler_asymptotic(beta, z);
    return mittag_leffler_integral(beta, z);
}

double stable_density(FracOrder beta, double u) {
    require_subordinated(beta, "stable_density");
    if (u <= 0.0) return 0.0;
    const double b = beta.value();
    // g(u) = beta/((1-beta) pi u) * int_0^pi G e^{-G} dphi,  G = u^{-beta/(1-beta)} a(phi).
    const double log_c = -b / (1.0 - b) * std::log(u);
    auto log_g = [b, log_c](double phi, double phi_comp) { return log_c + kanter_log_a(b, phi, phi_comp); };
    const quad::Estimate integral = detail::integrate_peaked(log_g, kPi, 1e-11);
    const double scale = b / ((1.0 - b) * kPi * u);
    quad::Estimate total{scale * integral.value, scale * integral.error, scale * integral.l1};
    return quad::checked(total, quad::Tolerance{1e-9, 1e-300}, "stable_density");
}

double inv_subordinator_density(FracOrder beta, double t, double x) {
    require_subordinated(beta, "inv_subordinator_density");
    if (!(t > 0.0)) throw DomainError("inv_subordinator_density: t must be positive");
    if (!(x > 0.0)) throw DomainError("inv_subordinator_density: x must be positive");
    const double b = beta.value();
    // With u = t x^{-1/beta}:  f = t/beta x^{-1-1/beta} g(u) = t^{-beta}/beta * u^{1+beta} g(u).
    const double log_u = std::log(t) - std::log(x) / b;
    double tail;
    if (log_u > 200.0) {
        // u^{1+beta} g(u) -> Gamma(1+beta) sin(pi beta) / pi, correction O(u^{-beta}).
        const double u_b = std::exp(-b * log_u);
        tail = (std::tgamma(1.0 + b) * std::sin(kPi * b) -
                0.5 * std::tgamma(1.0 + 2.0 * b) * std::sin(2.0 * kPi * b) * u_b) / kPi;
    } else {
        const double g = stable_density(beta, std::exp(log_u));
        tail = g == 0.0 ? 0.0 : std::exp((1.0 + b) * log_u + std::log(g));
    }
    return std::pow(t, -b) / b * tail;
}

}  // namespace fracspde::specfun
