#pragma once

// Integrals of the form  int_0^w g(theta) exp(-g(theta)) dtheta  with g monotone,
// as they arise in Zolotarev-type representations of stable densities. g may
// span hundreds of orders of magnitude near either endpoint, so each half of
// the interval is integrated in the logarithm of the distance to its endpoint.

#include <cmath>

#include "fracspde/quadrature.hpp"

namespace fracspde::detail {

/// log_g(theta, w - theta) must be monotone in theta; both arguments are
/// supplied so the caller can avoid cancellation near either endpoint.
template <class LogG>
quad::Estimate integrate_peaked(LogG&& log_g, double w, double rel) {
    constexpr double kMinLog = -700.0;
    constexpr double kNegligible = 80.0;
    const double half = 0.5 * w;
    const double v_half = std::log(half);

    // side = 0: theta = e^v; side = 1: w - theta = e^v.
    auto lg = [&](int side, double v) {
        const double d = std::exp(v);
        return side == 0 ? log_g(d, w - d) : log_g(w - d, d);
    };
    auto log_integrand = [&](int side, double v) {
        const double l = lg(side, v);
        return l - std::exp(l) + v;
    };

    quad::Estimate total;
    for (int side = 0; side < 2; ++side) {
        // Peak of g e^{-g} is at g = 1; find it in v if it lies on this side.
        const double l_half = lg(side, v_half);
        const double l_far = lg(side, kMinLog);
        double v_peak = v_half;
        if ((l_half > 0.0) != (l_far > 0.0)) {
            double lo = kMinLog;
            double hi = v_half;
            // The split point only needs to be near the peak.
            for (int it = 0; it < 60 && hi - lo > 0.05; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((lg(side, mid) > 0.0) == (l_far > 0.0)) lo = mid; else hi = mid;
            }
            v_peak = 0.5 * (lo + hi);
        }
        const double ref = log_integrand(side, v_peak);
        double step = 1.0;
        double v_lo = v_peak - step;
        while (v_lo > kMinLog && log_integrand(side, v_lo) > ref - kNegligible) {
            step *= 1.5;
            v_lo -= step;
        }
        v_lo = std::max(v_lo, kMinLog);

        auto f = [&](double v) {
            const double l = log_integrand(side, v);
            return l > -745.0 ? std::exp(l) : 0.0;
        };
        total += quad::gauss_kronrod_estimate(f, v_lo, v_peak, rel);
        if (v_peak < v_half) total += quad::gauss_kronrod_estimate(f, v_peak, v_half, rel);
    }
    return total;
}

}  // namespace fracspde::detail
