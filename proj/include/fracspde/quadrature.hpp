#pragma once

// Thin wrappers over Boost.Math quadrature that turn silent inaccuracy into
// a QuadratureError, plus a Wynn-epsilon summation for oscillatory tails.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fracspde/errors.hpp"

namespace fracspde::quad {

struct Tolerance {
    double rel = 1e-10;
    double abs = 0.0;
};

inline bool accepted(double error, double l1, const Tolerance& tol) {
    return std::isfinite(error) && error <= std::max(tol.rel * l1, tol.abs) * 64.0;
}

/// Value with its error estimate and L1 norm; pieces can be summed before the
/// accuracy check so that negligible pieces do not trip it.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;

    Estimate& operator+=(const Estimate& o) {
        value += o.value;
        error += o.error;
        l1 += o.l1;
        return *this;
    }
};

inline double checked(const Estimate& e, const Tolerance& tol, const char* what) {
    if (!std::isfinite(e.value) || !accepted(e.error, e.l1, tol)) {
        throw QuadratureError(std::string(what) + ": quadrature did not reach tolerance", e.value, e.error);
    }
    return e.value;
}

namespace detail {

/// One 15/31-point Gauss-Kronrod panel on [a, b]. Boost reports the panel
/// error on the reference interval, so it is rescaled here.
template <class F>
Estimate kronrod_panel(F& f, double a, double b) {
    Estimate e;
    e.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e.error, &e.l1);
    e.error *= 0.5 * std::fabs(b - a);
    return e;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod on a finite interval, unchecked: the panel
/// with the largest error is bisected until the summed error meets rel.
template <class F>
Estimate gauss_kronrod_estimate(F&& f, double a, double b, double rel, int max_panels = 2000) {
    struct Panel {
        double a, b;
        Estimate e;
        bool operator<(const Panel& o) const { return e.error < o.e.error; }
    };
    Estimate total;
    if (a == b) return total;
    std::vector<Panel> heap;
    heap.push_back({a, b, detail::kronrod_panel(f, a, b)});
    total = heap.front().e;
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    while (static_cast<int>(heap.size()) < max_panels) {
        if (!std::isfinite(total.value)) break;
        if (total.error <= std::max(rel * std::fabs(total.value), 50.0 * kEps * total.l1)) break;
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        Panel left{worst.a, mid, detail::kronrod_panel(f, worst.a, mid)};
        Panel right{mid, worst.b, detail::kronrod_panel(f, mid, worst.b)};
        total.value += left.e.value + right.e.value - worst.e.value;
        total.error += left.e.error + right.e.error - worst.e.error;
        total.l1 += left.e.l1 + right.e.l1 - worst.e.l1;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
    }
    // Re-sum to shed the drift of the running updates.
    total = Estimate{};
    for (const Panel& p : heap) total += p.e;
    return total;
}

/// Tanh-sinh on a finite interval, unchecked; suited to endpoint singularities.
template <class F>
Estimate tanh_sinh_estimate(F&& f, double a, double b, double rel) {
    Estimate e;
    if (a == b) return e;
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    try {
        e.value = integrator.integrate(f, a, b, rel, &e.error, &e.l1);
    } catch (const std::exception&) {
        e.value = std::numeric_limits<double>::quiet_NaN();
    }
    return e;
}

/// Adaptive Gauss-Kronrod on a finite (or infinite) interval.
template <class F>
double gauss_kronrod(F&& f, double a, double b, const Tolerance& tol, const char* what) {
    return checked(gauss_kronrod_estimate(f, a, b, tol.rel), tol, what);
}

/// Double-exponential rule on [a, inf); tolerant of algebraic endpoint singularities at a.
template <class F>
double half_line(F&& f, double a, const Tolerance& tol, const char* what) {
    thread_local boost::math::quadrature::exp_sinh<double> integrator(12);
    Estimate e;
    try {
        e.value = integrator.integrate(f, a, std::numeric_limits<double>::infinity(), tol.rel, &e.error, &e.l1);
    } catch (const std::exception& ex) {
        throw QuadratureError(std::string(what) + ": exp-sinh failed: " + ex.what(), e.value, e.error);
    }
    return checked(e, tol, what);
}

/// Tanh-sinh on a finite interval; suited to endpoint singularities.
template <class F>
double finite_singular(F&& f, double a, double b, const Tolerance& tol, const char* what) {
    return checked(tanh_sinh_estimate(f, a, b, tol.rel), tol, what);
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
class WynnEpsilon {
public:
    /// Adds the next partial sum and returns the current best limit estimate.
    double push(double partial_sum) {
        // Row e_{k}^{(n)} is stored diagonal-wise; only the last diagonal is kept.
        std::vector<double> next;
        next.reserve(diag_.size() + 1);
        next.push_back(partial_sum);
        for (std::size_t j = 0; j < diag_.size(); ++j) {
            const double before = (j == 0) ? 0.0 : diag_[j - 1];
            const double delta = next[j] - diag_[j];
            double value;
            if (delta == 0.0) {
                value = std::numeric_limits<double>::infinity();
            } else {
                value = before + 1.0 / delta;
            }
            if (!std::isfinite(value)) break;
            next.push_back(value);
        }
        diag_ = std::move(next);
        // Even columns hold the extrapolants.
        const std::size_t last_even = (diag_.size() - 1) & ~std::size_t{1};
        previous_ = current_;
        current_ = diag_[last_even];
        return current_;
    }

    double estimate() const { return current_; }
    double change() const { return std::abs(current_ - previous_); }

private:
    std::vector<double> diag_;
    double current_ = 0.0;
    double previous_ = std::numeric_limits<double>::quiet_NaN();
};

/// Integrates f over [0, inf) where f changes sign near the points
/// breaks(1) < breaks(2) < ...; the partial sums over successive pieces are
/// accelerated by Wynn epsilon. The first piece uses tanh-sinh because the
/// amplitude is typically not smooth at 0.
template <class F, class Breaks>
double oscillatory(F&& f, Breaks&& breaks, const Tolerance& tol, const char* what, int max_pieces = 400) {
    WynnEpsilon wynn;
    Estimate total;
    double left = 0.0;
    double scale = 0.0;
    int stable = 0;
    const double piece_rel = std::max(tol.rel * 0.01, 1e-13);
    for (int k = 1; k <= max_pieces; ++k) {
        const double right = breaks(k);
        total += (k == 1) ? tanh_sinh_estimate(f, left, right, piece_rel)
                          : gauss_kronrod_estimate(f, left, right, piece_rel);
        if (!std::isfinite(total.value)) break;
        scale = std::max(scale, std::abs(total.value));
        left = right;
        const double est = wynn.push(total.value);
        if (k >= 6) {
            const double allowed = std::max(tol.rel * scale, tol.abs);
            if (wynn.change() <= allowed) {
                if (++stable >= 3) {
                    if (total.error > 64.0 * allowed) break;
                    return est;
                }
            } else {
                stable = 0;
            }
        }
    }
    throw QuadratureError(std::string(what) + ": oscillatory integral did not converge", wynn.estimate(),
                          std::max(wynn.change(), total.error));
}

}  // namespace fracspde::quad
