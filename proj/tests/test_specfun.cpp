#include "doctest.h"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

#include "fracspde/errors.hpp"
#include "fracspde/specfun.hpp"

using namespace fracspde;
using specfun::FracOrder;

namespace {

// Levy density: the 1/2-stable law with Laplace transform exp(-sqrt(s)).
double levy_half(double u) { return std::exp(-1.0 / (4.0 * u)) / (2.0 * std::sqrt(std::numbers::pi) * u * std::sqrt(u)); }

// Direct power series with lgamma, used away from cancellation.
double ml_series_oracle(double beta, double z) {
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double term = std::pow(std::fabs(z), k) / std::exp(std::lgamma(beta * k + 1.0));
        sum += (z < 0 && k % 2 ? -term : term);
        if (term < 1e-18) break;
    }
    return sum;
}

}  // namespace

TEST_CASE("E_1 is the exponential") {
    for (double x = 0.0; x <= 30.0; x += 0.05) {
        CHECK(std::fabs(specfun::mittag_leffler(FracOrder(1.0), -x) - std::exp(-x)) <= 1e-12);
    }
}

TEST_CASE("E_1/2 equals exp(x^2) erfc(x)") {
    for (double x = 0.0; x <= 5.0; x += 0.01) {
        const double oracle = std::exp(x * x) * std::erfc(x);
        CHECK(std::fabs(specfun::mittag_leffler(FracOrder(0.5), -x) - oracle) <= 1e-8);
    }
}

TEST_CASE("Mittag-Leffler branches agree at their seams") {
    for (double beta : {0.3, 0.5, 0.7, 0.9}) {
        const FracOrder b(beta);
        const double z = -specfun::kSeriesSeam;
        CHECK(std::fabs(specfun::mittag_leffler_series(b, z) - specfun::mittag_leffler_integral(b, z)) <= 1e-12);
        const double w = -specfun::kAsymptoticSeam;
        CHECK(std::fabs(specfun::mittag_leffler_asymptotic(b, w) - specfun::mittag_leffler_integral(b, w)) <= 1e-12);
        CHECK(std::fabs(specfun::mittag_leffler(b, -0.5) - ml_series_oracle(beta, -0.5)) <= 1e-13);
    }
}

TEST_CASE("E_beta is one at zero and completely monotone on the negative axis") {
    for (double beta : {0.2, 0.5, 0.8, 1.0}) {
        const FracOrder b(beta);
        CHECK(specfun::mittag_leffler(b, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        double prev = 1.0;
        for (double x = 0.1; x < 100.0; x *= 1.3) {
            const double e = specfun::mittag_leffler(b, -x);
            CHECK(e > 0.0);
            CHECK(e < prev);
            prev = e;
        }
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(FracOrder(0.0), DomainError);
    CHECK_THROWS_AS(FracOrder(1.2), DomainError);
    CHECK_THROWS_AS(FracOrder(std::nan("")), DomainError);
    CHECK_THROWS_AS(specfun::mittag_leffler(FracOrder(0.5), 0.1), DomainError);
    CHECK_THROWS_AS(specfun::mittag_leffler_series(FracOrder(0.5), -6.0), DomainError);
    CHECK_THROWS_AS(specfun::stable_density(FracOrder(1.0), 1.0), DomainError);
    CHECK_THROWS_AS(specfun::inv_subordinator_density(FracOrder(0.5), -1.0, 1.0), DomainError);
}

TEST_CASE("one-sided stable density: Levy closed form and Laplace transform") {
    for (double u : {0.01, 0.1, 0.5, 1.0, 3.0, 20.0, 500.0}) {
        CHECK(specfun::stable_density(FracOrder(0.5), u) == doctest::Approx(levy_half(u)).epsilon(1e-9));
    }
    CHECK(specfun::stable_density(FracOrder(0.5), 0.0) == 0.0);
    CHECK(specfun::stable_density(FracOrder(0.5), -1.0) == 0.0);

    boost::math::quadrature::exp_sinh<double> integrator;
    for (double beta : {0.3, 0.6, 0.9}) {
        for (double s : {0.5, 1.0, 2.0}) {
            auto f = [&](double u) { return std::exp(-s * u) * specfun::stable_density(FracOrder(beta), u); };
            CHECK(integrator.integrate(f, 1e-12) == doctest::Approx(std::exp(-std::pow(s, beta))).epsilon(1e-7));
        }
    }
}

TEST_CASE("inverse subordinator density") {
    // beta = 1/2: E_t has the law of |B_{2t}|, density exp(-x^2/4t) / sqrt(pi t).
    for (double t : {0.5, 2.0}) {
        for (double x : {0.01, 0.3, 1.0, 2.5, 6.0}) {
            const double oracle = std::exp(-x * x / (4.0 * t)) / std::sqrt(std::numbers::pi * t);
            CHECK(specfun::inv_subordinator_density(FracOrder(0.5), t, x) == doctest::Approx(oracle).epsilon(1e-9));
        }
    }

    boost::math::quadrature::exp_sinh<double> integrator;
    for (double beta : {0.5, 0.8}) {
        for (double t : {0.5, 2.0}) {
            auto f = [&](double x) { return specfun::inv_subordinator_density(FracOrder(beta), t, x); };
            CHECK(std::fabs(integrator.integrate(f, 1e-12) - 1.0) <= 1e-6);
            for (double lambda : {0.5, 1.0, 4.0}) {
                auto g = [&](double x) { return std::exp(-lambda * x) * f(x); };
                const double oracle = specfun::mittag_leffler(FracOrder(beta), -lambda * std::pow(t, beta));
                CHECK(std::fabs(integrator.integrate(g, 1e-12) - oracle) <= 1e-6);
            }
        }
    }
}
