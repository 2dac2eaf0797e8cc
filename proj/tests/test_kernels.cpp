#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/kernels.hpp"

using namespace fracspde;
using kernels::GreenMethod;
using kernels::ModelParams;

namespace {

constexpr double pi = std::numbers::pi;

double heat_kernel(double nu, int d, double t, double r) {
    return std::pow(4.0 * pi * nu * t, -0.5 * d) * std::exp(-r * r / (4.0 * nu * t));
}

double cauchy(double t, double x) { return t / (pi * (t * t + x * x)); }

ModelParams params(double alpha, double beta, int d = 1, double nu = 1.0) {
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.d = d;
    p.nu = nu;
    return p;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(params(2.0, 1.0).validate());
    CHECK_THROWS_AS(params(2.5, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(params(0.0, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(params(2.0, 0.0).validate(), DomainError);
    CHECK_THROWS_AS(params(2.0, 1.0, 1, -1.0).validate(), DomainError);
    CHECK_THROWS_AS(params(2.0, 1.0, 3).validate(), DomainError);
    // d < min(2, 1/beta) alpha
    CHECK_THROWS_AS(params(1.0, 1.0, 1).validate(), DomainError);
    CHECK_THROWS_AS(params(2.0, 1.0, 2).validate(), DomainError);
    CHECK_NOTHROW(params(1.5, 0.5, 2).validate());
}

TEST_CASE("classical limit is the heat kernel") {
    for (int d : {1, 2}) {
        // (2, 1, d = 2) violates d < alpha, so only p_s is checked there.
        const ModelParams p = params(2.0, 1.0, d, 0.7);
        for (double t : {0.25, 1.0}) {
            for (int j = 0; j <= 100; ++j) {
                const double r = 0.05 * j;
                const double oracle = heat_kernel(0.7, d, t, r);
                if (d == 1) {
                    CHECK(std::fabs(kernels::green_function_radial(p, t, r, GreenMethod::subordination) - oracle) <= 1e-6);
                    CHECK(std::fabs(kernels::green_function_radial(p, t, r, GreenMethod::spectral) - oracle) <= 1e-6);
                }
                CHECK(std::fabs(kernels::stable_transition_density_radial(p, t, r) - oracle) <= 1e-12);
            }
        }
    }
    CHECK(kernels::c_star(params(2.0, 1.0)) == doctest::Approx(1.0 / std::sqrt(8.0 * pi)).epsilon(1e-9));
}

TEST_CASE("stable transition density") {
    const ModelParams cauchy_p = params(1.0, 0.5);
    for (double s : {0.3, 1.0, 2.0}) {
        for (double x : {0.0, 0.4, 1.0, 5.0, 40.0}) {
            const double pt[1] = {x};
            CHECK(kernels::stable_transition_density(cauchy_p, s, pt) == doctest::Approx(cauchy(s, x)).epsilon(1e-10));
        }
    }
    // Production route against direct Fourier inversion.
    for (double alpha : {0.7, 1.3, 1.8}) {
        for (int d : {1, 2}) {
            const ModelParams p = params(alpha, 0.4, d);
            for (double r : {0.0, 0.5, 2.0}) {
                const double a = kernels::stable_transition_density_radial(p, 1.0, r);
                const double b = kernels::stable_transition_density_fourier(p, 1.0, r);
                CHECK(std::fabs(a - b) <= 1e-7 * std::max(1.0, a));
            }
        }
    }
}

TEST_CASE("stable semigroup: p_{s+r} = p_s * p_r") {
    const ModelParams p = params(1.5, 0.9);
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    for (auto [s, r] : {std::pair{0.3, 0.7}, std::pair{1.0, 0.5}}) {
        for (double x : {0.0, 0.8, 2.0}) {
            auto f = [&](double y) {
                const double a[1] = {y}, b[1] = {x - y};
                return kernels::stable_transition_density(p, s, a) * kernels::stable_transition_density(p, r, b);
            };
            double conv = 0.0;
            for (double lo = -60.0; lo < 60.0; lo += 2.0) conv += gk.integrate(f, lo, lo + 2.0, 10, 1e-12);
            const double direct[1] = {x};
            CHECK(std::fabs(conv - kernels::stable_transition_density(p, s + r, direct)) <= 1e-5);
        }
    }
}

TEST_CASE("subordination and spectral routes agree; kernels are nonnegative") {
    for (double alpha : {1.0, 1.5, 2.0}) {
        for (double beta : {0.5, 0.9}) {
            const ModelParams p = params(alpha, beta);
            for (double t : {0.5, 2.0}) {
                for (double r : {0.05, 0.3, 1.0, 3.0}) {
                    const double a = kernels::green_function_radial(p, t, r, GreenMethod::subordination);
                    const double b = kernels::green_function_radial(p, t, r, GreenMethod::spectral);
                    CHECK(a >= 0.0);
                    CHECK(std::fabs(a - b) <= 1e-4);
                }
            }
        }
    }
}

TEST_CASE("Green function is infinite at the origin when beta < 1 and d >= alpha") {
    const ModelParams p = params(1.0, 0.5);
    const double zero[1] = {0.0};
    CHECK(std::isinf(kernels::green_function(p, 1.0, zero, GreenMethod::subordination)));
    CHECK(std::isfinite(kernels::green_function(params(1.5, 0.5), 1.0, zero, GreenMethod::subordination)));
}

TEST_CASE("L2 norm scales like t^{-beta d / alpha}") {
    for (auto [alpha, beta] : {std::pair{1.5, 0.5}, std::pair{2.0, 0.9}}) {
        const ModelParams p = params(alpha, beta);
        const double cs = kernels::c_star(p);
        for (double t : {0.5, 1.0, 2.0}) {
            const double scaled = kernels::green_l2_norm(p, t) * std::pow(t, p.scaling());
            CHECK(std::fabs(scaled - cs) / cs <= 0.01);
        }
    }
}

TEST_CASE("Green table on the lattice") {
    const ModelParams p = params(2.0, 1.0);
    GridSpec g;
    g.half_width = 8.0;
    g.n = 256;  // resolves the heat kernel at t = dt under the default policy
    g.T = 1.0;
    g.nt = 32;
    const kernels::GreenTable table = kernels::build_green_table(p, g);
    CHECK(table.slices() == 33);

    const auto s0 = table.slice(0);
    CHECK(s0[0] * g.cell_volume() == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t i = 1; i < s0.size(); ++i) CHECK(s0[i] == 0.0);

    for (int k = 0; k <= g.nt; ++k) {
        const auto s = table.slice(k);
        double mass = 0.0;
        for (double v : s) mass += v * g.cell_volume();
        CHECK(std::fabs(mass - 1.0) <= 1e-12);
        CHECK(std::fabs(table.symbol(k)[0] - 1.0) <= 1e-12);
        for (int i = 1; i < g.n; ++i) CHECK(s[std::size_t(i)] == s[std::size_t(g.n - i)]);
    }

    // Slice at t = dt against the wrapped heat kernel.
    const double dt = g.dt();
    const auto s1 = table.slice(1);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double lag = (i < g.n / 2 ? i : i - g.n) * g.h();
        double wrapped = 0.0;
        for (int m = -20; m <= 20; ++m) wrapped += heat_kernel(1.0, 1, dt, lag + m * 2.0 * g.half_width);
        worst = std::max(worst, std::fabs(s1[std::size_t(i)] - wrapped));
    }
    CHECK(worst <= 1e-6);

    GridSpec other = g;
    other.nt = 16;
    CHECK_THROWS_AS(table.require_grid(other, "test"), BindingError);
}

TEST_CASE("truncation heuristics reject coarse grids") {
    GridSpec g;
    g.half_width = 2.0;
    g.n = 16;
    g.T = 1.0;
    g.nt = 32;
    CHECK_THROWS_AS(kernels::build_green_table(params(2.0, 0.5), g), ResolutionError);
    try {
        kernels::build_green_table(params(2.0, 1.0), g, {1.0, 1e-6});
        FAIL("expected ResolutionError");
    } catch (const ResolutionError& e) {
        CHECK(e.heuristic() == "tail_mass");
        CHECK(e.parameter() == "grid.half_width");
    }
}
