#include "doctest.h"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "fracspde/analysis.hpp"
#include "fracspde/errors.hpp"
#include "fracspde/kernels.hpp"

using namespace fracspde;
using kernels::ModelParams;

namespace {

ModelParams params(double alpha, double beta, int d = 1) {
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.d = d;
    return p;
}

// E_rho(z) for z >= 0 by its power series with lgamma terms.
double ml_positive(double rho, double z) {
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) {
        const double term = std::exp(k * std::log(std::max(z, 1e-300)) - std::lgamma(rho * k + 1.0));
        sum += (k == 0 ? 1.0 : term);
        if (k > 5 && term < 1e-17 * sum) break;
    }
    return sum;
}

solver::SolutionPath synthetic_path(const GridSpec& g, double level) {
    solver::SolutionPath p;
    p.grid = g;
    for (int k = 0; k <= g.nt; ++k) {
        std::vector<double> v(g.points());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = level * (1.0 + 0.1 * double(i)) * std::exp(0.5 * g.time(k));
        p.values.push_back(v);
    }
    return p;
}

}  // namespace

TEST_CASE("contraction constants") {
    const ModelParams p = params(2.0, 1.0);
    const double cs = 1.0 / std::sqrt(8.0 * M_PI);
    // Quoted form lip sqrt(C* K Gamma(1 - s) / gamma^{1 + s}) with s = 1/2.
    CHECK(analysis::contraction_constant(p, 1.0, 1.0, 1.0) == doctest::Approx(0.594603557).epsilon(1e-8));
    CHECK(analysis::contraction_constant(p, 2.0, 3.0, 4.0) ==
          doctest::Approx(3.0 * std::sqrt(cs * 2.0 * std::sqrt(M_PI) / std::pow(4.0, 1.5))).epsilon(1e-9));

    // Laplace form against a direct integral of C* tau^{-s} e^{-gamma tau}.
    boost::math::quadrature::exp_sinh<double> integrator;
    for (double gamma : {0.5, 3.0, 20.0}) {
        const double integral = integrator.integrate([&](double t) { return cs * std::exp(-gamma * t) / std::sqrt(t); });
        CHECK(analysis::laplace_contraction_constant(p, 1.5, 2.0, gamma) ==
              doctest::Approx(2.0 * std::sqrt(1.5 * integral)).epsilon(1e-8));
    }

    const double target = 0.25;
    const double gamma = analysis::choose_gamma(p, 1.0, 1.0, target);
    CHECK(analysis::contraction_constant(p, 1.0, 1.0, gamma) <= target);
    CHECK(analysis::contraction_constant(p, 1.0, 1.0, gamma * std::exp2(-1.0 / 8.0)) > target);
    const double j = 8.0 * std::log2(gamma);
    CHECK(j == doctest::Approx(std::round(j)).epsilon(1e-12));
    CHECK_THROWS_AS(analysis::choose_gamma(p, 1.0, 1.0, 1.5), DomainError);
    CHECK(analysis::contraction_constant_noncomp(2.0, 3.0, 12.0) == 0.5);
}

TEST_CASE("lattice contraction constant approaches the Laplace form under refinement") {
    // The atom deposit and unresolved early slices add O(h + dt / h) to the lattice sum.
    const ModelParams p = params(2.0, 1.0);
    const double gamma = 4.0, K = 1.0, lip = 1.0;
    const double continuum = analysis::laplace_contraction_constant(p, K, lip, gamma);
    double prev_gap = INFINITY;
    for (auto [n, nt] : {std::pair{64, 64}, std::pair{128, 256}, std::pair{256, 1024}}) {
        GridSpec g;
        g.half_width = 8.0;
        g.n = n;
        g.T = 4.0;
        g.nt = nt;
        const auto table = kernels::build_green_table(p, g, {1.0, 1.0});
        const double lattice = analysis::lattice_contraction_constant(table, K, lip, gamma);
        CHECK(lattice > continuum);
        const double gap = (lattice - continuum) / continuum;
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.15);
}

TEST_CASE("renewal equation: classical case") {
    const auto t = analysis::graded_time_grid(2.0, 1000, 1.0);
    const auto sol = analysis::renewal_solve(1.5, 0.8, 1.0, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double oracle = 1.5 * std::exp(0.8 * t[i]);
        CHECK(std::fabs(sol.f[i] - oracle) <= 1e-6 * oracle);
    }
    CHECK(sol.residual <= 1e-8);
    CHECK(sol.rate == doctest::Approx(0.8));
}

TEST_CASE("renewal equation: fractional cases against Mittag-Leffler") {
    for (double rho : {0.5, 0.75}) {
        const double c1 = 2.0, kp = 0.6;
        const auto t = analysis::graded_time_grid(2.0, 1000);
        const auto sol = analysis::renewal_solve(c1, kp, rho, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double oracle = c1 * ml_positive(rho, kp * std::tgamma(rho) * std::pow(t[i], rho));
            worst = std::max(worst, std::fabs(sol.f[i] - oracle) / oracle);
        }
        CHECK(worst <= 1e-4);
        CHECK(sol.residual <= 1e-8);
        CHECK(analysis::renewal_rate(kp, rho) == doctest::Approx(std::pow(kp * std::tgamma(rho), 1.0 / rho)));
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(sol.f[i] <= sol.envelope[i] * (1.0 + 1e-9));
    }
    CHECK_THROWS_AS(analysis::renewal_solve(1.0, 1.0, 1.5, analysis::graded_time_grid(1.0, 10)), DomainError);
    const std::vector<double> bad{0.0, 0.5, 0.4};
    CHECK_THROWS_AS(analysis::renewal_solve(1.0, 1.0, 0.5, bad), DomainError);
}

TEST_CASE("nonlinear blow-up time") {
    // h' = h^2, h(0) = 1 blows up at t = 1; estimates approach it monotonically.
    double prev_error = INFINITY;
    for (int n : {100, 400, 1000}) {
        const auto t = analysis::graded_time_grid(2.0, std::size_t(n), 1.0);
        const auto est = analysis::nonlinear_blowup(1.0, 1.0, 1.0, 0.0, t);
        REQUIRE(est.has_value());
        const double error = std::fabs(*est - 1.0);
        CHECK(error <= 0.02);
        CHECK(error < prev_error);
        prev_error = error;
    }
    const auto t = analysis::graded_time_grid(2.0, 200, 1.0);
    CHECK_FALSE(analysis::nonlinear_blowup(1.0, 0.0, 1.0, 0.0, t).has_value());
    CHECK(analysis::nonlinear_blowup(1.0, 1.0, 1.0, 0.5, t).has_value());
}

TEST_CASE("upsilon and its inverse") {
    CHECK(analysis::upsilon(2.0, 1.0, 1, 2.0) == doctest::Approx(0.25).epsilon(1e-9));
    for (double gamma : {0.1, 1.0, 7.0}) {
        CHECK(analysis::upsilon(2.0, 0.5, 1, gamma) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * 0.5 * gamma))).epsilon(1e-9));
    }
    CHECK(std::fabs(analysis::upsilon_inverse(2.0, 1.0, 1, 0.25) - 2.0) <= 1e-6);
    CHECK(analysis::upsilon_inverse(2.0, 1.0, 1, 1e9) == 0.0);
    for (int i = 0; i < 20; ++i) {
        const double alpha = 1.2 + 0.04 * i;
        const double lambda = std::pow(10.0, -1.0 + 0.15 * i);
        const double u = analysis::upsilon(alpha, 1.0, 1, lambda);
        CHECK(std::fabs(analysis::upsilon_inverse(alpha, 1.0, 1, u) - lambda) <= 1e-6 * std::max(1.0, lambda));
    }
    CHECK_THROWS_AS(analysis::upsilon(1.0, 1.0, 1, 1.0), DivergenceError);
    CHECK_THROWS_AS(analysis::upsilon(1.5, 1.0, 2, 1.0), DivergenceError);
}

TEST_CASE("envelope rates") {
    const ModelParams p = params(2.0, 1.0);
    const auto r = analysis::envelope_rates(p, 2.0, 1.0, 1.0, 1.0);
    const double cs = kernels::c_star(p);
    CHECK(r.rho == doctest::Approx(0.5));
    CHECK(r.upper == doctest::Approx(std::pow(2.0 * cs * std::sqrt(M_PI), 2.0)));
    CHECK(r.lower == doctest::Approx(std::pow(cs * std::sqrt(M_PI), 2.0)));
    const auto n = analysis::noncompensated_lower_rates(p, 3.0, 0.5);
    CHECK(n.without_cstar == 1.5);
    CHECK(n.with_cstar == doctest::Approx(1.5 * cs));
}

TEST_CASE("energy blow-up certificate") {
    const ModelParams p = params(2.0, 1.0);
    const auto rep = analysis::energy_blowup_certificate(p, 1.0, 1.0, 2.0, 1.0);
    CHECK(std::fabs(rep.A_at_theta0 - 1.0) <= 1e-8);
    CHECK(rep.C1 == doctest::Approx(std::sqrt(M_PI / (8.0 * M_PI))));
    CHECK(rep.exponent == doctest::Approx(2.0));
    CHECK(rep.printed_exponent == doctest::Approx(0.5));
    CHECK(rep.theta0 == doctest::Approx(rep.C1 * rep.C1));
    CHECK(rep.below.diverged);
    CHECK(rep.below.steps <= 200);
    CHECK(rep.below.A >= 1.0);
    CHECK(rep.above.converged);
    CHECK_FALSE(rep.above.diverged);
    CHECK(rep.above.A < 1.0);
    // Geometric-series limit eta^2 / (1 - A).
    CHECK(rep.above.final_value == doctest::Approx(1.0 / (1.0 - rep.above.A)).epsilon(1e-9));
    const auto doubled = analysis::energy_blowup_certificate(p, 1.0, 1.0, 2.0, 2.0);
    CHECK(doubled.theta0 > rep.theta0);
    CHECK_THROWS_AS(analysis::energy_blowup_certificate(p, 1.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_FALSE(rep.summary().empty());
}

TEST_CASE("moment estimator and growth-rate fit") {
    GridSpec g;
    g.n = 8;
    g.nt = 10;
    g.T = 2.0;
    const std::vector<solver::SolutionPath> paths{synthetic_path(g, 1.0), synthetic_path(g, 3.0)};
    const auto m2 = analysis::moment_estimator(paths, 2);
    const auto m1 = analysis::moment_estimator(paths, 1);
    for (int k = 0; k <= g.nt; ++k) {
        const double e = std::exp(g.time(k));
        CHECK(m2.sup_moment[std::size_t(k)] == doctest::Approx(5.0 * 1.7 * 1.7 * e));
        CHECK(m2.inf_moment[std::size_t(k)] == doctest::Approx(5.0 * e));
        CHECK(m1.sup_moment[std::size_t(k)] == doctest::Approx(2.0 * 1.7 * std::sqrt(e)));
    }
    const auto fit = analysis::growth_rate_fit(m2, 1.0, 2.0);
    CHECK(fit.rate == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.points == 6);

    auto exploded = synthetic_path(g, 2.0);
    exploded.exploded = true;
    const std::vector<solver::SolutionPath> mixed{paths[0], exploded};
    const auto m = analysis::moment_estimator(mixed, 2);
    CHECK(m.exploded == 1);
    CHECK(m.replicas == 1);
}

TEST_CASE("ensembles do not depend on the worker count") {
    const ModelParams p = params(2.0, 0.9);
    GridSpec g;
    g.half_width = 8.0;
    g.n = 32;
    g.T = 1.0;
    g.nt = 8;
    const auto table = kernels::build_green_table(p, g, {1.0, 1.0});
    const std::vector<double> u0(g.points(), 1.0);
    const auto mu = noise::LevyMeasureSpec::point(1, {1.0, 0.0}, 2.0);
    auto run = [&] {
        return analysis::simulate_ensemble(table, u0, noise::SigmaSpec::linear(1.0), mu,
                                           solver::NoiseKind::compensated, 200, 5);
    };
    ::setenv("FRACSPDE_THREADS", "1", 1);
    const auto a = run();
    ::setenv("FRACSPDE_THREADS", "4", 1);
    const auto b = run();
    ::unsetenv("FRACSPDE_THREADS");
    CHECK(a.second.sup_moment == b.second.sup_moment);
    CHECK(a.mean == b.mean);
    CHECK(a.mean_std_error == b.mean_std_error);
}

TEST_CASE("Picard differences in mean square shrink geometrically") {
    const ModelParams p = params(2.0, 1.0);
    GridSpec g;
    g.half_width = 8.0;
    g.n = 32;
    g.T = 1.0;
    g.nt = 16;
    const auto table = kernels::build_green_table(p, g, {1.0, 1.0});
    const std::vector<double> u0(g.points(), 1.0);
    const auto mu = noise::LevyMeasureSpec::point(1, {1.0, 0.0}, 1.0);
    const double gamma = 32.0;
    const auto diag = analysis::picard_expectation_diagnostics(table, u0, noise::SigmaSpec::linear(1.0), mu, gamma,
                                                               5, 400, 3);
    REQUIRE(diag.ratios.size() == 4);
    const double bound = analysis::lattice_contraction_constant(table, 1.0, 1.0, gamma);
    for (double r : diag.ratios) CHECK(r <= bound + 0.1);
}
