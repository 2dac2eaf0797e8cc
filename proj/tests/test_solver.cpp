#include "doctest.h"

#include <cmath>
#include <vector>

#include "fracspde/analysis.hpp"
#include "fracspde/errors.hpp"
#include "fracspde/kernels.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/solver.hpp"

using namespace fracspde;
using noise::LevyMeasureSpec;
using noise::SigmaSpec;
using solver::NoiseKind;

namespace {

struct Setup {
    kernels::ModelParams params;
    GridSpec grid;
    kernels::GreenTable table;
    std::vector<double> u0;
};

Setup make_setup(double alpha = 2.0, double beta = 1.0, int n = 32, int nt = 16) {
    kernels::ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    GridSpec g;
    g.half_width = 8.0;
    g.n = n;
    g.T = 1.0;
    g.nt = nt;
    std::vector<double> u0(g.points());
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = 1.0 + 0.5 * std::sin(M_PI * g.point(i)[0] / 8.0);
    return {p, g, kernels::build_green_table(p, g, {1.0, 1.0}), u0};
}

}  // namespace

TEST_CASE("deterministic part") {
    const Setup s = make_setup(1.5, 0.7);
    CHECK(solver::deterministic_part(s.u0, s.table, 0) == s.u0);
    const std::vector<double> ones(s.grid.points(), 2.5);
    for (int k = 0; k <= s.grid.nt; ++k) {
        for (double v : solver::deterministic_part(ones, s.table, k)) CHECK(std::fabs(v - 2.5) <= 1e-12);
    }
    // A sine mode is an eigenfunction: P_t sin = E_beta(-nu |xi|^alpha t^beta) sin.
    const double xi = M_PI / 8.0;
    const auto pk = solver::deterministic_part(s.u0, s.table, s.grid.nt);
    const double factor = specfun::mittag_leffler(specfun::FracOrder(0.7), -std::pow(xi, 1.5));
    for (std::size_t i = 0; i < pk.size(); ++i) {
        const double oracle = 1.0 + 0.5 * factor * std::sin(xi * s.grid.point(i)[0]);
        CHECK(std::fabs(pk[i] - oracle) <= 1e-12);
    }
    CHECK_THROWS_AS(solver::deterministic_part(s.u0, s.table, s.grid.nt + 1), DomainError);
    CHECK_THROWS_AS(solver::deterministic_part(std::vector<double>(3), s.table, 1), BindingError);
}

TEST_CASE("sigma = 0 reduces to the deterministic part exactly") {
    const Setup s = make_setup();
    const auto mu = LevyMeasureSpec::point(1, {1.0, 0.0}, 2.0);
    const auto path = solver::simulate_path(s.table, s.u0, SigmaSpec::zero(), mu, NoiseKind::compensated, 5);
    for (int k = 0; k <= s.grid.nt; ++k) {
        CHECK(path.values[std::size_t(k)] == solver::deterministic_part(s.u0, s.table, k));
    }
}

TEST_CASE("weighted norm") {
    const Setup s = make_setup();
    solver::SolutionPath path;
    path.grid = s.grid;
    path.values.assign(std::size_t(s.grid.nt + 1), std::vector<double>(s.grid.points(), 3.0));
    CHECK(solver::weighted_norm(path, 2.0, 2) == 3.0);
    CHECK(solver::weighted_norm(path, 2.0, 1) == 3.0);
    const auto real = solver::simulate_path(s.table, s.u0, SigmaSpec::linear(1.0),
                                            LevyMeasureSpec::point(1, {1.0, 0.0}), NoiseKind::compensated, 3);
    double prev = INFINITY;
    for (double gamma : {0.0, 0.5, 1.0, 4.0}) {
        const double w = solver::weighted_norm(real, gamma, 2);
        CHECK(w <= prev);
        prev = w;
    }
    CHECK_THROWS_AS(solver::weighted_norm(path, -1.0, 2), DomainError);
    CHECK_THROWS_AS(solver::weighted_norm(path, 1.0, 3), DomainError);
}

TEST_CASE("lattice march against the pointwise atom-by-atom sum") {
    const Setup s = make_setup(1.6, 0.8, 32, 12);
    for (NoiseKind kind : {NoiseKind::compensated, NoiseKind::noncompensated}) {
        for (const auto& mu :
             {LevyMeasureSpec::point(1, {0.8, 0.0}, 3.0), LevyMeasureSpec::exponential(1, 2.0, 1.0, 0.1, 4.0)}) {
            const SigmaSpec sigma = SigmaSpec::linear(0.7);
            const auto noise = noise::sample_noise(s.grid, mu, 21, 2);
            const auto path = solver::simulate_path(s.table, s.u0, sigma, mu, kind, noise);
            // Independent march: u(t_k, x_i) = P u0 + pointwise sum over atoms and compensator.
            std::vector<std::vector<double>> history{s.u0};
            double worst = 0.0;
            for (int k = 1; k <= s.grid.nt; ++k) {
                std::vector<double> u = solver::deterministic_part(s.u0, s.table, k);
                for (std::size_t i = 0; i < u.size(); ++i) {
                    u[i] += noise::stochastic_convolution(s.table, noise, history, sigma, mu,
                                                          kind == NoiseKind::compensated, k, i);
                    worst = std::max(worst, std::fabs(u[i] - path.values[std::size_t(k)][i]));
                }
                history.push_back(u);
            }
            CHECK(worst <= 1e-12);
        }
    }
}

TEST_CASE("simulation is deterministic in the seed") {
    const Setup s = make_setup();
    const auto mu = LevyMeasureSpec::exponential(1, 1.0, 1.0, 0.1, 4.0);
    const auto a = solver::simulate_path(s.table, s.u0, SigmaSpec::bounded(1.0), mu, NoiseKind::compensated, 8, 1);
    const auto b = solver::simulate_path(s.table, s.u0, SigmaSpec::bounded(1.0), mu, NoiseKind::compensated, 8, 1);
    const auto c = solver::simulate_path(s.table, s.u0, SigmaSpec::bounded(1.0), mu, NoiseKind::compensated, 9, 1);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}

TEST_CASE("Picard iteration reaches the marched path") {
    const Setup s = make_setup();
    const auto mu = LevyMeasureSpec::point(1, {1.0, 0.0}, 1.0);
    const SigmaSpec sigma = SigmaSpec::linear(1.0);
    const auto noise = noise::sample_noise(s.grid, mu, 4);
    const double gamma = analysis::choose_gamma(s.params, 1.0, 1.0, 0.25);
    const double tol = 1e-10;
    const auto res = solver::picard_solve(s.table, s.u0, sigma, mu, noise, gamma, 100, tol);
    CHECK(res.diagnostics.converged);
    CHECK(res.diagnostics.residual <= 2.0 * tol);
    CHECK(res.diagnostics.ratios.size() + 1 == res.diagnostics.differences.size());
    // The scheme is explicit in time, so iterate n is exact up to step n - 1.
    CHECK(res.diagnostics.iterations <= s.grid.nt + 2);
    const auto marched = solver::simulate_path(s.table, s.u0, sigma, mu, NoiseKind::compensated, noise);
    double worst = 0.0;
    for (int k = 0; k <= s.grid.nt; ++k) {
        for (std::size_t i = 0; i < s.grid.points(); ++i) {
            worst = std::max(worst, std::fabs(marched.values[std::size_t(k)][i] - res.path.values[std::size_t(k)][i]));
        }
    }
    CHECK(worst <= 1e-9);

    const auto its = solver::picard_iterates(s.table, s.u0, sigma, mu, noise, 3);
    CHECK(its.size() == 4);
    CHECK(its[0][5] == solver::deterministic_part(s.u0, s.table, 5));

    try {
        solver::picard_solve(s.table, s.u0, sigma, mu, noise, gamma, 2, 1e-30);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.ratios().size() == 1);
    }
    CHECK_THROWS_AS(solver::picard_solve(s.table, s.u0, sigma, mu, noise, 0.0, 10, tol), DomainError);
}

TEST_CASE("existence conditions and the explosion guard") {
    const Setup s = make_setup();
    const auto mu = LevyMeasureSpec::point(1, {3.0, 0.0}, 4.0);
    const SigmaSpec power = SigmaSpec::power(1.0, 2.0);
    CHECK_THROWS_AS(solver::simulate_path(s.table, s.u0, power, mu, NoiseKind::noncompensated, 1), ConditionViolation);
    solver::SimulationOptions opt;
    opt.override_conditions = true;
    opt.explosion_guard = 1e6;
    bool exploded = false;
    for (std::uint64_t seed = 1; seed <= 5 && !exploded; ++seed) {
        const auto path = solver::simulate_path(s.table, s.u0, power, mu, NoiseKind::noncompensated, seed, 0, opt);
        if (!path.exploded) continue;
        exploded = true;
        CHECK(path.explosion_step >= 1);
        CHECK(path.explosion_time == doctest::Approx(s.grid.time(path.explosion_step)));
        for (int k = path.explosion_step + 1; k <= s.grid.nt; ++k) CHECK(std::isnan(path.values[std::size_t(k)][0]));
        CHECK(std::isfinite(solver::weighted_norm(path, 0.0, 1)));
    }
    CHECK(exploded);

    GridSpec other = s.grid;
    other.nt = 8;
    CHECK_THROWS_AS(solver::simulate_path(s.table, s.u0, SigmaSpec::linear(1.0), mu, NoiseKind::compensated,
                                          noise::sample_noise(other, mu, 1)),
                    BindingError);
}

TEST_CASE("compensated martingale property for linear and bounded sigma") {
    const Setup s = make_setup(2.0, 0.9, 32, 16);
    const auto mu = LevyMeasureSpec::exponential(1, 1.0, 1.0, 0.1, 4.0);
    for (const SigmaSpec& sigma : {SigmaSpec::linear(1.0), SigmaSpec::bounded(1.0)}) {
        const auto ens = analysis::simulate_ensemble(s.table, s.u0, sigma, mu, NoiseKind::compensated, 3000, 17);
        int cells = 0, outside = 0;
        double worst = 0.0;
        for (int k = 1; k <= s.grid.nt; ++k) {
            const auto det = solver::deterministic_part(s.u0, s.table, k);
            for (std::size_t i = 0; i < det.size(); ++i) {
                const double z = std::fabs(ens.mean[std::size_t(k)][i] - det[i]) / ens.mean_std_error[std::size_t(k)][i];
                ++cells;
                outside += z > 3.0;
                worst = std::max(worst, z);
            }
        }
        // 3 SE per cell; a few percent of cells may exceed it among hundreds of correlated cells.
        CHECK(double(outside) <= 0.02 * cells);
        CHECK(worst <= 5.0);
    }
}
