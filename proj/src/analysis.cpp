#include "fracspde/analysis.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "fracspde/errors.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/quadrature.hpp"

namespace fracspde::analysis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBlowupLevel = 1e12;

double subcritical_scaling(const kernels::ModelParams& params, const char* what) {
    params.validate();
    const double s = params.scaling();
    if (!(s < 1.0)) throw DomainError(std::string(what) + ": requires beta d / alpha < 1");
    return s;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

/// Weights of f(a) and f(b) in int_a^b (t - s)^{rho - 1} f(s) ds for f linear on [a, b], b <= t.
std::pair<double, double> product_weights(double t, double a, double b, double rho) {
    const double A = t - a;
    const double B = t - b;
    const double width = b - a;
    auto diff = [&](double q) {
        // A^q - B^q without cancellation for nearby A, B
        if (B <= 0.0) return std::pow(A, q);
        return std::pow(B, q) * std::expm1(q * std::log1p(width / B));
    };
    const double I0 = diff(rho) / rho;
    const double I1 = diff(rho + 1.0) / (rho + 1.0);
    return {(I1 - B * I0) / width, (A * I0 - I1) / width};
}

void require_time_grid(std::span<const double> t) {
    if (t.size() < 2) throw DomainError("t_grid needs at least two points");
    if (t[0] != 0.0) throw DomainError("t_grid must start at 0");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1]) || !std::isfinite(t[i])) throw DomainError("t_grid must be strictly increasing");
    }
}

/// Per-cell shifted sums; the shift makes identical samples average exactly.
struct Accumulator {
    std::vector<double> shift;
    std::vector<double> s1;
    std::vector<double> s2;
    std::size_t count = 0;

    explicit Accumulator(std::vector<double> base)
        : shift(std::move(base)), s1(shift.size(), 0.0), s2(shift.size(), 0.0) {}

    template <class Get>
    void add(Get&& value) {
        for (std::size_t c = 0; c < shift.size(); ++c) {
            const double x = value(c) - shift[c];
            s1[c] += x;
            s2[c] += x * x;
        }
        ++count;
    }
    void merge(const Accumulator& o) {
        for (std::size_t c = 0; c < shift.size(); ++c) {
            s1[c] += o.s1[c];
            s2[c] += o.s2[c];
        }
        count += o.count;
    }
    double mean(std::size_t c) const { return count ? shift[c] + s1[c] / double(count) : kNaN; }
    double std_error(std::size_t c) const {
        if (count < 2) return count ? 0.0 : kNaN;
        const double n = double(count);
        const double var = std::max(0.0, (s2[c] - s1[c] * s1[c] / n) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

double moment_power(double u, int p) { return p == 1 ? std::fabs(u) : u * u; }

MomentSeries series_from(const Accumulator& acc, const GridSpec& grid, int p, std::size_t exploded) {
    MomentSeries out;
    out.p = p;
    out.replicas = acc.count;
    out.exploded = exploded;
    const std::size_t np = grid.points();
    for (int k = 0; k <= grid.nt; ++k) {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        double se = kNaN;
        for (std::size_t i = 0; i < np; ++i) {
            const std::size_t c = std::size_t(k) * np + i;
            const double m = std::max(0.0, acc.mean(c));
            if (m > hi) {
                hi = m;
                se = acc.std_error(c);
            }
            lo = std::min(lo, m);
        }
        if (acc.count == 0) hi = lo = kNaN;
        out.times.push_back(grid.time(k));
        out.sup_moment.push_back(hi);
        out.inf_moment.push_back(lo);
        out.std_error.push_back(se);
    }
    return out;
}

double upsilon_radial(double alpha, double nu, int d, double gamma) {
    // (2 pi)^{-d} |S^{d-1}| int_0^inf r^{d-1} / (gamma + 2 nu r^alpha) dr, with r = r0 x
    const double r0 = std::pow(gamma / (2.0 * nu), 1.0 / alpha);
    const double surface = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
    const quad::Tolerance tol{1e-12, 0.0};
    auto head = [&](double x) { return std::pow(x, d - 1) / (1.0 + std::pow(x, alpha)); };
    // x = 1/y on the tail
    auto tail = [&](double y) { return std::pow(y, alpha - d - 1.0) / (std::pow(y, alpha) + 1.0); };
    const double integral = quad::gauss_kronrod(head, 0.0, 1.0, tol, "upsilon") +
                            quad::finite_singular(tail, 0.0, 1.0, tol, "upsilon");
    return std::pow(2.0 * std::numbers::pi, -d) * surface * std::pow(r0, d) / gamma * integral;
}

CertificateIteration iterate_certificate(double theta, double K0, double s, double eta) {
    CertificateIteration it;
    it.theta = theta;
    it.A = K0 * std::pow(theta, -(1.0 - s));
    const double e2 = eta * eta;
    const double limit = it.A < 1.0 ? e2 / (1.0 - it.A) : kNaN;
    double x = e2;
    for (int n = 1; n <= 200; ++n) {
        x = e2 + it.A * x;
        it.steps = n;
        if (x > kBlowupLevel) {
            it.diverged = true;
            break;
        }
        if (it.A < 1.0 && std::fabs(x - limit) <= 1e-12 * limit) {
            it.converged = true;
            break;
        }
    }
    it.final_value = x;
    return it;
}

}  // namespace

double contraction_constant(const kernels::ModelParams& params, double K, double lip, double gamma) {
    const double s = subcritical_scaling(params, "contraction_constant");
    require_positive(K, "K");
    require_positive(lip, "lip");
    require_positive(gamma, "gamma");
    return lip * std::sqrt(kernels::c_star(params) * K * std::tgamma(1.0 - s) / std::pow(gamma, 1.0 + s));
}

double laplace_contraction_constant(const kernels::ModelParams& params, double K, double lip, double gamma) {
    const double s = subcritical_scaling(params, "laplace_contraction_constant");
    require_positive(K, "K");
    require_positive(lip, "lip");
    require_positive(gamma, "gamma");
    return lip * std::sqrt(kernels::c_star(params) * K * std::tgamma(1.0 - s) / std::pow(gamma, 1.0 - s));
}

double lattice_contraction_constant(const kernels::GreenTable& table, double K, double lip, double gamma) {
    require_positive(K, "K");
    require_positive(lip, "lip");
    require_positive(gamma, "gamma");
    const GridSpec& g = table.grid();
    double sum = 0.0;
    for (int j = 0; j < g.nt; ++j) {
        double sq = 0.0;
        for (double v : table.slice(j)) sq += v * v;
        sum += g.dt() * g.cell_volume() * sq * std::exp(-gamma * (j + 1) * g.dt());
    }
    return lip * std::sqrt(K * sum);
}

double choose_gamma(const kernels::ModelParams& params, double K, double lip, double target) {
    if (!(target > 0.0 && target < 1.0)) throw DomainError("choose_gamma: target must lie in (0, 1)");
    const double s = subcritical_scaling(params, "choose_gamma");
    require_positive(K, "K");
    require_positive(lip, "lip");
    const double exact =
        std::pow(lip * lip * kernels::c_star(params) * K * std::tgamma(1.0 - s) / (target * target), 1.0 / (1.0 + s));
    auto gamma_at = [](int j) { return std::exp2(j / 8.0); };
    int j = int(std::ceil(8.0 * std::log2(exact)));
    while (contraction_constant(params, K, lip, gamma_at(j)) > target) ++j;
    while (contraction_constant(params, K, lip, gamma_at(j - 1)) <= target) --j;
    return gamma_at(j);
}

double contraction_constant_noncomp(double K, double lip, double gamma) {
    require_positive(K, "K");
    require_positive(lip, "lip");
    require_positive(gamma, "gamma");
    return K * lip / gamma;
}

std::vector<double> graded_time_grid(double T, std::size_t n, double grade) {
    require_positive(T, "T");
    if (n < 1) throw DomainError("graded_time_grid: n must be positive");
    if (!(grade >= 1.0)) throw DomainError("graded_time_grid: grade must be at least 1");
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = T * std::pow(double(i) / double(n), grade);
    t[n] = T;
    return t;
}

double renewal_rate(double kappa_prime, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
    return std::pow(kappa_prime * std::tgamma(rho), 1.0 / rho);
}

RenewalSolution renewal_solve(double c1, double kappa_prime, double rho, std::span<const double> t_grid) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("renewal_solve: rho must lie in (0, 1]");
    if (!(kappa_prime >= 0.0) || !std::isfinite(kappa_prime)) throw DomainError("renewal_solve: kappa' must be nonnegative");
    if (!std::isfinite(c1)) throw DomainError("renewal_solve: c1 must be finite");
    require_time_grid(t_grid);

    const std::size_t N = t_grid.size();
    RenewalSolution out;
    out.t.assign(t_grid.begin(), t_grid.end());
    out.f.assign(N, 0.0);
    out.f[0] = c1;
    // history[n] = sum over intervals of the weights times known values, excluding f_n
    auto history = [&](std::size_t n, double& last_weight) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto [wa, wb] = product_weights(t_grid[n], t_grid[j], t_grid[j + 1], rho);
            acc += wa * out.f[j];
            if (j + 1 < n) acc += wb * out.f[j + 1];
            else last_weight = wb;
        }
        return acc;
    };
    for (std::size_t n = 1; n < N; ++n) {
        double w = 0.0;
        const double known = history(n, w);
        out.f[n] = (c1 + kappa_prime * known) / (1.0 - kappa_prime * w);
    }
    for (std::size_t n = 1; n < N; ++n) {
        double w = 0.0;
        const double rhs = c1 + kappa_prime * (history(n, w) + w * out.f[n]);
        out.residual = std::max(out.residual, std::fabs(out.f[n] - rhs) / std::max(1.0, std::fabs(out.f[n])));
    }

    out.rate = renewal_rate(kappa_prime, rho);
    out.c3 = 1.0;
    for (std::size_t n = 0; n < N; ++n) out.c2 = std::max(out.c2, out.f[n] * std::exp(-out.rate * t_grid[n]));
    out.envelope.resize(N);
    for (std::size_t n = 0; n < N; ++n) out.envelope[n] = out.c2 * std::exp(out.c3 * out.rate * t_grid[n]);
    return out;
}

std::optional<double> blowup_time_on_grid(double C, double D, double gamma_exp, double theta,
                                          std::span<const double> t_grid) {
    if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("nonlinear_blowup: theta must lie in [0, 1)");
    require_positive(C, "C");
    if (!(D >= 0.0) || !std::isfinite(D)) throw DomainError("D must be nonnegative");
    require_positive(gamma_exp, "gamma_exp");
    require_time_grid(t_grid);

    const double rho = 1.0 - theta;
    const double power = 1.0 + gamma_exp;
    const std::size_t N = t_grid.size();
    std::vector<double> g(N, 0.0);  // h^{1 + gamma}
    g[0] = std::pow(C, power);
    for (std::size_t n = 1; n < N; ++n) {
        double known = 0.0;
        double w = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto [wa, wb] = product_weights(t_grid[n], t_grid[j], t_grid[j + 1], rho);
            known += wa * g[j];
            if (j + 1 < n) known += wb * g[j + 1];
            else w = wb;
        }
        const double A = C + D * known;
        const double B = D * w;
        double h = A;
        if (B > 0.0) {
            // smallest root of h = A + B h^power; none past the fold at x_star
            const double x_star = std::pow(1.0 / (B * power), 1.0 / gamma_exp);
            if (!(A < x_star * gamma_exp / power)) return t_grid[n];
            auto F = [&](double x) { return x - A - B * std::pow(x, power); };
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t iters = 200;
            const auto bracket = boost::math::tools::toms748_solve(F, A, x_star, F(A), F(x_star), tol, iters);
            h = 0.5 * (bracket.first + bracket.second);
        }
        if (!std::isfinite(h) || h > kBlowupLevel) return t_grid[n];
        g[n] = std::pow(h, power);
    }
    return std::nullopt;
}

std::optional<double> nonlinear_blowup(double C, double D, double gamma_exp, double theta,
                                       std::span<const double> t_grid) {
    require_time_grid(t_grid);
    std::vector<double> fine;
    fine.reserve(2 * t_grid.size());
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
        fine.push_back(t_grid[i]);
        fine.push_back(0.5 * (t_grid[i] + t_grid[i + 1]));
    }
    fine.push_back(t_grid.back());
    return blowup_time_on_grid(C, D, gamma_exp, theta, fine);
}

MomentSeries moment_estimator(std::span<const solver::SolutionPath> paths, int p) {
    if (p != 1 && p != 2) throw DomainError("moment_estimator: p must be 1 or 2");
    if (paths.empty()) throw DomainError("moment_estimator: empty ensemble");
    const GridSpec& grid = paths.front().grid;
    const std::size_t cells = std::size_t(grid.nt + 1) * grid.points();
    for (const auto& path : paths) {
        if (!(path.grid == grid) || !(path.params == paths.front().params)) {
            throw BindingError("moment_estimator: paths do not share grid and params");
        }
    }
    const solver::SolutionPath* base = nullptr;
    for (const auto& path : paths) {
        if (!path.exploded) {
            base = &path;
            break;
        }
    }
    std::vector<double> shift(cells, 0.0);
    auto cell = [&](const solver::SolutionPath& path, std::size_t c) {
        return moment_power(path.values[c / grid.points()][c % grid.points()], p);
    };
    if (base) {
        for (std::size_t c = 0; c < cells; ++c) shift[c] = cell(*base, c);
    }
    Accumulator acc(std::move(shift));
    std::size_t exploded = 0;
    for (const auto& path : paths) {
        if (path.exploded) {
            ++exploded;
            continue;
        }
        acc.add([&](std::size_t c) { return cell(path, c); });
    }
    return series_from(acc, grid, p, exploded);
}

EnsembleResult simulate_ensemble(const kernels::GreenTable& table, std::span<const double> u0,
                                 const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                                 solver::NoiseKind kind, std::size_t replicas, std::uint64_t seed,
                                 const solver::SimulationOptions& options) {
    if (replicas == 0) throw DomainError("simulate_ensemble: replicas must be positive");
    if (!options.override_conditions) solver::require_existence(sigma, mu, kind);
    solver::SimulationOptions per_path = options;
    per_path.override_conditions = true;

    const GridSpec& grid = table.grid();
    const std::size_t np = grid.points();
    const std::size_t cells = std::size_t(grid.nt + 1) * np;

    // Shifts from the deterministic part: exact means when all paths coincide with it.
    std::vector<double> det(cells);
    for (int k = 0; k <= grid.nt; ++k) {
        const solver::Field Pk = solver::deterministic_part(u0, table, k);
        std::copy(Pk.begin(), Pk.end(), det.begin() + std::ptrdiff_t(std::size_t(k) * np));
    }
    auto powered = [&](int p) {
        std::vector<double> v(det);
        for (double& x : v) x = moment_power(x, p);
        return v;
    };
    struct Partial {
        Accumulator first, second, mean;
        std::size_t exploded = 0;
    };
    auto fresh = [&] { return Partial{Accumulator(powered(1)), Accumulator(powered(2)), Accumulator(det), 0}; };

    // A fixed chunking of the replicas, merged in chunk order, makes the
    // result independent of the number of threads.
    const std::size_t chunks = std::min<std::size_t>(replicas, 64);
    const std::size_t wave = std::max<std::size_t>(1, std::min<std::size_t>(worker_count(), chunks));
    Partial total = fresh();
    for (std::size_t first_chunk = 0; first_chunk < chunks; first_chunk += wave) {
        const std::size_t in_wave = std::min(wave, chunks - first_chunk);
        std::vector<Partial> parts;
        parts.reserve(in_wave);
        for (std::size_t w = 0; w < in_wave; ++w) parts.push_back(fresh());
        parallel_for(in_wave, [&](std::size_t w) {
            const std::size_t c = first_chunk + w;
            const std::size_t begin = c * replicas / chunks;
            const std::size_t end = (c + 1) * replicas / chunks;
            Partial& part = parts[w];
            for (std::size_t r = begin; r < end; ++r) {
                const solver::SolutionPath path =
                    solver::simulate_path(table, u0, sigma, mu, kind, seed, std::uint64_t(r), per_path);
                if (path.exploded) {
                    ++part.exploded;
                    continue;
                }
                auto value = [&](std::size_t cell) { return path.values[cell / np][cell % np]; };
                part.first.add([&](std::size_t cell) { return moment_power(value(cell), 1); });
                part.second.add([&](std::size_t cell) { return moment_power(value(cell), 2); });
                part.mean.add(value);
            }
        });
        for (const Partial& part : parts) {
            total.first.merge(part.first);
            total.second.merge(part.second);
            total.mean.merge(part.mean);
            total.exploded += part.exploded;
        }
    }

    EnsembleResult out;
    out.first = series_from(total.first, grid, 1, total.exploded);
    out.second = series_from(total.second, grid, 2, total.exploded);
    out.mean.assign(std::size_t(grid.nt + 1), std::vector<double>(np));
    out.mean_std_error.assign(std::size_t(grid.nt + 1), std::vector<double>(np));
    for (std::size_t c = 0; c < cells; ++c) {
        out.mean[c / np][c % np] = total.mean.mean(c);
        out.mean_std_error[c / np][c % np] = total.mean.std_error(c);
    }
    return out;
}

PicardExpectation picard_expectation_diagnostics(const kernels::GreenTable& table, std::span<const double> u0,
                                                 const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                                                 double gamma, int iterations, std::size_t replicas,
                                                 std::uint64_t seed) {
    require_positive(gamma, "gamma");
    if (iterations < 2) throw DomainError("picard_expectation_diagnostics: need at least 2 iterations");
    if (replicas == 0) throw DomainError("picard_expectation_diagnostics: replicas must be positive");
    const GridSpec& g = table.grid();
    const std::size_t np = g.points();
    const std::size_t cells = std::size_t(g.nt + 1) * np;
    const std::size_t slots = std::size_t(iterations) * cells;

    // sums of |u^{(n+1)} - u^{(n)}|^2 per (n, k, node), chunked for a fixed reduction order
    const std::size_t chunks = std::min<std::size_t>(replicas, 64);
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(slots, 0.0));
    parallel_for(chunks, [&](std::size_t c) {
        std::vector<double>& acc = partial[c];
        for (std::size_t r = c * replicas / chunks; r < (c + 1) * replicas / chunks; ++r) {
            const noise::NoiseRealization nz = noise::sample_noise(g, mu, seed, std::uint64_t(r));
            const auto it = solver::picard_iterates(table, u0, sigma, mu, nz, iterations);
            for (int n = 0; n < iterations; ++n) {
                for (std::size_t cell = 0; cell < cells; ++cell) {
                    const double d = it[std::size_t(n) + 1][cell / np][cell % np] - it[std::size_t(n)][cell / np][cell % np];
                    acc[std::size_t(n) * cells + cell] += d * d;
                }
            }
        }
    });
    std::vector<double> total(slots, 0.0);
    for (const auto& acc : partial) {
        for (std::size_t q = 0; q < slots; ++q) total[q] += acc[q];
    }

    PicardExpectation out;
    out.replicas = replicas;
    for (int n = 0; n < iterations; ++n) {
        double best = 0.0;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            const double w = std::exp(-gamma * g.time(int(cell / np)));
            best = std::max(best, w * total[std::size_t(n) * cells + cell] / double(replicas));
        }
        const double norm = std::sqrt(best);
        if (!out.differences.empty()) {
            const double prev = out.differences.back();
            out.ratios.push_back(prev > 0.0 ? norm / prev : 0.0);
        }
        out.differences.push_back(norm);
    }
    return out;
}

GrowthFit growth_rate_fit(const MomentSeries& series, double t_begin, double t_end) {
    if (!(t_end > t_begin)) throw DomainError("growth_rate_fit: empty window");
    std::vector<double> x, y, sy;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double t = series.times[k];
        if (t < t_begin || t > t_end) continue;
        const double m = series.sup_moment[k];
        if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("growth_rate_fit: nonpositive moment in the window");
        x.push_back(t);
        y.push_back(std::log(m));
        const double se = k < series.std_error.size() ? series.std_error[k] : 0.0;
        sy.push_back(std::isfinite(se) ? se / m : 0.0);
    }
    const std::size_t n = x.size();
    if (n < 3) throw DomainError("growth_rate_fit: the window holds fewer than 3 points");
    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= double(n);
    ym /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
    }
    GrowthFit fit;
    fit.points = n;
    fit.rate = sxy / sxx;
    fit.intercept = ym - fit.rate * xm;
    double rss = 0.0, propagated = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.rate * x[i];
        rss += r * r;
        const double lever = (x[i] - xm) / sxx;
        propagated += lever * lever * sy[i] * sy[i];
    }
    const double var = std::max(rss / double(n - 2) / sxx, propagated);
    const boost::math::students_t dist(double(n - 2));
    fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(var);
    return fit;
}

double upsilon(double alpha, double nu, int d, double gamma) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("upsilon: alpha must lie in (0, 2]");
    require_positive(nu, "nu");
    if (d != 1 && d != 2) throw DomainError("upsilon: d must be 1 or 2");
    require_positive(gamma, "gamma");
    if (!(d < alpha)) throw DivergenceError("upsilon: the integral diverges unless d < alpha");
    return upsilon_radial(alpha, nu, d, gamma);
}

double upsilon_inverse(double alpha, double nu, int d, double t) {
    require_positive(t, "t");
    constexpr double lo = 1e-12;
    constexpr double hi = 1e12;
    if (upsilon(alpha, nu, d, lo) <= t) return 0.0;
    if (upsilon(alpha, nu, d, hi) > t) return hi;
    auto F = [&](double log_lambda) { return std::log(upsilon(alpha, nu, d, std::exp(log_lambda)) / t); };
    boost::math::tools::eps_tolerance<double> tol(48);
    std::uintmax_t iters = 200;
    const double a = std::log(lo);
    const double b = std::log(hi);
    const auto bracket = boost::math::tools::toms748_solve(F, a, b, F(a), F(b), tol, iters);
    return std::exp(0.5 * (bracket.first + bracket.second));
}

EnvelopeRates envelope_rates(const kernels::ModelParams& params, double K, double lip, double kappa, double L) {
    const double s = subcritical_scaling(params, "envelope_rates");
    const double cs = kernels::c_star(params);
    EnvelopeRates r;
    r.rho = 1.0 - s;
    r.upper = renewal_rate(K * lip * lip * cs, r.rho);
    r.lower = renewal_rate(kappa * L * L * cs, r.rho);
    return r;
}

NoncompensatedRates noncompensated_lower_rates(const kernels::ModelParams& params, double kappa, double L) {
    subcritical_scaling(params, "noncompensated_lower_rates");
    return {kappa * L, kappa * L * kernels::c_star(params)};
}

std::string CertificateReport::summary() const {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "C1 = %.10g\n"
                  "theta0 = %.10g (exponent %.6g, solves A = 1)\n"
                  "theta0 with exponent %.6g = %.10g\n"
                  "A(theta0) = %.12g\n"
                  "theta0/2: A = %.10g, %s after %d steps (x = %.6g)\n"
                  "2 theta0: A = %.10g, %s after %d steps (x = %.6g)\n",
                  C1, theta0, exponent, printed_exponent, theta0_printed, A_at_theta0, below.A,
                  below.diverged ? "diverged" : (below.converged ? "converged" : "undecided"), below.steps,
                  below.final_value, above.A, above.diverged ? "diverged" : (above.converged ? "converged" : "undecided"),
                  above.steps, above.final_value);
    return buf;
}

CertificateReport energy_blowup_certificate(const kernels::ModelParams& params, double kappa, double L, double rho,
                                            double eta) {
    const double s = subcritical_scaling(params, "energy_blowup_certificate");
    if (!(rho > 1.0) || !std::isfinite(rho)) throw DomainError("energy_blowup_certificate: rho must exceed 1");
    require_positive(kappa, "kappa");
    require_positive(L, "L");
    require_positive(eta, "eta");
    CertificateReport rep;
    rep.C1 = kernels::c_star(params) * std::tgamma(1.0 - s);
    const double K0 = kappa * L * L * rep.C1 * std::pow(eta, 2.0 * rho - 2.0);
    rep.exponent = 1.0 / (1.0 - s);
    rep.printed_exponent = 1.0 - s;
    rep.theta0 = std::pow(K0, rep.exponent);
    rep.theta0_printed = std::pow(K0, rep.printed_exponent);
    rep.A_at_theta0 = K0 * std::pow(rep.theta0, -(1.0 - s));
    rep.below = iterate_certificate(0.5 * rep.theta0, K0, s, eta);
    rep.above = iterate_certificate(2.0 * rep.theta0, K0, s, eta);
    return rep;
}

}  // namespace fracspde::analysis
