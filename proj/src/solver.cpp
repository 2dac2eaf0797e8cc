#include "fracspde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fft.hpp"
#include "fracspde/errors.hpp"

namespace fracspde::solver {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_field(const GridSpec& grid, std::span<const double> u0) {
    if (u0.size() != grid.points()) throw BindingError("initial field size does not match the grid");
    for (double v : u0) {
        if (!std::isfinite(v)) throw DomainError("initial field must be finite");
    }
}

std::vector<Field> deterministic_parts(std::span<const double> u0, const kernels::GreenTable& table) {
    const GridSpec& g = table.grid();
    require_field(g, u0);
    std::vector<Field> out(std::size_t(g.nt + 1));
    out[0].assign(u0.begin(), u0.end());
    detail::LatticeFft fft(g.d, g.n);
    std::copy(u0.begin(), u0.end(), fft.real());
    fft.forward();
    const std::vector<std::complex<double>> u0_hat(fft.spectrum(), fft.spectrum() + fft.spectral_size());
    const double scale = 1.0 / double(g.points());
    for (int k = 1; k <= g.nt; ++k) {
        const auto S = table.symbol(k);
        std::complex<double>* spec = fft.spectrum();
        for (std::size_t q = 0; q < fft.spectral_size(); ++q) spec[q] = S[q] * u0_hat[q];
        fft.backward();
        out[std::size_t(k)].assign(fft.real(), fft.real() + g.points());
        for (double& v : out[std::size_t(k)]) v *= scale;
    }
    return out;
}

double weighted_norm_of(const std::vector<Field>& values, const GridSpec& grid, double gamma, int p) {
    if (!(gamma >= 0.0)) throw DomainError("weighted_norm: gamma must be nonnegative");
    if (p != 1 && p != 2) throw DomainError("weighted_norm: p must be 1 or 2");
    double best = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double w = std::exp(-gamma * grid.time(int(k)));
        for (double v : values[k]) {
            if (std::isnan(v)) continue;
            const double a = std::fabs(v);
            best = std::max(best, w * (p == 1 ? a : a * a));
        }
    }
    return p == 1 ? best : std::sqrt(best);
}

bool is_compensated(NoiseKind kind) { return kind == NoiseKind::compensated; }

/// The map u -> P u0 + A u on one noise realization.
class Picard {
public:
    Picard(const kernels::GreenTable& table, std::span<const double> u0, const noise::SigmaSpec& sigma,
           const noise::LevyMeasureSpec& mu, const noise::NoiseRealization& noise, NoiseKind kind)
        : grid_(table.grid()), P_(deterministic_parts(u0, table)),
          conv_(table, noise, sigma, mu, is_compensated(kind)), stoch_(grid_.points()) {
        table.require_grid(noise.grid, "picard");
    }

    const std::vector<Field>& start() const { return P_; }

    std::vector<Field> apply(const std::vector<Field>& current) {
        std::vector<Field> next = P_;
        conv_.reset();
        for (int k = 1; k <= grid_.nt; ++k) {
            conv_.add_step(k, current[std::size_t(k - 1)]);
            conv_.evaluate(k, stoch_);
            Field& u = next[std::size_t(k)];
            for (std::size_t i = 0; i < u.size(); ++i) {
                u[i] += stoch_[i];
                if (!std::isfinite(u[i])) throw DivergenceError("picard: iterate is not finite");
            }
        }
        return next;
    }

private:
    GridSpec grid_;
    std::vector<Field> P_;
    noise::ConvolutionField conv_;
    Field stoch_;
};

}  // namespace

const char* to_string(NoiseKind kind) noexcept {
    return kind == NoiseKind::compensated ? "compensated" : "noncompensated";
}

Field deterministic_part(std::span<const double> u0, const kernels::GreenTable& table, int k) {
    if (k < 0 || k > table.grid().nt) throw DomainError("deterministic_part: time index out of range");
    if (k == 0) {
        require_field(table.grid(), u0);
        return Field(u0.begin(), u0.end());
    }
    return deterministic_parts(u0, table)[std::size_t(k)];
}

void require_existence(const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind) {
    const noise::ConditionReport rep = noise::validate_conditions(sigma, mu);
    const bool ok = is_compensated(kind) ? rep.compensated_existence : rep.noncompensated_existence;
    if (!ok) {
        throw ConditionViolation(std::string("sigma '") + sigma.name + "' with this Levy measure does not satisfy the " +
                                 (is_compensated(kind) ? "square-integrable" : "integrable") +
                                 " Lipschitz condition required for " + to_string(kind) +
                                 " noise; set noise.override_conditions to run anyway");
    }
}

SolutionPath simulate_path(const kernels::GreenTable& table, std::span<const double> u0,
                           const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind,
                           const noise::NoiseRealization& noise, const SimulationOptions& options) {
    const GridSpec& g = table.grid();
    table.require_grid(noise.grid, "simulate_path");
    if (mu.d() != g.d) throw BindingError("simulate_path: mu.d does not match grid.d");
    if (!options.override_conditions) require_existence(sigma, mu, kind);

    SolutionPath path;
    path.params = table.params();
    path.grid = g;
    path.sigma = sigma.name;
    path.seed = noise.seed;
    path.stream = noise.stream;
    path.values = deterministic_parts(u0, table);

    noise::ConvolutionField conv(table, noise, sigma, mu, is_compensated(kind));
    Field stoch(g.points());
    for (int k = 1; k <= g.nt; ++k) {
        conv.add_step(k, path.values[std::size_t(k - 1)]);
        conv.evaluate(k, stoch);
        Field& u = path.values[std::size_t(k)];
        bool blown = false;
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] += stoch[i];
            if (!std::isfinite(u[i]) || std::fabs(u[i]) > options.explosion_guard) blown = true;
        }
        if (blown) {
            path.exploded = true;
            path.explosion_step = k;
            path.explosion_time = g.time(k);
            for (int j = k + 1; j <= g.nt; ++j) std::fill(path.values[std::size_t(j)].begin(),
                                                          path.values[std::size_t(j)].end(), kNaN);
            break;
        }
    }
    return path;
}

SolutionPath simulate_path(const kernels::GreenTable& table, std::span<const double> u0,
                           const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind,
                           std::uint64_t seed, std::uint64_t stream, const SimulationOptions& options) {
    const noise::NoiseRealization noise = noise::sample_noise(table.grid(), mu, seed, stream);
    return simulate_path(table, u0, sigma, mu, kind, noise, options);
}

SolutionPath simulate_path(const kernels::ModelParams& params, const GridSpec& grid, std::span<const double> u0,
                           const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu, NoiseKind kind,
                           std::uint64_t seed, const SimulationOptions& options) {
    const kernels::GreenTable table = kernels::build_green_table(params, grid);
    return simulate_path(table, u0, sigma, mu, kind, seed, 0, options);
}

double weighted_norm(const SolutionPath& path, double gamma, int p) {
    return weighted_norm_of(path.values, path.grid, gamma, p);
}

PicardResult picard_solve(const kernels::GreenTable& table, std::span<const double> u0,
                          const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                          const noise::NoiseRealization& noise, double gamma, int max_iter, double tol,
                          NoiseKind kind) {
    const GridSpec& g = table.grid();
    table.require_grid(noise.grid, "picard_solve");
    if (!(gamma > 0.0)) throw DomainError("picard_solve: gamma must be positive");
    if (max_iter < 1) throw DomainError("picard_solve: max_iter must be at least 1");
    if (!(tol > 0.0)) throw DomainError("picard_solve: tol must be positive");
    const int p = is_compensated(kind) ? 2 : 1;

    Picard picard(table, u0, sigma, mu, noise, kind);
    auto apply = [&](const std::vector<Field>& current) { return picard.apply(current); };
    auto distance = [&](const std::vector<Field>& a, const std::vector<Field>& b) {
        std::vector<Field> diff = a;
        for (std::size_t k = 0; k < diff.size(); ++k) {
            for (std::size_t i = 0; i < diff[k].size(); ++i) diff[k][i] -= b[k][i];
        }
        return weighted_norm_of(diff, g, gamma, p);
    };

    PicardResult result;
    PicardDiagnostics& diag = result.diagnostics;
    std::vector<Field> current = picard.start();
    for (int n = 1; n <= max_iter; ++n) {
        std::vector<Field> next = apply(current);
        const double delta = distance(next, current);
        if (!diag.differences.empty()) {
            const double prev = diag.differences.back();
            diag.ratios.push_back(prev > 0.0 ? delta / prev : 0.0);
        }
        diag.differences.push_back(delta);
        diag.iterations = n;
        current = std::move(next);
        if (delta <= tol) {
            diag.converged = true;
            break;
        }
    }
    if (!diag.converged) {
        throw ConvergenceError("picard_solve: no convergence after " + std::to_string(max_iter) + " iterations",
                               diag.ratios);
    }
    diag.residual = distance(apply(current), current);

    SolutionPath& path = result.path;
    path.params = table.params();
    path.grid = g;
    path.sigma = sigma.name;
    path.seed = noise.seed;
    path.stream = noise.stream;
    path.values = std::move(current);
    return result;
}

std::vector<std::vector<Field>> picard_iterates(const kernels::GreenTable& table, std::span<const double> u0,
                                                const noise::SigmaSpec& sigma, const noise::LevyMeasureSpec& mu,
                                                const noise::NoiseRealization& noise, int iterations,
                                                NoiseKind kind) {
    if (iterations < 0) throw DomainError("picard_iterates: iterations must be nonnegative");
    Picard picard(table, u0, sigma, mu, noise, kind);
    std::vector<std::vector<Field>> out{picard.start()};
    for (int n = 0; n < iterations; ++n) out.push_back(picard.apply(out.back()));
    return out;
}

}  // namespace fracspde::solver
