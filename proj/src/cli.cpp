#include "fracspde/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "fracspde/analysis.hpp"
#include "fracspde/errors.hpp"
#include "fracspde/kernels.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/solver.hpp"
#include "fracspde/specfun.hpp"

namespace fracspde::cli {

namespace fs = std::filesystem;
using config::ExperimentConfig;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* const kNames[] = {"kernel", "ml", "density", "isometry", "simulate", "moments", "bounds", "upsilon",
                              "blowup"};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[std::size_t(j)] = a + (b - a) * j / (n - 1);
    return v;
}

class Csv {
public:
    Csv(const fs::path& path, std::initializer_list<const char*> header) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        bool first = true;
        for (const char* h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }

    Csv& cell(double v) { return text(format_number(v)); }
    Csv& text(const std::string& s) {
        out_ << (open_ ? "," : "") << s;
        open_ = true;
        return *this;
    }
    void end() {
        out_ << '\n';
        open_ = false;
    }
    void row(std::initializer_list<double> values) {
        for (double v : values) cell(v);
        end();
    }

private:
    std::ofstream out_;
    bool open_ = false;
};

/// Output bookkeeping of one command run.
class Run {
public:
    Run(const ExperimentConfig& c, fs::path dir, std::ostream& log) : cfg(c), dir_(std::move(dir)), log_(log) {}

    const ExperimentConfig& cfg;

    Csv csv(const std::string& name, std::initializer_list<const char*> header) {
        outputs_.push_back(name);
        return Csv(dir_ / name, header);
    }
    void line(const std::string& s) { summary_ += s + "\n"; }
    void linef(const char* fmt, auto... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        line(buf);
    }
    void plot(const std::string& s) { plot_ += s + "\n"; }
    void conditions(const noise::ConditionReport& rep) { conditions_ = rep.summary(); }
    void fail(const std::string& why) { failure_ = why; }

    void finish(const char* command, double wall_seconds) {
        {
            std::ofstream(dir_ / "summary.txt", std::ios::binary) << summary_;
            std::ofstream(dir_ / "plot.gp", std::ios::binary)
                << "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n"
                << plot_;
        }
        nlohmann::ordered_json m;
        m["program"] = "fracspde";
        m["version"] = kVersion;
        m["command"] = command;
        m["config"] = config::serialize_config(cfg);
        m["seed"] = cfg.run.seed;
        m["replicas"] = cfg.run.replicas;
        m["threads"] = worker_count();
        m["wall_time_seconds"] = wall_seconds;
        m["grid"] = cfg.grid.describe();
        if (!conditions_.empty()) {
            m["condition_report"] = {{"summary", conditions_}, {"fnv1a64", hex64(fnv1a(conditions_))}};
        }
        nlohmann::ordered_json files = nlohmann::ordered_json::array();
        for (const std::string& name : outputs_) {
            std::ifstream in(dir_ / name, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            files.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a(ss.str()))}});
        }
        m["outputs"] = files;
        m["status"] = failure_.empty() ? "ok" : failure_;
        std::ofstream(dir_ / "manifest.json", std::ios::binary) << m.dump(2) << '\n';
        log_ << summary_;
        if (!failure_.empty()) throw DivergenceError(failure_);
    }

private:
    fs::path dir_;
    std::ostream& log_;
    std::vector<std::string> outputs_;
    std::string summary_;
    std::string plot_;
    std::string conditions_;
    std::string failure_;
};

solver::SimulationOptions simulation_options(const ExperimentConfig& c) {
    return {c.noise.override_conditions, c.noise.explosion_guard};
}

std::pair<double, double> square_range(const std::vector<double>& u0) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : u0) {
        lo = std::min(lo, v * v);
        hi = std::max(hi, v * v);
    }
    return {lo, hi};
}

bool usable(double v) { return std::isfinite(v) && v > 0.0; }

/// Renewal solution sampled at the grid's output times (fine uniform march, 32 substeps).
std::vector<double> envelope_at_grid(double c1, double kappa_prime, double rho, const GridSpec& g) {
    if (!usable(kappa_prime)) return std::vector<double>(std::size_t(g.nt + 1), kNaN);
    const int sub = 32;
    const auto t = linspace(0.0, g.T, g.nt * sub + 1);
    const analysis::RenewalSolution sol = analysis::renewal_solve(c1, kappa_prime, rho, t);
    std::vector<double> out;
    for (int k = 0; k <= g.nt; ++k) out.push_back(sol.f[std::size_t(k * sub)]);
    return out;
}

void run_kernel(Run& run) {
    const auto& c = run.cfg;
    Csv csv = run.csv("kernel.csv", {"t", "x", "G_subordination", "G_spectral", "abs_diff"});
    double worst = 0.0;
    for (double t : c.kernel.times) {
        for (double x : linspace(-c.kernel.x_max, c.kernel.x_max, c.kernel.points)) {
            const double r = std::fabs(x);
            const double gs = kernels::green_function_radial(c.model, t, r, kernels::GreenMethod::subordination);
            const double gp = kernels::green_function_radial(c.model, t, r, kernels::GreenMethod::spectral);
            const double diff = std::fabs(gs - gp);
            if (std::isfinite(diff)) worst = std::max(worst, diff);
            csv.row({t, x, gs, gp, diff});
        }
    }
    run.linef("kernel: alpha = %g, beta = %g, nu = %g, d = %d", c.model.alpha, c.model.beta, c.model.nu, c.model.d);
    run.linef("max |G_subordination - G_spectral| = %.3e", worst);
    run.plot("set output 'kernel.png'\nset xlabel 'x'\nplot 'kernel.csv' using 2:3 with points title 'subordination', "
             "'' using 2:4 with lines title 'spectral'");
}

void run_ml(Run& run) {
    const auto& c = run.cfg;
    const specfun::FracOrder beta(c.ml.beta);
    Csv csv = run.csv("ml.csv", {"z", "E_beta"});
    double worst_exp = 0.0;
    for (double z : linspace(c.ml.z_min, c.ml.z_max, c.ml.points)) {
        const double e = specfun::mittag_leffler(beta, z);
        worst_exp = std::max(worst_exp, std::fabs(e - std::exp(z)));
        csv.row({z, e});
    }
    run.linef("Mittag-Leffler E_beta(z), beta = %g, z in [%g, %g]", c.ml.beta, c.ml.z_min, c.ml.z_max);
    if (beta.classical()) run.linef("max |E_1(z) - exp(z)| = %.3e", worst_exp);
    run.plot("set output 'ml.png'\nset xlabel 'z'\nplot 'ml.csv' using 1:2 with lines");
}

void run_density(Run& run) {
    const auto& c = run.cfg;
    const specfun::FracOrder beta(c.density.beta);
    Csv csv = run.csv("density.csv", {"x", "density"});
    const auto xs = linspace(0.0, c.density.x_max, c.density.points);
    double mass = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        // f_{E_t}(0+) = t^{-beta} / Gamma(1 - beta)
        const double f = xs[j] > 0.0 ? specfun::inv_subordinator_density(beta, c.density.t, xs[j])
                                     : std::pow(c.density.t, -c.density.beta) / std::tgamma(1.0 - c.density.beta);
        if (j > 0) mass += 0.5 * (xs[j] - xs[j - 1]) * (f + prev);
        prev = f;
        csv.row({xs[j], f});
    }
    run.linef("inverse subordinator density, beta = %g, t = %g", c.density.beta, c.density.t);
    run.linef("trapezoid mass on [0, %g] = %.8f", c.density.x_max, mass);
    run.plot("set output 'density.png'\nset xlabel 'x'\nplot 'density.csv' using 1:2 with lines");
}

void run_isometry(Run& run) {
    const auto& c = run.cfg;
    const noise::LevyMeasureSpec mu = config::make_mu(c);
    const double k = c.isometry.c;
    noise::Integrand X;
    if (c.isometry.integrand == "constant") {
        X = [k](double, const Point&, const Point&) { return k; };
    } else {
        X = [k](double s, const Point&, const Point& h) { return k * s * norm(h); };
    }
    const noise::IsometryReport rep = noise::isometry_check(X, c.grid, mu, c.run.replicas, c.run.seed);
    Csv csv = run.csv("isometry.csv", {"quantity", "mc_estimate", "mc_stderr", "quadrature", "pass"});
    auto put = [&](const char* name, const noise::MomentCheck& m) {
        csv.text(name).cell(m.mc).cell(m.std_error).cell(m.quadrature).text(m.pass ? "1" : "0").end();
        run.linef("%-14s mc = %.8g +- %.3g, quadrature = %.8g, %s", name, m.mc, m.std_error, m.quadrature,
                  m.pass ? "pass" : "FAIL");
    };
    run.linef("isometry: integrand %s (c = %g), %zu replicas, mu: %s", c.isometry.integrand.c_str(), k, rep.replicas,
              mu.describe().c_str());
    put("second_moment", rep.second);
    put("first_moment", rep.first);
}

void run_simulate(Run& run) {
    const auto& c = run.cfg;
    const kernels::GreenTable table = kernels::build_green_table(c.model, c.grid, c.truncation);
    const noise::SigmaSpec sigma = config::make_sigma(c);
    const noise::LevyMeasureSpec mu = config::make_mu(c);
    run.conditions(noise::validate_conditions(sigma, mu));
    const auto u0 = config::make_initial(c);
    const solver::SolutionPath path =
        solver::simulate_path(table, u0, sigma, mu, c.noise.kind, c.run.seed, 0, simulation_options(c));

    const GridSpec& g = c.grid;
    Csv csv = g.d == 1 ? run.csv("simulate.csv", {"t", "x", "u"}) : run.csv("simulate.csv", {"t", "x", "y", "u"});
    for (int k = 0; k <= g.nt; ++k) {
        for (std::size_t i = 0; i < g.points(); ++i) {
            const Point x = g.point(i);
            csv.cell(g.time(k)).cell(x[0]);
            if (g.d == 2) csv.cell(x[1]);
            csv.cell(path.values[std::size_t(k)][i]).end();
        }
    }
    run.linef("simulate: %s noise, sigma %s, seed %llu", solver::to_string(c.noise.kind), sigma.name.c_str(),
              static_cast<unsigned long long>(c.run.seed));
    run.linef("grid %s", g.describe().c_str());
    run.linef("truncation: symbol at Nyquist %.3e, tail mass %.3e", table.report().nyquist_symbol,
              table.report().tail_mass);
    const auto& last = path.values.back();
    if (path.exploded) {
        run.linef("path exploded at t = %g (step %d)", path.explosion_time, path.explosion_step);
        run.fail("path exploded");
    } else {
        const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
        run.linef("u(T) range [%.6g, %.6g]", *lo, *hi);
    }
    run.plot(g.d == 1 ? "set output 'simulate.png'\nset xlabel 'x'\nset ylabel 't'\n"
                        "plot 'simulate.csv' using 2:1:3 with image"
                      : "set output 'simulate.png'\nset xlabel 'x'\nset ylabel 'y'\n"
                        "plot 'simulate.csv' using 2:3:($1 == " + format_number(g.T) + " ? $4 : 1/0) with image");
}

void run_moments(Run& run) {
    const auto& c = run.cfg;
    const GridSpec& g = c.grid;
    const kernels::GreenTable table = kernels::build_green_table(c.model, g, c.truncation);
    const noise::SigmaSpec sigma = config::make_sigma(c);
    const noise::LevyMeasureSpec mu = config::make_mu(c);
    const noise::ConditionReport rep = noise::validate_conditions(sigma, mu);
    run.conditions(rep);
    const auto u0 = config::make_initial(c);
    const analysis::EnsembleResult ens = analysis::simulate_ensemble(table, u0, sigma, mu, c.noise.kind,
                                                                     c.run.replicas, c.run.seed, simulation_options(c));

    const double s = c.model.scaling();
    const double rho = 1.0 - s;
    const double cs = kernels::c_star(c.model);
    const auto [c1_lo, c1_hi] = square_range(u0);
    const double kappa_lo = rep.kappa2 * sigma.L * sigma.L * cs;
    const double kappa_hi = rep.K2 * sigma.lip * sigma.lip * cs;
    const auto lower = envelope_at_grid(c1_lo, kappa_lo, rho, g);
    const auto upper = envelope_at_grid(c1_hi, kappa_hi, rho, g);

    const analysis::MomentSeries& m2 = ens.second;
    {
        Csv csv = run.csv("moments.csv", {"t", "sup_moment", "stderr", "lower_envelope", "upper_envelope"});
        for (std::size_t k = 0; k < m2.times.size(); ++k) {
            csv.row({m2.times[k], m2.sup_moment[k], m2.std_error[k], lower[k], upper[k]});
        }
    }
    {
        const analysis::MomentSeries& m1 = ens.first;
        Csv csv = run.csv("first_moment.csv", {"t", "sup_moment", "inf_moment", "stderr"});
        for (std::size_t k = 0; k < m1.times.size(); ++k) {
            csv.row({m1.times[k], m1.sup_moment[k], m1.inf_moment[k], m1.std_error[k]});
        }
    }

    const double t0 = c.moments.window_start.value_or(0.5 * g.T);
    const double t1 = c.moments.window_end.value_or(g.T);
    run.linef("moments: %s noise, sigma %s, %zu replicas (%zu exploded), seed %llu", solver::to_string(c.noise.kind),
              sigma.name.c_str(), m2.replicas + m2.exploded, m2.exploded,
              static_cast<unsigned long long>(c.run.seed));
    run.linef("mu: %s", mu.describe().c_str());
    const analysis::GrowthFit fit = analysis::growth_rate_fit(m2, t0, t1);
    run.linef("fitted rate of sup_x E|u|^2 on [%g, %g]: %.6g +- %.3g (95%%, %zu points)", t0, t1, fit.rate,
              fit.half_width, fit.points);
    const double lo_rate = usable(kappa_lo) ? analysis::renewal_rate(kappa_lo, rho) : kNaN;
    const double hi_rate = usable(kappa_hi) ? analysis::renewal_rate(kappa_hi, rho) : kNaN;
    run.linef("lower envelope rate %.6g (band from %.6g), upper envelope rate %.6g (band to %.6g)", lo_rate,
              0.5 * lo_rate, hi_rate, 2.0 * hi_rate);
    if (std::isfinite(lo_rate) && std::isfinite(hi_rate)) {
        const bool inside = fit.rate >= 0.5 * lo_rate && fit.rate <= 2.0 * hi_rate;
        const bool positive = fit.rate - fit.half_width > 0.0;
        run.linef("within slack band: %s; positive at 95%%: %s", inside ? "yes" : "no", positive ? "yes" : "no");
    }
    if (c.model.d < c.model.alpha && usable(rep.kappa2) && usable(sigma.L)) {
        const double bound = analysis::upsilon_inverse(c.model.alpha, c.model.nu, c.model.d,
                                                       1.0 / (rep.kappa2 * sigma.L * sigma.L));
        run.linef("upsilon^{-1}(1/(kappa L^2)) = %.6g", bound);
    }
    if (c.noise.kind == solver::NoiseKind::noncompensated && usable(rep.kappa1) && usable(sigma.L)) {
        const auto nr = analysis::noncompensated_lower_rates(c.model, rep.kappa1, sigma.L);
        const analysis::GrowthFit f1 = analysis::growth_rate_fit(ens.first, t0, t1);
        run.linef("first moment: fitted rate %.6g +- %.3g; lower rates kappa L = %.6g, kappa L C* = %.6g", f1.rate,
                  f1.half_width, nr.without_cstar, nr.with_cstar);
    }
    run.plot("set output 'moments.png'\nset xlabel 't'\nset logscale y\n"
             "plot 'moments.csv' using 1:2:3 with yerrorbars title 'sup E|u|^2', "
             "'' using 1:4 with lines title 'lower', '' using 1:5 with lines title 'upper'");
}

void run_bounds(Run& run) {
    const auto& c = run.cfg;
    const kernels::ModelParams& p = c.model;
    const noise::SigmaSpec sigma = config::make_sigma(c);
    const noise::LevyMeasureSpec mu = config::make_mu(c);
    const noise::ConditionReport rep = noise::validate_conditions(sigma, mu);
    run.conditions(rep);
    const double s = p.scaling();
    const double cs = kernels::c_star(p);
    run.linef("bounds: alpha = %g, beta = %g, nu = %g, d = %d, beta d / alpha = %.6g", p.alpha, p.beta, p.nu, p.d, s);
    run.linef("C* = %.10g", cs);
    run.linef("K = %.6g, K1 = %.6g, lip = %.6g, kappa = %.6g, kappa1 = %.6g, L = %.6g", rep.K2, rep.K1, sigma.lip,
              rep.kappa2, rep.kappa1, sigma.L);

    if (usable(rep.K2) && usable(sigma.lip)) {
        const double gamma = analysis::choose_gamma(p, rep.K2, sigma.lip, c.bounds.target);
        const kernels::GreenTable table = kernels::build_green_table(p, c.grid, c.truncation);
        run.linef("gamma for contraction target %g: %.6g", c.bounds.target, gamma);
        run.linef("  C** (gamma^{1+s} form) %.6g", analysis::contraction_constant(p, rep.K2, sigma.lip, gamma));
        run.linef("  C** (Laplace form)     %.6g", analysis::laplace_contraction_constant(p, rep.K2, sigma.lip, gamma));
        run.linef("  C** (lattice)          %.6g", analysis::lattice_contraction_constant(table, rep.K2, sigma.lip, gamma));
    }
    if (usable(rep.K1) && usable(sigma.lip)) {
        const double gamma = rep.K1 * sigma.lip / c.bounds.target;
        run.linef("noncompensated: gamma = %.6g gives K1 lip / gamma = %.6g", gamma,
                  analysis::contraction_constant_noncomp(rep.K1, sigma.lip, gamma));
    }

    const auto u0 = config::make_initial(c);
    const auto [c1_lo, c1_hi] = square_range(u0);
    const double rho = 1.0 - s;
    const double kappa_lo = rep.kappa2 * sigma.L * sigma.L * cs;
    const double kappa_hi = rep.K2 * sigma.lip * sigma.lip * cs;
    const auto t = analysis::graded_time_grid(c.grid.T, std::size_t(c.bounds.renewal_points - 1));
    std::vector<double> lo(t.size(), kNaN), hi(t.size(), kNaN);
    if (usable(kappa_lo)) {
        const auto sol = analysis::renewal_solve(c1_lo, kappa_lo, rho, t);
        lo = sol.f;
        run.linef("lower renewal: c1 = %.6g, kappa' = %.6g, rate %.6g, residual %.2e", c1_lo, kappa_lo, sol.rate,
                  sol.residual);
    }
    if (usable(kappa_hi)) {
        const auto sol = analysis::renewal_solve(c1_hi, kappa_hi, rho, t);
        hi = sol.f;
        run.linef("upper renewal: c1 = %.6g, kappa' = %.6g, rate %.6g, residual %.2e", c1_hi, kappa_hi, sol.rate,
                  sol.residual);
    }
    {
        Csv csv = run.csv("bounds.csv", {"t", "lower_envelope", "upper_envelope"});
        for (std::size_t i = 0; i < t.size(); ++i) csv.row({t[i], lo[i], hi[i]});
    }
    if (usable(rep.kappa1) && usable(sigma.L)) {
        const auto nr = analysis::noncompensated_lower_rates(p, rep.kappa1, sigma.L);
        run.linef("noncompensated first-moment lower rate: kappa L = %.6g (with C*: %.6g)", nr.without_cstar,
                  nr.with_cstar);
    }
    if (!std::isnan(rep.kappa1_lebesgue)) {
        run.linef("lower-envelope integral against Lebesgue measure on the shell: %.6g", rep.kappa1_lebesgue);
    }

    if (usable(rep.kappa2) && usable(sigma.L)) {
        const analysis::CertificateReport cert =
            analysis::energy_blowup_certificate(p, rep.kappa2, sigma.L, c.bounds.growth_exponent, c.bounds.eta);
        std::istringstream lines(cert.summary());
        for (std::string l; std::getline(lines, l);) run.line("certificate: " + l);
        Csv csv = run.csv("certificate.csv", {"case", "theta", "A", "steps", "final_value", "diverged", "converged"});
        auto put = [&](const char* name, const analysis::CertificateIteration& it) {
            csv.text(name).cell(it.theta).cell(it.A).cell(it.steps).cell(it.final_value);
            csv.text(it.diverged ? "1" : "0").text(it.converged ? "1" : "0").end();
        };
        put("half_theta0", cert.below);
        put("double_theta0", cert.above);
    } else {
        run.line("certificate: skipped, sigma declares no lower envelope for this measure");
    }
    run.plot("set output 'bounds.png'\nset xlabel 't'\nset logscale y\n"
             "plot 'bounds.csv' using 1:2 with lines title 'lower', '' using 1:3 with lines title 'upper'");
}

void run_upsilon(Run& run) {
    const auto& c = run.cfg;
    const kernels::ModelParams& p = c.model;
    Csv csv = run.csv("upsilon.csv", {"gamma", "upsilon"});
    const double a = std::log(c.upsilon.gamma_min), b = std::log(c.upsilon.gamma_max);
    for (double lg : linspace(a, b, c.upsilon.points)) {
        const double g = std::exp(lg);
        csv.row({g, analysis::upsilon(p.alpha, p.nu, p.d, g)});
    }
    run.linef("upsilon: alpha = %g, nu = %g, d = %d", p.alpha, p.nu, p.d);
    const noise::ConditionReport rep = noise::validate_conditions(config::make_sigma(c), config::make_mu(c));
    const double L = config::make_sigma(c).L;
    if (usable(rep.kappa2) && usable(L)) {
        const double t = 1.0 / (rep.kappa2 * L * L);
        run.linef("upsilon^{-1}(1/(kappa L^2)) with kappa = %.6g, L = %.6g: %.8g", rep.kappa2, L,
                  analysis::upsilon_inverse(p.alpha, p.nu, p.d, t));
    }
    run.plot("set output 'upsilon.png'\nset logscale xy\nset xlabel 'gamma'\nplot 'upsilon.csv' using 1:2 with lines");
}

void run_blowup(Run& run) {
    const auto& b = run.cfg.blowup;
    const auto t = linspace(0.0, b.T, b.points);
    const auto coarse = analysis::blowup_time_on_grid(b.C, b.D, b.gamma_exp, b.theta, t);
    const auto fine = analysis::nonlinear_blowup(b.C, b.D, b.gamma_exp, b.theta, t);
    Csv csv = run.csv("blowup.csv", {"intervals", "blowup_time"});
    csv.row({double(b.points - 1), coarse.value_or(kNaN)});
    csv.row({double(2 * (b.points - 1)), fine.value_or(kNaN)});
    run.linef("blowup: C = %g, D = %g, gamma = %g, theta = %g on [0, %g]", b.C, b.D, b.gamma_exp, b.theta, b.T);
    if (fine) {
        run.linef("blow-up time %.8g (%d intervals), %.8g (%d intervals)", coarse.value_or(kNaN), b.points - 1, *fine,
                  2 * (b.points - 1));
    } else {
        run.line("no blow-up on the horizon");
    }
    run.plot("set output 'blowup.png'\nset logscale x\nplot 'blowup.csv' using 1:2 with linespoints");
}

}  // namespace

const char* to_string(Command cmd) noexcept { return kNames[static_cast<int>(cmd)]; }

std::optional<Command> parse_command(std::string_view name) {
    for (int i = 0; i < int(std::size(kNames)); ++i) {
        if (name == kNames[i]) return static_cast<Command>(i);
    }
    return std::nullopt;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void run_command(Command cmd, const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
    config::validate_config(config);
    fs::create_directories(out_dir);
    const auto start = std::chrono::steady_clock::now();
    Run run(config, out_dir, log);
    switch (cmd) {
        case Command::kernel: run_kernel(run); break;
        case Command::ml: run_ml(run); break;
        case Command::density: run_density(run); break;
        case Command::isometry: run_isometry(run); break;
        case Command::simulate: run_simulate(run); break;
        case Command::moments: run_moments(run); break;
        case Command::bounds: run_bounds(run); break;
        case Command::upsilon: run_upsilon(run); break;
        case Command::blowup: run_blowup(run); break;
    }
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    run.finish(to_string(cmd), wall.count());
}

int exit_status(std::ostream& err) {
    try {
        throw;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return 1;
    } catch (const ConditionViolation& e) {
        err << "condition violated: " << e.what() << '\n';
        return 1;
    } catch (const ResolutionError& e) {
        err << "grid too coarse (" << e.heuristic() << ", " << e.parameter() << "): " << e.what() << '\n';
        return 1;
    } catch (const BindingError& e) {
        err << "binding error: " << e.what() << '\n';
        return 1;
    } catch (const QuadratureError& e) {
        err << "quadrature failed: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return 2;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "invalid argument: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int run(Command cmd, const std::string& config_text, const Overrides& overrides, const fs::path& out_dir,
        std::ostream& log, std::ostream& err) {
    try {
        ExperimentConfig cfg = config::parse_config(config_text);
        if (overrides.seed) cfg.run.seed = *overrides.seed;
        if (overrides.replicas) cfg.run.replicas = *overrides.replicas;
        run_command(cmd, cfg, out_dir, log);
        return 0;
    } catch (...) {
        return exit_status(err);
    }
}

int rerun(const fs::path& manifest, const fs::path& out_dir, std::ostream& log, std::ostream& err) {
    try {
        std::ifstream in(manifest, std::ios::binary);
        if (!in) throw ValidationError("manifest", "cannot read " + manifest.string());
        nlohmann::json m;
        try {
            m = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("manifest", e.what());
        }
        if (!m.contains("command") || !m.contains("config")) {
            throw ValidationError("manifest", "missing command or config");
        }
        const auto cmd = parse_command(m["command"].get<std::string>());
        if (!cmd) throw ValidationError("manifest.command", "unknown command");
        run_command(*cmd, config::parse_config(m["config"].get<std::string>()), out_dir, log);
        return 0;
    } catch (...) {
        return exit_status(err);
    }
}

}  // namespace fracspde::cli
