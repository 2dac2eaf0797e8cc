#include "fracspde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fft.hpp"
#include "fracspde/errors.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/quadrature.hpp"

namespace fracspde::noise {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kAngles = 64;

void require_dimension(int d) {
    if (d != 1 && d != 2) throw DomainError("mu.d must be 1 or 2");
}

void require_cutoffs(double eps, double R) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("mu.eps must be positive");
    if (!(R > eps) || !std::isfinite(R)) throw DomainError("mu.R must exceed mu.eps");
}

double surface(int d, double r) { return d == 1 ? 2.0 : 2.0 * std::numbers::pi * r; }

// Mean of f over the sphere of radius r: both signs in d = 1, an equispaced
// angular rule (exact for trigonometric polynomials of degree < 64) in d = 2.
template <class F>
double sphere_mean(int d, double r, const F& f) {
    if (d == 1) return 0.5 * (f(Point{r, 0.0}) + f(Point{-r, 0.0}));
    double sum = 0.0;
    for (int j = 0; j < kAngles; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / kAngles;
        sum += f(Point{r * std::cos(phi), r * std::sin(phi)});
    }
    return sum / kAngles;
}

// int_eps^R weight(r) mean_f(r) dr in the variable log r, split at r = 1 where
// truncated moments such as 1 ^ |h|^2 have a kink.
template <class W, class F>
double radial_integral(int d, double eps, double R, const W& weight, const F& f, const char* what) {
    auto g = [&](double v) {
        const double r = std::exp(v);
        return weight(r) * r * sphere_mean(d, r, f);
    };
    const double a = std::log(eps);
    const double b = std::log(R);
    quad::Estimate total;
    if (a < 0.0 && b > 0.0) {
        total += quad::gauss_kronrod_estimate(g, a, 0.0, 1e-11);
        total += quad::gauss_kronrod_estimate(g, 0.0, b, 1e-11);
    } else {
        total += quad::gauss_kronrod_estimate(g, a, b, 1e-11);
    }
    return quad::checked(total, quad::Tolerance{1e-9, 1e-300}, what);
}

}  // namespace

LevyMeasureSpec LevyMeasureSpec::none(int d) {
    require_dimension(d);
    LevyMeasureSpec mu;
    mu.d_ = d;
    return mu;
}

LevyMeasureSpec LevyMeasureSpec::point(int d, Point h, double mass) {
    return discrete(d, {LevyAtom{h, mass}});
}

LevyMeasureSpec LevyMeasureSpec::discrete(int d, std::vector<LevyAtom> atoms) {
    require_dimension(d);
    LevyMeasureSpec mu;
    mu.d_ = d;
    double total = 0.0;
    for (const LevyAtom& a : atoms) {
        if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw DomainError("mu.mass must be positive and finite");
        if (!std::isfinite(a.h[0]) || !std::isfinite(a.h[1])) throw DomainError("mu.mark must be finite");
        if (d == 1 && a.h[1] != 0.0) throw DomainError("mu.mark must be one-dimensional when d = 1");
        total += a.mass;
        mu.cumulative_.push_back(total);
    }
    mu.atoms_ = std::move(atoms);
    mu.total_mass_ = total;
    return mu;
}

LevyMeasureSpec LevyMeasureSpec::exponential(int d, double scale, double rate, double eps, double R) {
    require_dimension(d);
    require_cutoffs(eps, R);
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("mu.scale must be positive");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("mu.rate must be positive");
    LevyMeasureSpec mu;
    mu.d_ = d;
    mu.form_ = Form::density;
    mu.radial_ = Radial::exponential;
    mu.scale_ = scale;
    mu.shape_ = rate;
    mu.eps_ = eps;
    mu.R_ = R;
    mu.total_mass_ = mu.radial_mass(R);
    return mu;
}

LevyMeasureSpec LevyMeasureSpec::power(int d, double scale, double index, double eps, double R) {
    require_dimension(d);
    require_cutoffs(eps, R);
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("mu.scale must be positive");
    if (!(index < 2.0) || !std::isfinite(index)) throw DomainError("mu.index must be below 2 for a Levy measure");
    LevyMeasureSpec mu;
    mu.d_ = d;
    mu.form_ = Form::density;
    mu.radial_ = Radial::power;
    mu.scale_ = scale;
    mu.shape_ = index;
    mu.eps_ = eps;
    mu.R_ = R;
    mu.total_mass_ = mu.radial_mass(R);
    return mu;
}

double LevyMeasureSpec::radial_density(double r) const {
    if (form_ != Form::density) throw DomainError("radial_density: measure has no density");
    if (!(r > 0.0)) return 0.0;
    if (radial_ == Radial::exponential) return scale_ * std::exp(-shape_ * r);
    return scale_ * std::pow(r, -d_ - shape_);
}

double LevyMeasureSpec::shell_weight(double r) const { return surface(d_, r) * radial_density(r); }

double LevyMeasureSpec::radial_mass(double r) const {
    r = std::clamp(r, eps_, R_);
    const double c = d_ == 1 ? 2.0 * scale_ : 2.0 * std::numbers::pi * scale_;
    if (radial_ == Radial::exponential) {
        const double lam = shape_;
        if (d_ == 1) return c * std::exp(-lam * eps_) * -std::expm1(-lam * (r - eps_)) / lam;
        // int_eps^r s e^{-lam s} ds
        const double lo = (1.0 + lam * eps_) * std::exp(-lam * eps_);
        const double hi = (1.0 + lam * r) * std::exp(-lam * r);
        return c * (lo - hi) / (lam * lam);
    }
    // Both dimensions reduce to int_eps^r s^{-1-a} ds.
    const double a = shape_;
    if (a == 0.0) return c * std::log(r / eps_);
    return c * (std::pow(eps_, -a) - std::pow(r, -a)) / a;
}

double LevyMeasureSpec::integrate(const std::function<double(const Point&)>& f) const {
    if (form_ == Form::discrete) {
        double sum = 0.0;
        for (const LevyAtom& a : atoms_) sum += a.mass * f(a.h);
        return sum;
    }
    return radial_integral(d_, eps_, R_, [this](double r) { return shell_weight(r); }, f, "mu.integrate");
}

double LevyMeasureSpec::integrate_lebesgue(const std::function<double(const Point&)>& f) const {
    if (form_ == Form::discrete) return kNaN;
    const int d = d_;
    return radial_integral(d_, eps_, R_, [d](double r) { return surface(d, r); }, f, "mu.integrate_lebesgue");
}

double LevyMeasureSpec::levy_integral() const {
    return integrate([](const Point& h) { return std::min(1.0, h[0] * h[0] + h[1] * h[1]); });
}

double LevyMeasureSpec::small_jump_second_moment() const {
    if (form_ == Form::discrete) return 0.0;
    if (radial_ == Radial::power) {
        if (shape_ >= 2.0) return kInf;
        // r^2 times the shell weight is c r^{1 - index}.
        const double c = d_ == 1 ? 2.0 * scale_ : 2.0 * std::numbers::pi * scale_;
        return c * std::pow(eps_, 2.0 - shape_) / (2.0 - shape_);
    }
    auto g = [this](double r) { return r * r * shell_weight(r); };
    return quad::finite_singular(g, 0.0, eps_, quad::Tolerance{1e-9, 1e-300}, "mu.small_jump_second_moment");
}

Point LevyMeasureSpec::sample_mark(rng::Philox& gen) const {
    if (!(total_mass_ > 0.0)) throw DomainError("sample_mark: measure has zero mass");
    if (form_ == Form::discrete) {
        const double target = gen.uniform() * total_mass_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) --it;
        return atoms_[std::size_t(it - cumulative_.begin())].h;
    }
    // Invert the closed-form radial mass by bisection in log r.
    const double target = gen.uniform() * total_mass_;
    double lo = std::log(eps_);
    double hi = std::log(R_);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (radial_mass(std::exp(mid)) < target) lo = mid; else hi = mid;
    }
    const double r = std::exp(0.5 * (lo + hi));
    if (d_ == 1) return {gen.uniform() < 0.5 ? -r : r, 0.0};
    const double phi = 2.0 * std::numbers::pi * gen.uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
}

std::string LevyMeasureSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "d=" << d_;
    if (form_ == Form::discrete) {
        os << " atoms=" << atoms_.size();
        for (const LevyAtom& a : atoms_) os << " (" << a.h[0] << "," << a.h[1] << ";" << a.mass << ")";
    } else {
        os << (radial_ == Radial::exponential ? " exponential scale=" : " power scale=") << scale_
           << (radial_ == Radial::exponential ? " rate=" : " index=") << shape_ << " eps=" << eps_ << " R=" << R_;
    }
    os << " total_mass=" << total_mass_;
    return os.str();
}

SigmaSpec SigmaSpec::zero() {
    SigmaSpec s;
    s.name = "zero";
    s.amplitude = [](double) { return 0.0; };
    s.mark_factor = [](const Point&) { return 0.0; };
    s.J = [](const Point&) { return 0.0; };
    s.lip = 1.0;
    return s;
}

SigmaSpec SigmaSpec::linear(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("sigma.coefficient must be positive");
    SigmaSpec s;
    s.name = "linear";
    s.amplitude = [](double u) { return u; };
    s.mark_factor = [c](const Point& h) { return c * norm(h); };
    s.J = [](const Point& h) { return norm(h); };
    s.J_bar = s.J;
    s.lip = c;
    s.L = c;
    return s;
}

SigmaSpec SigmaSpec::bounded(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("sigma.coefficient must be positive");
    SigmaSpec s;
    s.name = "bounded";
    s.amplitude = [](double u) { return std::sin(u); };
    s.mark_factor = [c](const Point& h) { return c * norm(h); };
    s.J = [](const Point& h) { return norm(h); };
    s.lip = c;
    return s;
}

SigmaSpec SigmaSpec::power(double c, double rho) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("sigma.coefficient must be positive");
    if (!(rho > 1.0) || !std::isfinite(rho)) throw DomainError("sigma.exponent must exceed 1");
    SigmaSpec s;
    s.kind = Kind::power_growth;
    s.name = "power";
    s.amplitude = [rho](double u) { return std::copysign(std::pow(std::fabs(u), rho), u); };
    s.mark_factor = [c](const Point& h) { return c * norm(h); };
    s.J = [](const Point& h) { return norm(h); };
    s.J_bar = s.J;
    s.lip = kInf;
    s.L = c;
    s.growth_exponent = rho;
    return s;
}

std::string ConditionReport::summary() const {
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "K2=%.17g\nK1=%.17g\nkappa2=%.17g\nkappa1=%.17g\nkappa1_lebesgue=%.17g\n"
                  "small_jump_second_moment=%.17g\nvanishes_at_zero=%d\nlipschitz_holds=%d\nlower_bound_holds=%d\n"
                  "compensated_existence=%d\nnoncompensated_existence=%d\nlinear_lower_bound=%d\n"
                  "superlinear_growth=%d\nnoncompensated_lower_bound=%d\nnoncompensated_lower_bound_lebesgue=%d\n",
                  K2, K1, kappa2, kappa1, kappa1_lebesgue, small_jump_second_moment, vanishes_at_zero,
                  lipschitz_holds, lower_bound_holds, compensated_existence, noncompensated_existence,
                  linear_lower_bound, superlinear_growth, noncompensated_lower_bound,
                  noncompensated_lower_bound_lebesgue);
    return buf;
}

ConditionReport validate_conditions(const SigmaSpec& sigma, const LevyMeasureSpec& mu) {
    if (!sigma.amplitude || !sigma.mark_factor) throw DomainError("sigma: evaluation rule missing");
    ConditionReport r;
    auto checked_integral = [&](const std::function<double(const Point&)>& f, const char* what) {
        return mu.integrate([&](const Point& h) {
            const double v = f(h);
            if (!std::isfinite(v)) throw DomainError(std::string("sigma.") + what + " is undefined at a mark");
            return v;
        });
    };
    if (sigma.J) {
        r.K2 = checked_integral([&](const Point& h) { const double j = sigma.J(h); return j * j; }, "J");
        r.K1 = checked_integral(sigma.J, "J");
    } else {
        r.K2 = r.K1 = kNaN;
    }
    if (sigma.J_bar) {
        r.kappa2 = checked_integral([&](const Point& h) { const double j = sigma.J_bar(h); return j * j; }, "J_bar");
        r.kappa1 = checked_integral(sigma.J_bar, "J_bar");
        r.kappa1_lebesgue = mu.integrate_lebesgue(sigma.J_bar);
    } else {
        r.kappa2 = r.kappa1 = r.kappa1_lebesgue = kNaN;
    }
    r.small_jump_second_moment = mu.small_jump_second_moment();

    // Marks to probe: the atoms, or a geometric radial sample of the shell.
    std::vector<Point> marks;
    if (mu.form() == LevyMeasureSpec::Form::discrete) {
        for (const LevyAtom& a : mu.atoms()) marks.push_back(a.h);
    } else {
        for (int i = 0; i <= 8; ++i) {
            const double rad = mu.eps() * std::pow(mu.R() / mu.eps(), i / 8.0);
            if (mu.d() == 1) {
                marks.push_back({rad, 0.0});
                marks.push_back({-rad, 0.0});
            } else {
                for (int j = 0; j < 4; ++j) {
                    const double phi = 0.5 * std::numbers::pi * j + 0.3;
                    marks.push_back({rad * std::cos(phi), rad * std::sin(phi)});
                }
            }
        }
    }
    const double us[] = {-4.0, -1.5, -0.3, 0.0, 0.2, 0.7, 1.0, 3.0};
    r.vanishes_at_zero = true;
    r.lipschitz_holds = std::isfinite(sigma.lip) && bool(sigma.J);
    r.lower_bound_holds = bool(sigma.J_bar);
    for (const Point& h : marks) {
        if (sigma(0.0, h) != 0.0) r.vanishes_at_zero = false;
        for (double x : us) {
            const double sx = sigma(x, h);
            if (r.lipschitz_holds) {
                for (double y : us) {
                    const double bound = sigma.J(h) * sigma.lip * std::fabs(x - y);
                    if (std::fabs(sx - sigma(y, h)) > bound * (1.0 + 1e-12) + 1e-300) r.lipschitz_holds = false;
                }
            }
            if (r.lower_bound_holds) {
                const double floor = sigma.L * sigma.J_bar(h) * std::pow(std::fabs(x), sigma.growth_exponent);
                if (std::fabs(sx) < floor * (1.0 - 1e-12)) r.lower_bound_holds = false;
            }
        }
    }
    const bool lipschitz = r.vanishes_at_zero && r.lipschitz_holds;
    r.compensated_existence = lipschitz && std::isfinite(r.K2);
    r.noncompensated_existence = lipschitz && std::isfinite(r.K1);
    const bool linear = sigma.growth_exponent == 1.0;
    r.linear_lower_bound = r.lower_bound_holds && linear && r.kappa2 > 0.0;
    r.superlinear_growth = r.lower_bound_holds && sigma.growth_exponent > 1.0 && r.kappa2 > 0.0;
    r.noncompensated_lower_bound = r.lower_bound_holds && linear && r.kappa1 > 0.0;
    r.noncompensated_lower_bound_lebesgue = r.lower_bound_holds && linear && r.kappa1_lebesgue > 0.0;
    return r;
}

NoiseRealization sample_noise(const GridSpec& grid, const LevyMeasureSpec& mu, std::uint64_t seed,
                              std::uint64_t stream, bool require_positive) {
    grid.validate();
    if (grid.d != mu.d()) throw BindingError("sample_noise: mu.d does not match grid.d");
    if (require_positive && !(mu.total_mass() > 0.0)) {
        throw DomainError("sample_noise: positive intensity requested but mu has zero mass");
    }
    NoiseRealization out;
    out.grid = grid;
    out.seed = seed;
    out.stream = stream;
    const double mean = grid.T * grid.box_volume() * mu.total_mass();
    if (!(mean > 0.0)) return out;
    rng::Philox gen(seed, stream);
    std::poisson_distribution<long long> count(mean);
    const long long n_atoms = count(gen);
    out.atoms.reserve(std::size_t(n_atoms));
    const double a = grid.half_width;
    for (long long i = 0; i < n_atoms; ++i) {
        NoiseAtom atom;
        atom.s = grid.T * gen.uniform();
        atom.y[0] = -a + 2.0 * a * gen.uniform();
        if (grid.d == 2) atom.y[1] = -a + 2.0 * a * gen.uniform();
        atom.h = mu.sample_mark(gen);
        out.atoms.push_back(atom);
    }
    std::stable_sort(out.atoms.begin(), out.atoms.end(),
                     [](const NoiseAtom& x, const NoiseAtom& y) { return x.s < y.s; });
    return out;
}

int atom_step(const GridSpec& grid, double s) noexcept {
    const int m = int(std::ceil(s / grid.dt()));
    return std::clamp(m, 1, grid.nt);
}

namespace {

std::size_t lag_index(const GridSpec& g, std::size_t i, std::size_t j) {
    const std::size_t n = std::size_t(g.n);
    if (g.d == 1) return (i + n - j) % n;
    const std::size_t a = (i / n + n - j / n) % n;
    const std::size_t b = (i % n + n - j % n) % n;
    return a * n + b;
}

double compensator_rate(const SigmaSpec& sigma, const LevyMeasureSpec& mu) {
    return mu.integrate(sigma.mark_factor);
}

/// Subtracts scale * int w_j(y) amplitude(u~(y)) dy from out[j], where w_j is
/// the multilinear hat of node j and u~ the interpolated field: the mean of the
/// atom deposits given u. Two Gauss points per axis and cell, exact for linear sigma.
void subtract_compensator(const GridSpec& g, const SigmaSpec& sigma, std::span<const double> u, double scale,
                          double* out) {
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    const std::size_t n = std::size_t(g.n);
    const double w = scale * g.cell_volume() / (g.d == 1 ? 2.0 : 4.0);
    if (g.d == 1) {
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t c1 = (c + 1) % n;
            for (double f : gp) {
                const double a = sigma.amplitude((1.0 - f) * u[c] + f * u[c1]);
                out[c] -= w * (1.0 - f) * a;
                out[c1] -= w * f * a;
            }
        }
        return;
    }
    for (std::size_t c0 = 0; c0 < n; ++c0) {
        for (std::size_t c1 = 0; c1 < n; ++c1) {
            const std::size_t idx[4] = {c0 * n + c1, c0 * n + (c1 + 1) % n, ((c0 + 1) % n) * n + c1,
                                        ((c0 + 1) % n) * n + (c1 + 1) % n};
            for (double f0 : gp) {
                for (double f1 : gp) {
                    const double wt[4] = {(1.0 - f0) * (1.0 - f1), (1.0 - f0) * f1, f0 * (1.0 - f1), f0 * f1};
                    double v = 0.0;
                    for (int q = 0; q < 4; ++q) v += wt[q] * u[idx[q]];
                    const double a = sigma.amplitude(v);
                    for (int q = 0; q < 4; ++q) out[idx[q]] -= w * wt[q] * a;
                }
            }
        }
    }
}

}  // namespace

double stochastic_convolution(const kernels::GreenTable& table, const NoiseRealization& noise, FieldHistory history,
                              const SigmaSpec& sigma, const LevyMeasureSpec& mu, bool compensated, int k,
                              std::size_t i) {
    table.require_grid(noise.grid, "stochastic_convolution");
    const GridSpec& g = table.grid();
    if (k < 0 || k > g.nt) throw DomainError("stochastic_convolution: time index out of range");
    if (history.size() < std::size_t(k)) throw DomainError("stochastic_convolution: history does not reach t_k");
    if (i >= g.points()) throw DomainError("stochastic_convolution: node index out of range");
    const Point x = g.point(i);
    double sum = 0.0;
    for (const NoiseAtom& atom : noise.atoms) {
        const int m = atom_step(g, atom.s);
        if (m > k) break;
        const double u = g.interpolate(history[std::size_t(m - 1)], atom.y);
        const double lag[2] = {x[0] - atom.y[0], x[1] - atom.y[1]};
        sum += table.value(k - m, std::span<const double>(lag, std::size_t(g.d))) * sigma(u, atom.h);
    }
    if (compensated && k > 0) {
        const double rate = compensator_rate(sigma, mu) * g.dt();
        std::vector<double> source(g.points());
        for (int m = 1; m <= k; ++m) {
            const auto G = table.slice(k - m);
            std::fill(source.begin(), source.end(), 0.0);
            subtract_compensator(g, sigma, history[std::size_t(m - 1)], rate, source.data());
            for (std::size_t j = 0; j < g.points(); ++j) sum += G[lag_index(g, i, j)] * source[j];
        }
    }
    return sum;
}

struct ConvolutionField::Impl {
    const kernels::GreenTable& table;
    const SigmaSpec& sigma;
    bool compensated;
    detail::LatticeFft fft;
    std::vector<std::vector<const NoiseAtom*>> by_step;
    std::vector<std::vector<std::complex<double>>> sources;
    std::vector<bool> empty;
    double rate = 0.0;
    int added = 0;

    Impl(const kernels::GreenTable& t, const NoiseRealization& noise, const SigmaSpec& s, const LevyMeasureSpec& mu,
         bool comp)
        : table(t), sigma(s), compensated(comp), fft(t.grid().d, t.grid().n) {
        const GridSpec& g = t.grid();
        by_step.resize(std::size_t(g.nt + 1));
        for (const NoiseAtom& a : noise.atoms) by_step[std::size_t(atom_step(g, a.s))].push_back(&a);
        sources.assign(std::size_t(g.nt + 1), {});
        empty.assign(std::size_t(g.nt + 1), true);
        if (compensated) rate = compensator_rate(s, mu) * g.dt();
    }
};

ConvolutionField::ConvolutionField(const kernels::GreenTable& table, const NoiseRealization& noise,
                                   const SigmaSpec& sigma, const LevyMeasureSpec& mu, bool compensated) {
    table.require_grid(noise.grid, "ConvolutionField");
    if (!sigma.amplitude || !sigma.mark_factor) throw DomainError("sigma: evaluation rule missing");
    impl_ = std::make_unique<Impl>(table, noise, sigma, mu, compensated);
}

ConvolutionField::~ConvolutionField() = default;

void ConvolutionField::reset() {
    for (auto& s : impl_->sources) s.clear();
    std::fill(impl_->empty.begin(), impl_->empty.end(), true);
    impl_->added = 0;
}

void ConvolutionField::add_step(int m, std::span<const double> u_prev) {
    Impl& I = *impl_;
    const GridSpec& g = I.table.grid();
    if (m != I.added + 1 || m > g.nt) throw DomainError("ConvolutionField: steps must be added in order 1..nt");
    if (u_prev.size() != g.points()) throw BindingError("ConvolutionField: field size does not match the grid");
    I.added = m;
    const auto& atoms = I.by_step[std::size_t(m)];
    if (atoms.empty() && !(I.compensated && I.rate != 0.0)) return;

    double* real = I.fft.real();
    std::fill(real, real + g.points(), 0.0);
    for (const NoiseAtom* a : atoms) {
        const double w = I.sigma(g.interpolate(u_prev, a->y), a->h);
        const CellWeights cw = g.cell_weights(a->y);
        for (int c = 0; c < cw.count; ++c) real[cw.index[c]] += cw.weight[c] * w;
    }
    if (I.compensated && I.rate != 0.0) subtract_compensator(g, I.sigma, u_prev, I.rate, real);
    I.fft.forward();
    I.sources[std::size_t(m)].assign(I.fft.spectrum(), I.fft.spectrum() + I.fft.spectral_size());
    I.empty[std::size_t(m)] = false;
}

void ConvolutionField::evaluate(int k, std::span<double> out) {
    Impl& I = *impl_;
    const GridSpec& g = I.table.grid();
    if (k < 0 || k > I.added) throw DomainError("ConvolutionField: step not added yet");
    if (out.size() != g.points()) throw BindingError("ConvolutionField: output size does not match the grid");
    std::complex<double>* spec = I.fft.spectrum();
    const std::size_t ns = I.fft.spectral_size();
    std::fill(spec, spec + ns, std::complex<double>(0.0, 0.0));
    bool any = false;
    for (int m = 1; m <= k; ++m) {
        if (I.empty[std::size_t(m)]) continue;
        any = true;
        const auto S = I.table.symbol(k - m);
        const auto& D = I.sources[std::size_t(m)];
        for (std::size_t q = 0; q < ns; ++q) spec[q] += S[q] * D[q];
    }
    if (!any) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    I.fft.backward();
    // Lattice convolution sum_j G(x_i - y_j) D_j; the symbol is h^d times the DFT of G.
    const double scale = 1.0 / (double(g.points()) * g.cell_volume());
    const double* real = I.fft.real();
    for (std::size_t j = 0; j < g.points(); ++j) out[j] = real[j] * scale;
}

IsometryReport isometry_check(const Integrand& X, const GridSpec& domain, const LevyMeasureSpec& mu,
                              std::size_t replicas, std::uint64_t seed) {
    domain.validate();
    if (replicas < 2) throw DomainError("isometry_check: at least two replicas are needed");
    const double a = domain.half_width;
    const quad::Tolerance tol{1e-9, 1e-300};

    // Nested quadrature over s, x and h.
    auto space_integral = [&](const std::function<double(const Point&)>& fx) {
        if (domain.d == 1) {
            return quad::gauss_kronrod([&](double x0) { return fx({x0, 0.0}); }, -a, a, tol, "isometry_check");
        }
        return quad::gauss_kronrod(
            [&](double x0) {
                return quad::gauss_kronrod([&](double x1) { return fx({x0, x1}); }, -a, a, tol, "isometry_check");
            },
            -a, a, tol, "isometry_check");
    };
    auto triple = [&](int power) {
        return quad::gauss_kronrod(
            [&](double s) {
                return space_integral([&](const Point& x) {
                    return mu.integrate([&](const Point& h) {
                        const double v = X(s, x, h);
                        return power == 1 ? v : v * v;
                    });
                });
            },
            0.0, domain.T, tol, "isometry_check");
    };
    const double q1 = triple(1);
    const double q2 = triple(2);

    std::vector<double> raw(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        const NoiseRealization noise = sample_noise(domain, mu, seed, r);
        double sum = 0.0;
        for (const NoiseAtom& atom : noise.atoms) sum += X(atom.s, atom.y, atom.h);
        raw[r] = sum;
    });

    auto mean_and_se = [&](auto value) {
        double mean = 0.0;
        for (std::size_t r = 0; r < replicas; ++r) mean += value(r);
        mean /= double(replicas);
        double ss = 0.0;
        for (std::size_t r = 0; r < replicas; ++r) {
            const double dv = value(r) - mean;
            ss += dv * dv;
        }
        return std::pair<double, double>{mean, std::sqrt(ss / double(replicas - 1) / double(replicas))};
    };
    auto verdict = [](MomentCheck& c) {
        const double gap = std::fabs(c.mc - c.quadrature);
        c.pass = c.std_error > 0.0 ? gap <= 3.0 * c.std_error : gap <= 1e-12 * std::max(1.0, std::fabs(c.quadrature));
    };

    IsometryReport rep;
    rep.replicas = replicas;
    auto [m1, se1] = mean_and_se([&](std::size_t r) { return raw[r]; });
    rep.first = {m1, se1, q1, false};
    verdict(rep.first);
    auto [m2, se2] = mean_and_se([&](std::size_t r) {
        const double c = raw[r] - q1;
        return c * c;
    });
    rep.second = {m2, se2, q2, false};
    verdict(rep.second);
    return rep;
}

}  // namespace fracspde::noise
