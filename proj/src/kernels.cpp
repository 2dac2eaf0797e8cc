#include "fracspde/kernels.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "fracspde/errors.hpp"
#include "fracspde/quadrature.hpp"
#include "peaked_integral.hpp"

namespace fracspde::kernels {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double radius(const ModelParams& params, std::span<const double> x, const char* op) {
    if (x.size() != std::size_t(params.d)) {
        throw DomainError(std::string(op) + ": point has " + std::to_string(x.size()) + " coordinates, expected " +
                          std::to_string(params.d));
    }
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::sqrt(r2);
}

// Standard symmetric stable density in d = 1 with characteristic function
// exp(-|xi|^alpha), alpha not in {1, 2}, via Nolan's integral
//   p(y) = alpha / (pi |alpha - 1| y) int_0^{pi/2} g e^{-g} dtheta,
//   g = y^{alpha/(alpha-1)} (cos th / sin(alpha th))^{alpha/(alpha-1)} cos((alpha-1) th) / cos th.
double standard_stable_1d(double alpha, double y) {
    if (y == 0.0) return std::tgamma(1.0 + 1.0 / alpha) / kPi;
    const double q = alpha / (alpha - 1.0);
    const double log_y = std::log(y);
    auto log_g = [alpha, q, log_y](double th, double th_comp) {
        const double log_cos = std::log(std::sin(th_comp));
        return q * (log_y + log_cos - std::log(std::sin(alpha * th))) + std::log(std::cos((alpha - 1.0) * th)) -
               log_cos;
    };
    const quad::Estimate integral = detail::integrate_peaked(log_g, 0.5 * kPi, 1e-11);
    const double scale = alpha / (kPi * std::abs(alpha - 1.0) * y);
    return scale * quad::checked(integral, quad::Tolerance{1e-9, 1e-300}, "stable_transition_density");
}

// Standard isotropic stable density in d = 2, symbol exp(-|xi|^alpha), as a
// Gaussian with covariance 2u I mixed over u ~ g_{alpha/2}.
double standard_stable_2d(double alpha, double rho) {
    const specfun::FracOrder half(alpha / 2.0);
    const double rho2 = rho * rho;
    auto f = [&half, rho2](double u) {
        if (u <= 0.0) return 0.0;
        const double gauss = std::exp(-rho2 / (4.0 * u)) / (4.0 * kPi * u);
        return gauss == 0.0 ? 0.0 : gauss * specfun::stable_density(half, u);
    };
    return quad::half_line(f, 0.0, quad::Tolerance{1e-9, 1e-300}, "stable_transition_density");
}

double standard_stable(int d, double alpha, double y) {
    if (d == 1) {
        if (alpha == 2.0) return std::exp(-0.25 * y * y) / (2.0 * std::sqrt(kPi));
        if (alpha == 1.0) return 1.0 / (kPi * (1.0 + y * y));
        return standard_stable_1d(alpha, y);
    }
    if (alpha == 2.0) return std::exp(-0.25 * y * y) / (4.0 * kPi);
    if (alpha == 1.0) return 1.0 / (2.0 * kPi * std::pow(1.0 + y * y, 1.5));
    return standard_stable_2d(alpha, y);
}

// Radial Fourier inversion of a radial symbol A(|eta|):
//   d = 1: (1/pi) int_0^inf cos(eta y) A(eta) d eta
//   d = 2: (1/(2 pi)) int_0^inf J0(eta y) A(eta) eta d eta
template <class Amplitude>
double radial_inverse(int d, double y, Amplitude&& amp, const char* what) {
    const quad::Tolerance tol{1e-9, 1e-12};
    if (d == 1) {
        if (y == 0.0) return quad::half_line(amp, 0.0, tol, what) / kPi;
        auto f = [&amp, y](double eta) { return std::cos(eta * y) * amp(eta); };
        auto breaks = [y](int k) { return (k - 0.5) * kPi / y; };
        return quad::oscillatory(f, breaks, tol, what) / kPi;
    }
    if (y == 0.0) {
        auto f = [&amp](double eta) { return eta * amp(eta); };
        return quad::half_line(f, 0.0, tol, what) / (2.0 * kPi);
    }
    auto f = [&amp, y](double eta) { return boost::math::cyl_bessel_j(0, eta * y) * eta * amp(eta); };
    auto breaks = [y](int k) { return boost::math::cyl_bessel_j_zero(0.0, k) / y; };
    return quad::oscillatory(f, breaks, tol, what) / (2.0 * kPi);
}

// G diverges at the origin when beta < 1 and d >= alpha.
bool singular_at_origin(const ModelParams& p) { return p.beta < 1.0 && p.d >= p.alpha; }

// Largest s (a power of two) beyond which the density of E_1 is negligible.
double clock_upper_limit(const specfun::FracOrder& order) {
    double s = 1.0;
    while (s * specfun::inv_subordinator_density(order, 1.0, s) > 1e-18) s *= 2.0;
    return s;
}

double green_subordination(const ModelParams& p, double t, double r) {
    if (p.beta == 1.0) return stable_transition_density_radial(p, t, r);
    if (r == 0.0 && singular_at_origin(p)) return kInf;
    // E_t = t^beta E_1 in law, so G = int p_{t^beta s}(r) f_{E_1}(s) ds.
    const specfun::FracOrder order(p.beta);
    const double tb = std::pow(t, p.beta);
    auto f_s = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double weight = specfun::inv_subordinator_density(order, 1.0, s);
        return weight == 0.0 ? 0.0 : weight * stable_transition_density_radial(p, tb * s, r);
    };
    auto f_w = [&](double w) {
        const double s = std::exp(w);
        return f_s(s) * s;
    };
    constexpr double kRel = 1e-8;
    quad::Estimate total;
    if (r > 0.0) {
        // Below s_mid, p_{t^beta s}(r) is in its tail regime and grows like s.
        // s_mid only places a breakpoint, so clamping it loses nothing.
        const double log_s_mid = std::clamp(p.alpha * std::log(r) - std::log(p.nu * tb), -700.0, 0.0);
        total += quad::gauss_kronrod_estimate(f_s, 0.0, std::exp(log_s_mid), kRel);
        // Between s_mid and 1 the integrand may be flat in log s over many decades.
        if (log_s_mid < 0.0) total += quad::gauss_kronrod_estimate(f_w, log_s_mid, 0.0, kRel);
    } else {
        // p_{t^beta s}(0) ~ s^{-d/alpha}, integrable since d < alpha here.
        total += quad::tanh_sinh_estimate(f_s, 0.0, 1.0, kRel);
    }
    total += quad::gauss_kronrod_estimate(f_w, 0.0, std::log(clock_upper_limit(order)), kRel);
    return quad::checked(total, quad::Tolerance{1e-7, 1e-300}, "green_function(subordination)");
}

double green_spectral(const ModelParams& p, double t, double r) {
    if (r == 0.0 && singular_at_origin(p)) return kInf;
    const double c = std::pow(p.nu * std::pow(t, p.beta), 1.0 / p.alpha);
    const specfun::FracOrder order(p.beta);
    const double alpha = p.alpha;
    auto amp = [&order, alpha](double eta) { return specfun::mittag_leffler(order, -std::pow(eta, alpha)); };
    return radial_inverse(p.d, r / c, amp, "green_function(spectral)") / std::pow(c, p.d);
}

void require_positive_time(double t, const char* op) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(op) + ": time must be positive");
}

}  // namespace

void ModelParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("model.alpha must lie in (0, 2]");
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("model.beta must lie in (0, 1]");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("model.nu must be positive");
    if (d != 1 && d != 2) throw DomainError("model.d must be 1 or 2");
    if (!(d < std::min(2.0, 1.0 / beta) * alpha)) {
        throw DomainError("model: requires d < min(2, 1/beta) * alpha");
    }
}

double stable_transition_density_radial(const ModelParams& params, double s, double r) {
    require_positive_time(s, "stable_transition_density");
    const double c = std::pow(params.nu * s, 1.0 / params.alpha);
    r = std::abs(r);
    if (c == 0.0) return r > 0.0 ? 0.0 : kInf;
    if (!std::isfinite(c)) return 0.0;
    const double y = r / c;
    if (!std::isfinite(y)) return 0.0;
    const double value = standard_stable(params.d, params.alpha, y);
    return value == 0.0 ? 0.0 : value / std::pow(c, params.d);
}

double stable_transition_density(const ModelParams& params, double s, std::span<const double> x) {
    return stable_transition_density_radial(params, s, radius(params, x, "stable_transition_density"));
}

double stable_transition_density_fourier(const ModelParams& params, double s, double r) {
    require_positive_time(s, "stable_transition_density_fourier");
    const double c = std::pow(params.nu * s, 1.0 / params.alpha);
    const double alpha = params.alpha;
    auto amp = [alpha](double eta) { return std::exp(-std::pow(eta, alpha)); };
    return radial_inverse(params.d, std::abs(r) / c, amp, "stable_transition_density_fourier") / std::pow(c, params.d);
}

double green_function_radial(const ModelParams& params, double t, double r, GreenMethod method) {
    require_positive_time(t, "green_function");
    r = std::abs(r);
    return method == GreenMethod::subordination ? green_subordination(params, t, r) : green_spectral(params, t, r);
}

double green_function(const ModelParams& params, double t, std::span<const double> x, GreenMethod method) {
    return green_function_radial(params, t, radius(params, x, "green_function"), method);
}

double green_l2_norm(const ModelParams& params, double t) {
    params.validate();
    require_positive_time(t, "green_l2_norm");
    // Integrate in units of the kernel width c. Near r = 0, G^2 is at worst
    // log^2(r), which the double-exponential rule absorbs.
    const double c = std::pow(params.nu * std::pow(t, params.beta), 1.0 / params.alpha);
    const int d = params.d;
    auto f = [&](double y) {
        if (y <= 0.0) return 0.0;
        const double g = green_subordination(params, t, c * y);
        const double shell = d == 1 ? 2.0 : 2.0 * kPi * y;
        return shell * g * g * std::pow(c, d);
    };
    return quad::half_line(f, 0.0, quad::Tolerance{1e-6, 0.0}, "green_l2_norm");
}

double c_star(const ModelParams& params) {
    params.validate();
    const double d = params.d;
    const double a = params.alpha;
    if (!(d / a < 2.0)) throw DivergenceError("c_star: the z-integral diverges for d / alpha >= 2");
    double integral;
    if (params.beta == 1.0) {
        integral = std::tgamma(d / a) * std::pow(2.0, -d / a);
    } else {
        const specfun::FracOrder order(params.beta);
        auto f = [&order, d, a](double z) {
            if (z <= 0.0) return 0.0;
            const double e = specfun::mittag_leffler(order, -z);
            return std::pow(z, d / a - 1.0) * e * e;
        };
        integral = quad::half_line(f, 0.0, quad::Tolerance{1e-9, 0.0}, "c_star");
    }
    const double prefactor =
        std::pow(params.nu, -d / a) * 2.0 * std::pow(kPi, d / 2.0) / (a * std::tgamma(d / 2.0)) * std::pow(2.0 * kPi, -d);
    return prefactor * integral;
}

TruncationReport truncation_report(const ModelParams& params, const GridSpec& grid) {
    params.validate();
    grid.validate();
    TruncationReport rep;
    const specfun::FracOrder order(params.beta);
    const double nyquist = kPi / grid.h();
    rep.nyquist_symbol =
        specfun::mittag_leffler(order, -params.nu * std::pow(nyquist, params.alpha) * std::pow(grid.dt(), params.beta));

    // Mass of G_T outside the box, by a union bound over the d coordinate
    // marginals (each a one-dimensional stable law with the same nu).
    const double a = grid.half_width;
    double one_axis;
    if (params.alpha == 2.0) {
        auto exceed = [&](double s) { return std::erfc(a / (2.0 * std::sqrt(params.nu * s))); };
        if (params.beta == 1.0) {
            one_axis = exceed(grid.T);
        } else {
            const double tb = std::pow(grid.T, params.beta);
            auto f = [&](double s) {
                if (s <= 0.0) return 0.0;
                return specfun::inv_subordinator_density(order, 1.0, s) * exceed(tb * s);
            };
            one_axis = quad::half_line(f, 0.0, quad::Tolerance{1e-6, 1e-300}, "truncation_report");
        }
    } else {
        // P(|X_s| > a) ~ (2/pi) Gamma(alpha) sin(pi alpha/2) nu s a^{-alpha}, and E[E_T] = T^beta / Gamma(1+beta).
        const double mean_clock = std::pow(grid.T, params.beta) / std::tgamma(1.0 + params.beta);
        one_axis = 2.0 / kPi * std::tgamma(params.alpha) * std::sin(kPi * params.alpha / 2.0) * params.nu *
                   mean_clock * std::pow(a, -params.alpha);
    }
    rep.tail_mass = std::min(1.0, params.d * one_axis);
    return rep;
}

std::span<const double> GreenTable::slice(int k) const {
    if (k < 0 || k > grid_.nt) throw DomainError("GreenTable::slice: index out of range");
    return {values_.data() + std::size_t(k) * real_size_, real_size_};
}

std::span<const double> GreenTable::symbol(int k) const {
    if (k < 0 || k > grid_.nt) throw DomainError("GreenTable::symbol: index out of range");
    return {symbols_.data() + std::size_t(k) * spectral_size_, spectral_size_};
}

double GreenTable::value(int k, std::span<const double> lag) const {
    if (lag.size() != std::size_t(grid_.d)) throw DomainError("GreenTable::value: lag has wrong dimension");
    const auto v = slice(k);
    const int n = grid_.n;
    const double h = grid_.h();
    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int a = 0; a < grid_.d; ++a) {
        const double pos = lag[a] / h;
        const double fl = std::floor(pos);
        frac[a] = pos - fl;
        base[a] = static_cast<int>(((static_cast<long long>(fl) % n) + n) % n);
    }
    if (grid_.d == 1) {
        return (1.0 - frac[0]) * v[base[0]] + frac[0] * v[(base[0] + 1) % n];
    }
    const int i0 = base[0], i1 = (base[0] + 1) % n;
    const int j0 = base[1], j1 = (base[1] + 1) % n;
    const auto at = [&](int i, int j) { return v[std::size_t(i) * n + j]; };
    return (1.0 - frac[0]) * ((1.0 - frac[1]) * at(i0, j0) + frac[1] * at(i0, j1)) +
           frac[0] * ((1.0 - frac[1]) * at(i1, j0) + frac[1] * at(i1, j1));
}

void GreenTable::require_grid(const GridSpec& other, const char* what) const {
    if (!(other == grid_)) {
        throw BindingError(std::string(what) + ": grid " + other.describe() + " does not match the table grid " +
                           grid_.describe());
    }
}

GreenTable build_green_table(const ModelParams& params, const GridSpec& grid, const TruncationPolicy& policy) {
    auto sci = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return std::string(buf);
    };
    params.validate();
    grid.validate();
    if (grid.d != params.d) throw DomainError("grid.d must equal model.d");

    GreenTable table(params, grid);
    table.report_ = truncation_report(params, grid);
    if (table.report_.nyquist_symbol > policy.nyquist_symbol) {
        throw ResolutionError("nyquist_symbol", "grid.n",
                              "symbol at the Nyquist frequency is " + sci(table.report_.nyquist_symbol) +
                                  " at t = dt, above the threshold " + sci(policy.nyquist_symbol) +
                                  "; refine grid.n, coarsen grid.nt, or relax truncation.nyquist_symbol");
    }
    if (table.report_.tail_mass > policy.tail_mass) {
        throw ResolutionError("tail_mass", "grid.half_width",
                              "estimated kernel mass outside the box is " + sci(table.report_.tail_mass) +
                                  " at t = T, above the threshold " + sci(policy.tail_mass) +
                                  "; increase grid.half_width or relax truncation.tail_mass");
    }

    const int n = grid.n;
    const int d = grid.d;
    detail::LatticeFft fft(d, n);
    table.real_size_ = fft.real_size();
    table.spectral_size_ = fft.spectral_size();
    table.values_.assign(table.real_size_ * std::size_t(grid.nt + 1), 0.0);
    table.symbols_.assign(table.spectral_size_ * std::size_t(grid.nt + 1), 0.0);

    // |xi|^2 = (pi / a)^2 m with integer m; cache E_beta per distinct m.
    const int half = n / 2;
    std::vector<int> m_of(table.spectral_size_);
    for (std::size_t idx = 0; idx < table.spectral_size_; ++idx) {
        if (d == 1) {
            const int j = static_cast<int>(idx);
            m_of[idx] = j * j;
        } else {
            const int row = static_cast<int>(idx / (half + 1));
            const int col = static_cast<int>(idx % (half + 1));
            const int f0 = row < half ? row : row - n;
            m_of[idx] = f0 * f0 + col * col;
        }
    }
    const int m_max = *std::max_element(m_of.begin(), m_of.end());
    const double step = kPi / grid.half_width;
    const specfun::FracOrder order(params.beta);
    const double inv_volume = 1.0 / grid.box_volume();
    std::vector<double> by_m(std::size_t(m_max) + 1);
    std::vector<char> used(std::size_t(m_max) + 1, 0);
    for (int m : m_of) used[m] = 1;

    for (int k = 0; k <= grid.nt; ++k) {
        double* sym = table.symbols_.data() + std::size_t(k) * table.spectral_size_;
        if (k == 0) {
            std::fill(sym, sym + table.spectral_size_, 1.0);
        } else {
            const double tb = std::pow(grid.time(k), params.beta);
            for (int m = 0; m <= m_max; ++m) {
                if (!used[m]) continue;
                const double xi_alpha = std::pow(step * std::sqrt(double(m)), params.alpha);
                by_m[m] = m == 0 ? 1.0 : specfun::mittag_leffler(order, -params.nu * xi_alpha * tb);
            }
            for (std::size_t idx = 0; idx < table.spectral_size_; ++idx) sym[idx] = by_m[m_of[idx]];
        }
        for (std::size_t idx = 0; idx < table.spectral_size_; ++idx) fft.spectrum()[idx] = {sym[idx], 0.0};
        fft.backward();
        double* out = table.values_.data() + std::size_t(k) * table.real_size_;
        // The symbol is even, so the kernel is; remove roundoff asymmetry.
        for (std::size_t i = 0; i < table.real_size_; ++i) {
            std::size_t mirror;
            if (d == 1) {
                mirror = (n - i) % n;
            } else {
                const std::size_t r = i / n, c = i % n;
                mirror = ((n - r) % n) * n + (n - c) % n;
            }
            if (mirror < i) continue;
            const double v = 0.5 * (fft.real()[i] + fft.real()[mirror]) * inv_volume;
            out[i] = v;
            out[mirror] = v;
        }
    }
    return table;
}

}  // namespace fracspde::kernels
