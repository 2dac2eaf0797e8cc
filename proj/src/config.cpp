#include "fracspde/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "fracspde/errors.hpp"

namespace fracspde::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ValidationError(key, "expected a number, got '" + t + "'");
    }
    return v;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ValidationError(key, "expected an integer, got '" + t + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ValidationError(key, "expected true or false, got '" + t + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) throw ValidationError(key, "expected a comma-separated list of numbers");
    return out;
}

std::string from_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
    /// Empty optional: the key is omitted from the serialized form.
    std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

using Registry = std::map<std::string, std::map<std::string, Field>>;

template <class T>
Field number(T ExperimentConfig::*group, double T::*member) {
    return {[=](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*group.*member = to_double(k, v); },
            [=](const ExperimentConfig& c) { return std::optional<std::string>(format_double(c.*group.*member)); }};
}

template <class T>
Field integer(T ExperimentConfig::*group, int T::*member) {
    return {[=](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*group.*member = to_integer<int>(k, v); },
            [=](const ExperimentConfig& c) { return std::optional<std::string>(std::to_string(c.*group.*member)); }};
}

template <class T>
Field text(T ExperimentConfig::*group, std::string T::*member) {
    return {[=](ExperimentConfig& c, const std::string&, const std::string& v) { c.*group.*member = trim(v); },
            [=](const ExperimentConfig& c) { return std::optional<std::string>(c.*group.*member); }};
}

template <class T>
Field optional_number(T ExperimentConfig::*group, std::optional<double> T::*member) {
    return {[=](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*group.*member = to_double(k, v); },
            [=](const ExperimentConfig& c) -> std::optional<std::string> {
                const auto& o = c.*group.*member;
                if (!o) return std::nullopt;
                return format_double(*o);
            }};
}

const Registry& registry() {
    static const Registry reg = [] {
        using C = ExperimentConfig;
        Registry r;
        r["model"]["alpha"] = number(&C::model, &kernels::ModelParams::alpha);
        r["model"]["beta"] = number(&C::model, &kernels::ModelParams::beta);
        r["model"]["nu"] = number(&C::model, &kernels::ModelParams::nu);
        r["model"]["d"] = integer(&C::model, &kernels::ModelParams::d);

        r["grid"]["half_width"] = number(&C::grid, &GridSpec::half_width);
        r["grid"]["n"] = integer(&C::grid, &GridSpec::n);
        r["grid"]["T"] = number(&C::grid, &GridSpec::T);
        r["grid"]["nt"] = integer(&C::grid, &GridSpec::nt);

        r["truncation"]["nyquist_symbol"] = number(&C::truncation, &kernels::TruncationPolicy::nyquist_symbol);
        r["truncation"]["tail_mass"] = number(&C::truncation, &kernels::TruncationPolicy::tail_mass);

        r["sigma"]["kind"] = text(&C::sigma, &SigmaConfig::kind);
        r["sigma"]["coefficient"] = number(&C::sigma, &SigmaConfig::coefficient);
        r["sigma"]["exponent"] = number(&C::sigma, &SigmaConfig::exponent);

        r["mu"]["kind"] = text(&C::mu, &MuConfig::kind);
        r["mu"]["h"] = number(&C::mu, &MuConfig::h);
        r["mu"]["h2"] = number(&C::mu, &MuConfig::h2);
        r["mu"]["mass"] = number(&C::mu, &MuConfig::mass);
        r["mu"]["scale"] = number(&C::mu, &MuConfig::scale);
        r["mu"]["rate"] = number(&C::mu, &MuConfig::rate);
        r["mu"]["index"] = number(&C::mu, &MuConfig::index);
        r["mu"]["eps"] = number(&C::mu, &MuConfig::eps);
        r["mu"]["R"] = number(&C::mu, &MuConfig::R);

        r["noise"]["kind"] = {
            [](C& c, const std::string& k, const std::string& v) {
                const std::string t = trim(v);
                if (t == "compensated") c.noise.kind = solver::NoiseKind::compensated;
                else if (t == "noncompensated") c.noise.kind = solver::NoiseKind::noncompensated;
                else throw ValidationError(k, "expected compensated or noncompensated, got '" + t + "'");
            },
            [](const C& c) { return std::optional<std::string>(solver::to_string(c.noise.kind)); }};
        r["noise"]["override_conditions"] = {
            [](C& c, const std::string& k, const std::string& v) { c.noise.override_conditions = to_bool(k, v); },
            [](const C& c) { return std::optional<std::string>(c.noise.override_conditions ? "true" : "false"); }};
        r["noise"]["explosion_guard"] = number(&C::noise, &NoiseConfig::explosion_guard);

        r["initial"]["kind"] = text(&C::initial, &InitialConfig::kind);
        r["initial"]["value"] = number(&C::initial, &InitialConfig::value);
        r["initial"]["amplitude"] = number(&C::initial, &InitialConfig::amplitude);

        r["run"]["seed"] = {
            [](C& c, const std::string& k, const std::string& v) { c.run.seed = to_integer<std::uint64_t>(k, v); },
            [](const C& c) { return std::optional<std::string>(std::to_string(c.run.seed)); }};
        r["run"]["replicas"] = {
            [](C& c, const std::string& k, const std::string& v) { c.run.replicas = to_integer<std::uint64_t>(k, v); },
            [](const C& c) { return std::optional<std::string>(std::to_string(c.run.replicas)); }};

        r["kernel"]["times"] = {
            [](C& c, const std::string& k, const std::string& v) { c.kernel.times = to_list(k, v); },
            [](const C& c) { return std::optional<std::string>(from_list(c.kernel.times)); }};
        r["kernel"]["x_max"] = number(&C::kernel, &KernelConfig::x_max);
        r["kernel"]["points"] = integer(&C::kernel, &KernelConfig::points);

        r["ml"]["beta"] = number(&C::ml, &MlConfig::beta);
        r["ml"]["z_min"] = number(&C::ml, &MlConfig::z_min);
        r["ml"]["z_max"] = number(&C::ml, &MlConfig::z_max);
        r["ml"]["points"] = integer(&C::ml, &MlConfig::points);

        r["density"]["beta"] = number(&C::density, &DensityConfig::beta);
        r["density"]["t"] = number(&C::density, &DensityConfig::t);
        r["density"]["x_max"] = number(&C::density, &DensityConfig::x_max);
        r["density"]["points"] = integer(&C::density, &DensityConfig::points);

        r["isometry"]["integrand"] = text(&C::isometry, &IsometryConfig::integrand);
        r["isometry"]["c"] = number(&C::isometry, &IsometryConfig::c);

        r["moments"]["window_start"] = optional_number(&C::moments, &MomentsConfig::window_start);
        r["moments"]["window_end"] = optional_number(&C::moments, &MomentsConfig::window_end);

        r["bounds"]["target"] = number(&C::bounds, &BoundsConfig::target);
        r["bounds"]["growth_exponent"] = number(&C::bounds, &BoundsConfig::growth_exponent);
        r["bounds"]["eta"] = number(&C::bounds, &BoundsConfig::eta);
        r["bounds"]["renewal_points"] = integer(&C::bounds, &BoundsConfig::renewal_points);

        r["upsilon"]["gamma_min"] = number(&C::upsilon, &UpsilonConfig::gamma_min);
        r["upsilon"]["gamma_max"] = number(&C::upsilon, &UpsilonConfig::gamma_max);
        r["upsilon"]["points"] = integer(&C::upsilon, &UpsilonConfig::points);

        r["blowup"]["C"] = number(&C::blowup, &BlowupConfig::C);
        r["blowup"]["D"] = number(&C::blowup, &BlowupConfig::D);
        r["blowup"]["gamma_exp"] = number(&C::blowup, &BlowupConfig::gamma_exp);
        r["blowup"]["theta"] = number(&C::blowup, &BlowupConfig::theta);
        r["blowup"]["T"] = number(&C::blowup, &BlowupConfig::T);
        r["blowup"]["points"] = integer(&C::blowup, &BlowupConfig::points);
        return r;
    }();
    return reg;
}

const char* const kSectionOrder[] = {"model", "grid",  "truncation", "sigma",    "mu",      "noise",
                                     "initial", "run", "kernel",     "ml",       "density", "isometry",
                                     "moments", "bounds", "upsilon", "blowup"};

void check(bool ok, const char* key, const std::string& what) {
    if (!ok) throw ValidationError(key, what);
}

bool finite_positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return model == o.model && grid == o.grid && truncation.nyquist_symbol == o.truncation.nyquist_symbol &&
           truncation.tail_mass == o.truncation.tail_mass && sigma == o.sigma && mu == o.mu && noise == o.noise &&
           initial == o.initial && run == o.run && kernel == o.kernel && ml == o.ml && density == o.density &&
           isometry == o.isometry && moments == o.moments && bounds == o.bounds && upsilon == o.upsilon &&
           blowup == o.blowup;
}

ExperimentConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(int(e.line()), e.message());
    }
    ExperimentConfig cfg;
    const Registry& reg = registry();
    for (const auto& [section, body] : tree) {
        const auto sec = reg.find(section);
        if (body.empty()) throw ValidationError(section, "key outside any section");
        if (sec == reg.end()) throw ValidationError(section, "unknown section");
        for (const auto& [key, value] : body) {
            const std::string path = section + "." + key;
            const auto field = sec->second.find(key);
            if (field == sec->second.end()) throw ValidationError(path, "unknown key");
            field->second.set(cfg, path, value.data());
        }
    }
    cfg.grid.d = cfg.model.d;
    validate_config(cfg);
    return cfg;
}

std::string serialize_config(const ExperimentConfig& config) {
    const Registry& reg = registry();
    std::string out;
    for (const char* section : kSectionOrder) {
        std::string body;
        for (const auto& [key, field] : reg.at(section)) {
            if (const auto v = field.get(config)) body += key + " = " + *v + "\n";
        }
        if (body.empty()) continue;
        if (!out.empty()) out += "\n";
        out += "[" + std::string(section) + "]\n" + body;
    }
    return out;
}

void validate_config(const ExperimentConfig& c) {
    check(c.model.alpha > 0.0 && c.model.alpha <= 2.0, "model.alpha", "must lie in (0, 2]");
    check(c.model.beta > 0.0 && c.model.beta <= 1.0, "model.beta", "must lie in (0, 1]");
    check(finite_positive(c.model.nu), "model.nu", "must be positive");
    check(c.model.d == 1 || c.model.d == 2, "model.d", "must be 1 or 2");
    check(c.model.d < std::min(2.0, 1.0 / c.model.beta) * c.model.alpha, "model.d",
          "requires d < min(2, 1/beta) alpha");
    check(c.grid.d == c.model.d, "grid.d", "must equal model.d");
    check(finite_positive(c.grid.half_width), "grid.half_width", "must be positive");
    check(c.grid.n >= 2 && c.grid.n <= 4096 && (c.grid.n & (c.grid.n - 1)) == 0, "grid.n",
          "must be a power of two in [2, 4096]");
    check(finite_positive(c.grid.T), "grid.T", "must be positive");
    check(c.grid.nt >= 1 && c.grid.nt <= 100000, "grid.nt", "must lie in [1, 100000]");
    check(finite_positive(c.truncation.nyquist_symbol), "truncation.nyquist_symbol", "must be positive");
    check(finite_positive(c.truncation.tail_mass), "truncation.tail_mass", "must be positive");

    const std::set<std::string> sigmas{"zero", "linear", "bounded", "power"};
    check(sigmas.count(c.sigma.kind) > 0, "sigma.kind", "must be one of zero, linear, bounded, power");
    check(finite_positive(c.sigma.coefficient), "sigma.coefficient", "must be positive");
    check(c.sigma.exponent > 1.0 && std::isfinite(c.sigma.exponent), "sigma.exponent", "must exceed 1");

    const std::set<std::string> mus{"none", "point", "exponential", "power"};
    check(mus.count(c.mu.kind) > 0, "mu.kind", "must be one of none, point, exponential, power");
    check(std::isfinite(c.mu.h) && std::isfinite(c.mu.h2), "mu.h", "must be finite");
    check(finite_positive(c.mu.mass), "mu.mass", "must be positive");
    check(finite_positive(c.mu.scale), "mu.scale", "must be positive");
    check(finite_positive(c.mu.rate), "mu.rate", "must be positive");
    check(c.mu.index < 2.0 && std::isfinite(c.mu.index), "mu.index", "must be below 2");
    check(finite_positive(c.mu.eps), "mu.eps", "must be positive");
    check(c.mu.R > c.mu.eps && std::isfinite(c.mu.R), "mu.R", "must exceed mu.eps");

    check(finite_positive(c.noise.explosion_guard), "noise.explosion_guard", "must be positive");
    const std::set<std::string> initials{"constant", "sine", "bump"};
    check(initials.count(c.initial.kind) > 0, "initial.kind", "must be one of constant, sine, bump");
    check(std::isfinite(c.initial.value), "initial.value", "must be finite");
    check(std::isfinite(c.initial.amplitude), "initial.amplitude", "must be finite");
    check(c.run.replicas >= 1, "run.replicas", "must be at least 1");

    for (double t : c.kernel.times) check(finite_positive(t), "kernel.times", "must be positive");
    check(finite_positive(c.kernel.x_max), "kernel.x_max", "must be positive");
    check(c.kernel.points >= 2, "kernel.points", "must be at least 2");
    check(c.ml.beta > 0.0 && c.ml.beta <= 1.0, "ml.beta", "must lie in (0, 1]");
    check(c.ml.z_max <= 0.0, "ml.z_max", "must be nonpositive");
    check(c.ml.z_min < c.ml.z_max && std::isfinite(c.ml.z_min), "ml.z_min", "must be finite and below ml.z_max");
    check(c.ml.points >= 2, "ml.points", "must be at least 2");
    check(c.density.beta > 0.0 && c.density.beta < 1.0, "density.beta", "must lie in (0, 1)");
    check(finite_positive(c.density.t), "density.t", "must be positive");
    check(finite_positive(c.density.x_max), "density.x_max", "must be positive");
    check(c.density.points >= 2, "density.points", "must be at least 2");
    check(c.isometry.integrand == "constant" || c.isometry.integrand == "time_mark", "isometry.integrand",
          "must be constant or time_mark");
    check(std::isfinite(c.isometry.c), "isometry.c", "must be finite");
    if (c.moments.window_start) {
        check(*c.moments.window_start >= 0.0 && *c.moments.window_start < c.grid.T, "moments.window_start",
              "must lie in [0, grid.T)");
    }
    if (c.moments.window_end) {
        const double start = c.moments.window_start.value_or(0.5 * c.grid.T);
        check(*c.moments.window_end > start && *c.moments.window_end <= c.grid.T, "moments.window_end",
              "must lie in (window_start, grid.T]");
    }
    check(c.bounds.target > 0.0 && c.bounds.target < 1.0, "bounds.target", "must lie in (0, 1)");
    check(c.bounds.growth_exponent > 1.0 && std::isfinite(c.bounds.growth_exponent), "bounds.growth_exponent",
          "must exceed 1");
    check(finite_positive(c.bounds.eta), "bounds.eta", "must be positive");
    check(c.bounds.renewal_points >= 2, "bounds.renewal_points", "must be at least 2");
    check(finite_positive(c.upsilon.gamma_min), "upsilon.gamma_min", "must be positive");
    check(c.upsilon.gamma_max > c.upsilon.gamma_min && std::isfinite(c.upsilon.gamma_max), "upsilon.gamma_max",
          "must exceed upsilon.gamma_min");
    check(c.upsilon.points >= 2, "upsilon.points", "must be at least 2");
    check(finite_positive(c.blowup.C), "blowup.C", "must be positive");
    check(c.blowup.D >= 0.0 && std::isfinite(c.blowup.D), "blowup.D", "must be nonnegative");
    check(finite_positive(c.blowup.gamma_exp), "blowup.gamma_exp", "must be positive");
    check(c.blowup.theta >= 0.0 && c.blowup.theta < 1.0, "blowup.theta", "must lie in [0, 1)");
    check(finite_positive(c.blowup.T), "blowup.T", "must be positive");
    check(c.blowup.points >= 2, "blowup.points", "must be at least 2");
}

noise::SigmaSpec make_sigma(const ExperimentConfig& c) {
    const std::string& k = c.sigma.kind;
    if (k == "zero") return noise::SigmaSpec::zero();
    if (k == "linear") return noise::SigmaSpec::linear(c.sigma.coefficient);
    if (k == "bounded") return noise::SigmaSpec::bounded(c.sigma.coefficient);
    return noise::SigmaSpec::power(c.sigma.coefficient, c.sigma.exponent);
}

noise::LevyMeasureSpec make_mu(const ExperimentConfig& c) {
    const int d = c.model.d;
    const std::string& k = c.mu.kind;
    if (k == "none") return noise::LevyMeasureSpec::none(d);
    if (k == "point") return noise::LevyMeasureSpec::point(d, {c.mu.h, d == 2 ? c.mu.h2 : 0.0}, c.mu.mass);
    if (k == "exponential") return noise::LevyMeasureSpec::exponential(d, c.mu.scale, c.mu.rate, c.mu.eps, c.mu.R);
    return noise::LevyMeasureSpec::power(d, c.mu.scale, c.mu.index, c.mu.eps, c.mu.R);
}

std::vector<double> make_initial(const ExperimentConfig& c) {
    const GridSpec& g = c.grid;
    std::vector<double> u(g.points());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point x = g.point(i);
        double v = c.initial.value;
        if (c.initial.kind == "sine") {
            v += c.initial.amplitude * std::sin(std::numbers::pi * x[0] / g.half_width);
        } else if (c.initial.kind == "bump") {
            v += c.initial.amplitude * std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1]));
        }
        u[i] = v;
    }
    return u;
}

}  // namespace fracspde::config
