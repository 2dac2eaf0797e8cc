#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracspde/cli.hpp"
#include "fracspde/config.hpp"
#include "fracspde/errors.hpp"

using namespace fracspde;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
        rows.push_back(row);
    }
    return rows;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("fracspde_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

const char* kSmall = R"([model]
alpha = 2
beta = 1
[grid]
half_width = 8
n = 32
T = 1
nt = 8
[truncation]
nyquist_symbol = 1
tail_mass = 1
[run]
seed = 5
replicas = 50
)";

}  // namespace

TEST_CASE("minimal document gets the documented defaults") {
    const auto c = config::parse_config("[model]\nalpha = 1.5\nbeta = 0.5\n\n[grid]\nn = 128\n");
    CHECK(c.model.alpha == 1.5);
    CHECK(c.model.beta == 0.5);
    CHECK(c.model.nu == 1.0);
    CHECK(c.grid.n == 128);
    CHECK(c.grid.half_width == 8.0);
    CHECK(c.grid.nt == 32);
    CHECK(c.sigma.kind == "linear");
    CHECK(c.mu.kind == "point");
    CHECK(c.noise.kind == solver::NoiseKind::compensated);
    CHECK(c.run.seed == 1);
    CHECK(c.run.replicas == 1000);
    CHECK(c.truncation.nyquist_symbol == 1e-8);
    CHECK_FALSE(c.moments.window_start.has_value());
    CHECK(config::parse_config("") == config::ExperimentConfig{});
}

TEST_CASE("validation names the failing key") {
    try {
        config::parse_config("[model]\nalpha = 3\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.key() == "model.alpha");
        CHECK(std::string(e.what()).find("(0, 2]") != std::string::npos);
    }
    auto key_of = [](const std::string& text) {
        try {
            config::parse_config(text);
        } catch (const ValidationError& e) {
            return e.key();
        }
        return std::string("none");
    };
    CHECK(key_of("[model]\nbogus = 1\n") == "model.bogus");
    CHECK(key_of("[nosuch]\nx = 1\n") == "nosuch");
    CHECK(key_of("[grid]\nn = 48\n") == "grid.n");
    CHECK(key_of("[grid]\nn = abc\n") == "grid.n");
    CHECK(key_of("[model]\nalpha = 1\nbeta = 1\n") == "model.d");
    CHECK(key_of("[sigma]\nkind = cubic\n") == "sigma.kind");
    CHECK(key_of("[mu]\neps = 1\nR = 0.5\n") == "mu.R");
    CHECK(key_of("[noise]\nkind = white\n") == "noise.kind");
    CHECK(key_of("[noise]\noverride_conditions = maybe\n") == "noise.override_conditions");
    CHECK(key_of("[ml]\nz_max = 1\n") == "ml.z_max");
    CHECK(key_of("[moments]\nwindow_start = 0.8\nwindow_end = 0.5\n") == "moments.window_end");
    CHECK(key_of("[blowup]\ntheta = 1\n") == "blowup.theta");
    CHECK(key_of("[run]\nseed = -1\n") == "run.seed");
}

TEST_CASE("malformed text reports the line") {
    try {
        config::parse_config("[model]\nalpha = 2\n[grid\nn = 32\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(config::parse_config("[model]\nalpha = 2\nalpha = 1.5\n"), ParseError);
    CHECK_THROWS_AS(config::parse_config("[model]\njunk line\n"), ParseError);
}

TEST_CASE("serialize and parse round-trip") {
    auto c = config::parse_config(kSmall);
    c.model.beta = 0.9;
    c.model.nu = 0.1 + 0.2;
    c.sigma.kind = "bounded";
    c.mu.kind = "exponential";
    c.mu.rate = 1.0 / 3.0;
    c.noise.kind = solver::NoiseKind::noncompensated;
    c.noise.override_conditions = true;
    c.kernel.times = {0.1, 0.7, 3.0};
    c.moments.window_start = 0.25;
    c.run.seed = 18446744073709551615ULL;
    const std::string text = config::serialize_config(c);
    const auto back = config::parse_config(text);
    CHECK(back == c);
    CHECK(config::serialize_config(back) == text);
    CHECK(text.find("window_end") == std::string::npos);
}

TEST_CASE("factories follow the config") {
    auto c = config::parse_config("[mu]\nkind = power\nindex = 0.5\neps = 0.2\nR = 4\n[sigma]\nkind = power\n");
    CHECK(config::make_mu(c).form() == noise::LevyMeasureSpec::Form::density);
    CHECK(config::make_sigma(c).kind == noise::SigmaSpec::Kind::power_growth);
    c.initial.kind = "sine";
    const auto u0 = config::make_initial(c);
    CHECK(u0.size() == c.grid.points());
    CHECK(u0[std::size_t(c.grid.n / 2)] == doctest::Approx(1.0));  // x = 0
    CHECK(u0[std::size_t(3 * c.grid.n / 4)] == doctest::Approx(1.5));  // x = half_width / 2
}

TEST_CASE("command names") {
    for (const char* name : {"kernel", "ml", "density", "isometry", "simulate", "moments", "bounds", "upsilon",
                             "blowup"}) {
        const auto cmd = cli::parse_command(name);
        REQUIRE(cmd.has_value());
        CHECK(std::string(cli::to_string(*cmd)) == name);
    }
    CHECK_FALSE(cli::parse_command("plot").has_value());
    CHECK(cli::format_number(0.1) == "0.10000000000000001");
    CHECK(cli::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("ml with beta = 1 reproduces exp") {
    const fs::path dir = scratch("ml");
    std::ostringstream log, err;
    const std::string text = std::string(kSmall) + "[ml]\nbeta = 1\nz_min = -20\npoints = 201\n";
    REQUIRE(cli::run(cli::Command::ml, text, {}, dir, log, err) == 0);
    std::string header;
    const auto rows = read_csv(dir / "ml.csv", &header);
    CHECK(header == "z,E_beta");
    CHECK(rows.size() == 201);
    for (const auto& r : rows) CHECK(std::fabs(r[1] - std::exp(r[0])) <= 1e-10);
    for (const char* f : {"manifest.json", "plot.gp", "summary.txt"}) CHECK(fs::exists(dir / f));
}

TEST_CASE("kernel for the classical case matches the heat kernel") {
    const fs::path dir = scratch("kernel");
    std::ostringstream log, err;
    REQUIRE(cli::run(cli::Command::kernel, kSmall, {}, dir, log, err) == 0);
    std::string header;
    const auto rows = read_csv(dir / "kernel.csv", &header);
    CHECK(header == "t,x,G_subordination,G_spectral,abs_diff");
    CHECK(rows.size() == 2 * 101);
    for (const auto& r : rows) {
        const double g = std::exp(-r[1] * r[1] / (4.0 * r[0])) / std::sqrt(4.0 * M_PI * r[0]);
        CHECK(std::fabs(r[2] - g) <= 1e-6);
        CHECK(std::fabs(r[3] - g) <= 1e-6);
    }
}

TEST_CASE("runs are byte-reproducible and rerunnable from the manifest") {
    for (auto cmd : {cli::Command::simulate, cli::Command::moments, cli::Command::isometry}) {
        const fs::path a = scratch(std::string("rep_a_") + cli::to_string(cmd));
        const fs::path b = scratch(std::string("rep_b_") + cli::to_string(cmd));
        const fs::path c = scratch(std::string("rep_c_") + cli::to_string(cmd));
        std::ostringstream log, err;
        REQUIRE(cli::run(cmd, kSmall, {}, a, log, err) == 0);
        REQUIRE(cli::run(cmd, kSmall, {}, b, log, err) == 0);
        REQUIRE(cli::rerun(a / "manifest.json", c, log, err) == 0);
        for (const auto& entry : fs::directory_iterator(a)) {
            if (entry.path().extension() != ".csv") continue;
            const auto name = entry.path().filename();
            CHECK(slurp(a / name) == slurp(b / name));
            CHECK(slurp(a / name) == slurp(c / name));
        }
    }
}

TEST_CASE("overrides change the recorded seed") {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    std::ostringstream log, err;
    REQUIRE(cli::run(cli::Command::simulate, kSmall, {}, a, log, err) == 0);
    REQUIRE(cli::run(cli::Command::simulate, kSmall, {std::uint64_t(6), std::nullopt}, b, log, err) == 0);
    CHECK(slurp(a / "simulate.csv") != slurp(b / "simulate.csv"));
    CHECK(slurp(b / "manifest.json").find("\"seed\": 6") != std::string::npos);
}

TEST_CASE("exit statuses") {
    std::ostringstream log, err;
    CHECK(cli::run(cli::Command::ml, "[model]\nalpha = 3\n", {}, scratch("e1"), log, err) == 1);
    CHECK(err.str().find("model.alpha") != std::string::npos);
    CHECK(cli::run(cli::Command::ml, "[model\n", {}, scratch("e2"), log, err) == 1);
    // Strict default truncation on a coarse grid.
    CHECK(cli::run(cli::Command::simulate, "[grid]\nn = 16\n", {}, scratch("e3"), log, err) == 1);
    // Superlinear sigma without the override.
    const std::string power = std::string(kSmall) + "[sigma]\nkind = power\n";
    CHECK(cli::run(cli::Command::simulate, power, {}, scratch("e4"), log, err) == 1);
    // With the override a large jump explodes the path: numerical failure.
    const std::string blow = std::string(kSmall) +
                             "[sigma]\nkind = power\n[mu]\nh = 3\nmass = 4\n"
                             "[noise]\nkind = noncompensated\noverride_conditions = true\nexplosion_guard = 1e6\n";
    int status = 0;
    for (std::uint64_t seed = 1; seed <= 5 && status == 0; ++seed) {
        status = cli::run(cli::Command::simulate, blow, {seed, std::nullopt}, scratch("e5"), log, err);
    }
    CHECK(status == 2);
    // d >= alpha makes upsilon diverge.
    CHECK(cli::run(cli::Command::upsilon, "[model]\nalpha = 1\nbeta = 0.5\n", {}, scratch("e6"), log, err) == 2);
}

TEST_CASE("executable front end") {
    const char* exe = std::getenv("FRACSPDE_CLI");
    if (!exe) {
        MESSAGE("FRACSPDE_CLI not set; skipping");
        return;
    }
    const fs::path dir = scratch("exe");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "run.ini") << kSmall;
    }
    const std::string base = std::string(exe) + " ";
    auto status = [](const std::string& cmd) {
        const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(status(base + "blowup --config " + (dir / "run.ini").string() + " --out " + (dir / "a").string()) == 0);
    CHECK(fs::exists(dir / "a" / "blowup.csv"));
    CHECK(status(base + "simulate --config " + (dir / "run.ini").string() + " --out " + (dir / "b").string() +
                 " --seed 9 --replicas 3") == 0);
    CHECK(status(base + "rerun --manifest " + (dir / "b" / "manifest.json").string() + " --out " +
                 (dir / "c").string()) == 0);
    CHECK(slurp(dir / "b" / "simulate.csv") == slurp(dir / "c" / "simulate.csv"));
    CHECK(status(base + "ml --config " + (dir / "missing.ini").string()) == 1);
    CHECK(status(base + "nosuch") == 1);
}
