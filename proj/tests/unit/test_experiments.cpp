#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bolab/errors.hpp"
#include "bolab/experiments.hpp"
#include "bolab/moments.hpp"
#include "bolab/transform.hpp"
#include "support.hpp"

using namespace bolab;
using bolab::testing::pi;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("bolab_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("config parses dotted keys, comments and auto") {
    const ExperimentConfig c = parse_config(
        "# reference run\n"
        "scenario = tstar\n"
        "grid.n=4096\n"
        "grid.length=200   # half domain\n"
        "data.amplitude=0.5\n"
        "time.dt=0.004\n"
        "time.t_end=auto\n"
        "nonlinearity.k=1\n"
        "calibration.times=0.5,1,2\n"
        "seed=7\n");
    CHECK(c.scenario == Scenario::tstar);
    CHECK(c.grid.n == 4096);
    CHECK(c.grid.length == 200.0);
    CHECK(c.data.amplitude == 0.5);
    CHECK(c.time.dt == 0.004);
    CHECK_FALSE(c.time.t_end.has_value());
    CHECK(c.nonlinearity_k == 1);
    CHECK(c.calibration_times == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(c.seed == 7);
}

TEST_CASE("config rejects unknown, duplicate, empty and malformed entries") {
    CHECK_THROWS_AS(parse_config("grid.size=10\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.n=64\ngrid.n=128\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.n=\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.n 64\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.n=64x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.length=abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scenario=soliton\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed=-1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/bolab.cfg"), ConfigError);
}

TEST_CASE("config echo round-trips through the parser") {
    ExperimentConfig c;
    c.scenario = Scenario::pairdiff;
    c.data.shift = 2.5;
    c.time.t_end = 3.25;
    c.pairdiff_caps = {5.0, 7.5};
    c.twotime_reference_scale = 1.0 / 3.0;
    std::string text;
    for (const auto& [k, v] : config_echo(c))
        if (!v.empty()) text += k + "=" + v + "\n";  // unset strings are omitted
    const ExperimentConfig d = parse_config(text);
    CHECK(config_echo(d) == config_echo(c));
    CHECK(d.twotime_reference_scale == c.twotime_reference_scale);
    CHECK(*d.time.t_end == 3.25);
    CHECK(config_keys().size() == config_echo(c).size());
}

TEST_CASE("validation catches out-of-range values") {
    auto bad = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        CHECK_THROWS_AS(validate_config(c), ConfigError);
    };
    bad([](ExperimentConfig& c) { c.grid.n = 15; });
    bad([](ExperimentConfig& c) { c.grid.length = -1.0; });
    bad([](ExperimentConfig& c) { c.data.width = 0.0; });
    bad([](ExperimentConfig& c) { c.data.derivative_order = 3; });
    bad([](ExperimentConfig& c) { c.data.kind = "custom_samples"; });
    bad([](ExperimentConfig& c) { c.time.dt = 0.0; });
    bad([](ExperimentConfig& c) { c.time.snapshots = 1; });
    bad([](ExperimentConfig& c) { c.calibration_times = {0.0}; });
    ExperimentConfig ok;
    CHECK_NOTHROW(validate_config(ok));
}

TEST_CASE("canonical data has the closed-form scalars") {
    const Grid g = make_grid(8192, 400.0);
    for (double A : {1.0, 0.5, 2.0}) {
        const Field u = gaussian_derivative_data(g, A, 1.0, 0.0, 1);
        const double l2 = l2_norm(u);
        CHECK(std::abs(integrate(u)) < 1e-14);
        CHECK(std::abs(moment_quadrature(u, 1, 200.0) + A * std::sqrt(pi)) < 1e-10);
        CHECK(std::abs(l2 * l2 - A * A * std::sqrt(pi / 2)) < 1e-10 * A * A);
    }
    const Field s = gaussian_derivative_data(g, 1.0, 1.5, 0.0, 1);
    CHECK(moment_quadrature(s, 1, 200.0) == doctest::Approx(-1.5 * std::sqrt(pi)).epsilon(1e-12));
    const Field v = gaussian_derivative_data(g, 1.0, 1.0, 0.0, 2);
    const double lv = l2_norm(v);
    CHECK(std::abs(moment_quadrature(v, 1, 200.0)) < 1e-13);
    CHECK(lv * lv == doctest::Approx(3.0 * std::sqrt(pi / 2)).epsilon(1e-12));
}

TEST_CASE("translation leaves the first momentum of mean-zero data unchanged") {
    const Grid g = make_grid(8192, 400.0);
    const double m0 = moment_quadrature(gaussian_derivative_data(g, 1.0, 1.0, 0.0), 1, 200.0);
    for (double a : {-7.0, 0.3, 12.5})
        CHECK(std::abs(moment_quadrature(gaussian_derivative_data(g, 1.0, 1.0, a), 1, 200.0) - m0) < 1e-12);
}

TEST_CASE("data reaching the boundary is rejected") {
    const Grid g = make_grid(1024, 40.0);
    CHECK_THROWS_AS(gaussian_derivative_data(g, 1.0, 6.0, 0.0), ContaminationError);
    CHECK_THROWS_AS(gaussian_derivative_data(g, 1.0, 1.0, 19.0), ContaminationError);
    CHECK_THROWS_AS(gaussian_derivative_data(g, 1.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("direct transform agrees with the FFT on grid frequencies") {
    const Grid g = make_grid(1024, 60.0);
    const Field u = gaussian_derivative_data(g, 1.0, 1.0, 0.7);
    const Spectrum s = forward(u);
    for (int k : {-100, -3, 0, 1, 17, 250}) CHECK(std::abs(direct_transform(u, g.xi(k)) - s.at(k)) < 1e-12);
}

TEST_CASE("windowed power is x^p in the middle and zero near the edges") {
    const Grid g = make_grid(1000, 100.0);
    const Field a = windowed_power(g, 2);
    for (int j = 0; j < g.n(); ++j) {
        const double x = g.x(j);
        if (std::abs(x) <= 35.0) CHECK(a[j] == doctest::Approx(x * x));
        if (std::abs(x) >= 45.0) CHECK(a[j] == 0.0);
    }
}

TEST_CASE("scenario preconditions are checked before any evolution") {
    ExperimentConfig c;
    c.grid.n = 1024;
    c.grid.length = 200.0;
    c.output_dir = scratch("pre").string();
    c.data.derivative_order = 2;
    CHECK_THROWS_AS(run_tstar(c), ConfigError);           // mu1 = 0
    c.data.derivative_order = 1;
    CHECK_THROWS_AS(run_twotime(c), ConfigError);         // mu1 != 0
    c.data.shift = 0.0;
    CHECK_THROWS_AS(run_pairdiff(c), ConfigError);        // identical pair
}

TEST_CASE("momentum run writes schema-stable, deterministic outputs") {
    ExperimentConfig c;
    c.grid.n = 2048;
    c.grid.length = 200.0;
    c.time.dt = 0.01;
    c.time.t_end = 1.0;
    c.output_dir = scratch("det_a").string();
    const RunManifest a = run_momentum(c);
    c.output_dir = scratch("det_b").string();
    const RunManifest b = run_momentum(c);
    for (const std::string f : {"invariants.csv", "jump.csv", "momentum.csv"}) {
        const auto fa = std::filesystem::path(a.config.output_dir) / f;
        const auto fb = std::filesystem::path(b.config.output_dir) / f;
        REQUIRE(std::filesystem::exists(fa));
        CHECK(read_file(fa) == read_file(fb));
    }
    CHECK(read_file(std::filesystem::path(a.config.output_dir) / "invariants.csv").rfind(
              "t,i1,l2,momentum,hamiltonian,boundary_ratio\n", 0) == 0);
    CHECK(read_file(std::filesystem::path(a.config.output_dir) / "jump.csv").rfind(
              "t,J_measured,J_model,imag_residual\n", 0) == 0);
    const auto j = nlohmann::json::parse(read_file(std::filesystem::path(a.config.output_dir) / "manifest.json"));
    CHECK(j["schema"] == "bolab.run_manifest/1");
    for (const char* key : {"config", "code_version", "grid", "step", "derived", "gates", "wall_seconds", "exit_code"})
        CHECK(j.contains(key));
    CHECK(j["derived"]["tstar"].get<double>() == doctest::Approx(4.0 * std::sqrt(2.0)));
    CHECK(j["gates"].size() == a.gates.size());
    CHECK(exit_code(a) == (a.all_passed() ? 0 : 5));
    CHECK(a.gate("mass_drift").passed);
    CHECK_THROWS_AS(a.gate("no_such_gate"), std::out_of_range);
}
