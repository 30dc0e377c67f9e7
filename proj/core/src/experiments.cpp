#include "bolab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bolab/errors.hpp"
#include "bolab/weights.hpp"

#ifndef BOLAB_VERSION
#define BOLAB_VERSION "0.0.0"
#endif

namespace bolab {

namespace {

const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
    static const std::vector<std::pair<Scenario, std::string>> names{
        {Scenario::momentum, "momentum"},
        {Scenario::tstar, "tstar"},
        {Scenario::linear_compare, "linear_compare"},
        {Scenario::pairdiff, "pairdiff"},
        {Scenario::twotime, "twotime"},
        {Scenario::convergence, "convergence"},
        {Scenario::commutator_suite, "commutator_suite"},
        {Scenario::eterm_table, "eterm_table"},
    };
    return names;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out))
        throw ConfigError("config: '" + key + "' expects a real number, got '" + v + "'");
    return out;
}

long long parse_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    const long long x = parse_integer(key, v);
    if (x < -2147483647LL || x > 2147483647LL) throw ConfigError("config: '" + key + "' out of range");
    return static_cast<int>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma-separated list");
    return out;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

struct KeyHandler {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeyHandler>& key_table() {
    using C = ExperimentConfig;
    using S = std::string;
    static const std::vector<KeyHandler> table{
        {"scenario", [](C& c, const S& v) { c.scenario = parse_scenario(v); },
         [](const C& c) { return to_string(c.scenario); }},
        {"grid.n", [](C& c, const S& v) { c.grid.n = parse_int("grid.n", v); },
         [](const C& c) { return std::to_string(c.grid.n); }},
        {"grid.length", [](C& c, const S& v) { c.grid.length = parse_double("grid.length", v); },
         [](const C& c) { return fmt(c.grid.length); }},
        {"data.kind", [](C& c, const S& v) { c.data.kind = v; }, [](const C& c) { return c.data.kind; }},
        {"data.amplitude", [](C& c, const S& v) { c.data.amplitude = parse_double("data.amplitude", v); },
         [](const C& c) { return fmt(c.data.amplitude); }},
        {"data.width", [](C& c, const S& v) { c.data.width = parse_double("data.width", v); },
         [](const C& c) { return fmt(c.data.width); }},
        {"data.shift", [](C& c, const S& v) { c.data.shift = parse_double("data.shift", v); },
         [](const C& c) { return fmt(c.data.shift); }},
        {"data.derivative_order",
         [](C& c, const S& v) { c.data.derivative_order = parse_int("data.derivative_order", v); },
         [](const C& c) { return std::to_string(c.data.derivative_order); }},
        {"data.samples_file", [](C& c, const S& v) { c.data.samples_file = v; },
         [](const C& c) { return c.data.samples_file; }},
        {"time.dt", [](C& c, const S& v) { c.time.dt = parse_double("time.dt", v); },
         [](const C& c) { return fmt(c.time.dt); }},
        {"time.t_end", [](C& c, const S& v) { c.time.t_end = parse_double("time.t_end", v); },
         [](const C& c) { return c.time.t_end ? fmt(*c.time.t_end) : std::string("auto"); }},
        {"time.snapshots", [](C& c, const S& v) { c.time.snapshots = parse_int("time.snapshots", v); },
         [](const C& c) { return std::to_string(c.time.snapshots); }},
        {"time.record_stride",
         [](C& c, const S& v) { c.time.record_stride = parse_int("time.record_stride", v); },
         [](const C& c) { return std::to_string(c.time.record_stride); }},
        {"nonlinearity.k", [](C& c, const S& v) { c.nonlinearity_k = parse_int("nonlinearity.k", v); },
         [](const C& c) { return std::to_string(c.nonlinearity_k); }},
        {"output_dir", [](C& c, const S& v) { c.output_dir = v; }, [](const C& c) { return c.output_dir; }},
        {"seed",
         [](C& c, const S& v) {
             std::uint64_t s = 0;
             const auto* end = v.data() + v.size();
             const auto res = std::from_chars(v.data(), end, s);
             if (res.ec != std::errc{} || res.ptr != end)
                 throw ConfigError("config: 'seed' expects a non-negative 64-bit integer, got '" + v + "'");
             c.seed = s;
         },
         [](const C& c) { return std::to_string(c.seed); }},
        {"guard.evolution_limit",
         [](C& c, const S& v) { c.evolution_contamination_limit = parse_double("guard.evolution_limit", v); },
         [](const C& c) { return fmt(c.evolution_contamination_limit); }},
        {"calibration.times", [](C& c, const S& v) { c.calibration_times = parse_list("calibration.times", v); },
         [](const C& c) { return fmt_list(c.calibration_times); }},
        {"pairdiff.caps", [](C& c, const S& v) { c.pairdiff_caps = parse_list("pairdiff.caps", v); },
         [](const C& c) { return fmt_list(c.pairdiff_caps); }},
        {"twotime.reference_scale",
         [](C& c, const S& v) { c.twotime_reference_scale = parse_double("twotime.reference_scale", v); },
         [](const C& c) { return fmt(c.twotime_reference_scale); }},
        {"convergence.dt", [](C& c, const S& v) { c.convergence_dt = parse_double("convergence.dt", v); },
         [](const C& c) { return fmt(c.convergence_dt); }},
        {"convergence.t_end",
         [](C& c, const S& v) { c.convergence_t_end = parse_double("convergence.t_end", v); },
         [](const C& c) { return fmt(c.convergence_t_end); }},
        {"commutator.pairs", [](C& c, const S& v) { c.commutator_pairs = parse_int("commutator.pairs", v); },
         [](const C& c) { return std::to_string(c.commutator_pairs); }},
        {"eterm.times", [](C& c, const S& v) { c.eterm_times = parse_list("eterm.times", v); },
         [](const C& c) { return fmt_list(c.eterm_times); }},
    };
    return table;
}

} // namespace

std::string to_string(Scenario s) {
    for (const auto& [v, name] : scenario_names())
        if (v == s) return name;
    return "unknown";
}

Scenario parse_scenario(const std::string& name) {
    for (const auto& [v, n] : scenario_names())
        if (n == name) return v;
    throw ConfigError("unknown scenario '" + name + "'");
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& h : key_table()) keys.push_back(h.key);
    return keys;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::vector<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError("config: empty value for '" + key + "'");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError("config: duplicate key '" + key + "'");
        const auto& table = key_table();
        const auto it = std::find_if(table.begin(), table.end(), [&](const KeyHandler& h) { return h.key == key; });
        if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
        if (key == "time.t_end" && value == "auto") {
            cfg.time.t_end.reset();
        } else {
            it->set(cfg, value);
        }
        seen.push_back(key);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& h : key_table()) out[h.key] = h.get(cfg);
    return out;
}

void validate_config(const ExperimentConfig& cfg) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("config: " + what);
    };
    require(cfg.grid.n >= 16 && cfg.grid.n % 2 == 0, "grid.n must be even and >= 16");
    require(cfg.grid.length > 0.0, "grid.length must be positive");
    require(cfg.data.kind == "gaussian_derivative" || cfg.data.kind == "custom_samples",
            "data.kind must be gaussian_derivative or custom_samples");
    require(cfg.data.width > 0.0, "data.width must be positive");
    require(cfg.data.derivative_order == 1 || cfg.data.derivative_order == 2, "data.derivative_order must be 1 or 2");
    require(cfg.data.kind != "custom_samples" || !cfg.data.samples_file.empty(),
            "data.samples_file is required for custom_samples");
    require(cfg.time.dt > 0.0, "time.dt must be positive");
    require(cfg.time.snapshots >= 2, "time.snapshots must be >= 2");
    require(cfg.time.record_stride >= 1, "time.record_stride must be >= 1");
    require(cfg.nonlinearity_k >= 0 && cfg.nonlinearity_k <= 4, "nonlinearity.k must be in 0..4");
    require(cfg.evolution_contamination_limit > 0.0, "guard.evolution_limit must be positive");
    require(!cfg.calibration_times.empty(), "calibration.times must not be empty");
    for (double t : cfg.calibration_times) require(t != 0.0, "calibration.times must be nonzero");
    for (double c : cfg.pairdiff_caps) require(c > 0.0, "pairdiff.caps must be positive");
    require(cfg.twotime_reference_scale > 0.0, "twotime.reference_scale must be positive");
    require(cfg.convergence_dt > 0.0, "convergence.dt must be positive");
    require(cfg.convergence_t_end > 0.0, "convergence.t_end must be positive");
    require(cfg.commutator_pairs >= 1, "commutator.pairs must be >= 1");
    require(!cfg.eterm_times.empty(), "eterm.times must not be empty");
    require(!cfg.output_dir.empty(), "output_dir must not be empty");
}

Field gaussian_derivative_data(const Grid& g, double amplitude, double sigma, double shift, int order) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_derivative_data: sigma must be positive");
    if (order != 1 && order != 2) throw std::invalid_argument("gaussian_derivative_data: order must be 1 or 2");
    Field u(g);
    for (int j = 0; j < g.n(); ++j) {
        const double y = (g.x(j) - shift) / sigma;
        const double e = std::exp(-y * y);
        u[j] = order == 1 ? amplitude * (-2.0 * y / sigma) * e
                          : amplitude * (4.0 * y * y - 2.0) / (sigma * sigma) * e;
    }
    const double ratio = boundary_contamination(u);
    if (ratio > kContaminationLimit)
        throw ContaminationError(ratio, "gaussian_derivative_data: data reaches the periodic boundary");
    return u;
}

Field windowed_power(const Grid& g, int power) {
    const double inner = 0.35 * g.length(), outer = 0.45 * g.length();
    // C-infinity step: 1 on [0, inner], 0 beyond outer.
    auto smooth_step = [](double s) {
        if (s <= 0.0) return 1.0;
        if (s >= 1.0) return 0.0;
        const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
        return b / (a + b);
    };
    Field a(g);
    for (int j = 0; j < g.n(); ++j) {
        const double x = g.x(j);
        a[j] = std::pow(x, power) * smooth_step((std::abs(x) - inner) / (outer - inner));
    }
    return a;
}

cplx direct_transform(const Field& u, double xi) {
    const Grid& g = u.grid;
    long double re = 0.0L, im = 0.0L;
    for (int j = 0; j < g.n(); ++j) {
        const long double x = -0.5L * g.length() + static_cast<long double>(j) * g.length() / g.n();
        const long double ph = static_cast<long double>(xi) * x;
        re += std::cos(ph) * u[j];
        im -= std::sin(ph) * u[j];
    }
    const long double dx = static_cast<long double>(g.length()) / g.n();
    return {static_cast<double>(re * dx), static_cast<double>(im * dx)};
}

bool RunManifest::all_passed() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.passed; });
}

const Gate& RunManifest::gate(const std::string& name) const {
    for (const auto& g : gates)
        if (g.name == name) return g;
    throw std::out_of_range("manifest has no gate '" + name + "'");
}

int exit_code(const RunManifest& m) {
    return static_cast<int>(m.all_passed() ? ExitCode::ok : ExitCode::gate_failure);
}

std::string manifest_json(const RunManifest& m) {
    using json = nlohmann::ordered_json;
    json j;
    j["schema"] = "bolab.run_manifest/1";
    j["scenario"] = to_string(m.config.scenario);
    j["code_version"] = m.code_version;
    json cfg = json::object();
    for (const auto& [k, v] : config_echo(m.config)) cfg[k] = v;
    j["config"] = cfg;
    const double dx = m.config.grid.length / m.config.grid.n;
    j["grid"] = {{"n", m.config.grid.n},
                 {"length", m.config.grid.length},
                 {"dx", dx},
                 {"dxi", 2.0 * 3.14159265358979323846 / m.config.grid.length}};
    j["step"] = {{"dt", m.config.time.dt},
                 {"scheme", "integrating-factor RK4"},
                 {"record_stride", m.config.time.record_stride}};
    json derived = json::object();
    for (const auto& [k, v] : m.derived) derived[k] = v;
    j["derived"] = derived;
    json gates = json::array();
    for (const auto& g : m.gates)
        gates.push_back({{"name", g.name},
                         {"passed", g.passed},
                         {"measured", g.measured},
                         {"comparison", g.comparison},
                         {"limit", g.limit},
                         {"detail", g.detail}});
    j["gates"] = gates;
    j["all_passed"] = m.all_passed();
    json meas = json::object();
    for (const auto& [k, v] : m.measurements) meas[k] = v;
    j["measurements"] = meas;
    json notes = json::object();
    for (const auto& [k, v] : m.notes) notes[k] = v;
    j["notes"] = notes;
    j["outputs"] = m.outputs;
    j["exit_code"] = exit_code(m);
    j["wall_seconds"] = m.wall_seconds;
    return j.dump(2) + "\n";
}

} // namespace bolab
