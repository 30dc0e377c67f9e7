#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bolab/grid.hpp"

namespace bolab {

enum class Scenario {
    momentum,
    tstar,
    linear_compare,
    pairdiff,
    twotime,
    convergence,
    commutator_suite,
    eterm_table,
};

std::string to_string(Scenario s);
/// Throws ConfigError for an unknown name.
Scenario parse_scenario(const std::string& name);

struct GridConfig {
    int n = 8192;
    double length = 400.0;
};

struct DataConfig {
    std::string kind = "gaussian_derivative";  ///< or "custom_samples"
    double amplitude = 1.0;
    double width = 1.0;
    double shift = 0.0;
    int derivative_order = 1;                  ///< 1 or 2
    std::string samples_file;                  ///< one value per line, grid.n lines
};

struct TimeConfig {
    double dt = 2e-3;
    std::optional<double> t_end;               ///< scenario default when unset
    int snapshots = 12;
    int record_stride = 10;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::momentum;
    GridConfig grid;
    DataConfig data;
    TimeConfig time;
    int nonlinearity_k = 0;                    ///< key nonlinearity.k
    std::string output_dir = "out";
    std::uint64_t seed = 20240611;
    /// Boundary ratio tolerated along an evolution (initial data must meet
    /// the strict 1e-9 guard).
    double evolution_contamination_limit = 1e-4;
    std::vector<double> calibration_times{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> pairdiff_caps{10.0, 20.0, 40.0};
    double twotime_reference_scale = 5.656854249492381;  ///< 4 sqrt(2)
    double convergence_dt = 0.01;              ///< coarse step; halved once, reference dt/8
    double convergence_t_end = 2.0;
    int commutator_pairs = 100;
    std::vector<double> eterm_times{0.5, 1.0, 2.0};
};

/// Flat key=value text; '#' starts a comment. Keys are the dotted field
/// paths listed by config_keys(). Unknown keys, duplicate keys and malformed
/// values throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every accepted key, in canonical order.
std::vector<std::string> config_keys();

/// key -> value text, round-trippable through parse_config().
std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg);

/// Scenario-independent range checks. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

/// A d^order/dx^order exp(-((x - shift)/sigma)^2), order 1 or 2.
/// Throws ContaminationError when the samples reach the boundary region.
Field gaussian_derivative_data(const Grid& g, double amplitude, double sigma, double shift, int order = 1);

struct Gate {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double limit = 0.0;
    std::string comparison;   ///< "<", ">", "<=", "in", "==" ...
    std::string detail;
};

struct RunManifest {
    ExperimentConfig config;
    std::string code_version;
    std::map<std::string, double> derived;      ///< mu1, l2sq, tstar, kappa, ...
    std::map<std::string, double> measurements;
    std::map<std::string, std::string> notes;
    std::vector<Gate> gates;
    std::vector<std::string> outputs;           ///< files written, relative to output_dir
    double wall_seconds = 0.0;

    bool all_passed() const;
    const Gate& gate(const std::string& name) const;
};

/// Run the configured scenario, write its CSV files, manifest.json and
/// plot.gp into cfg.output_dir, and return the manifest.
///
/// Throws ConfigError, InstabilityError or ContaminationError; gate failures
/// are reported in the manifest, not thrown.
RunManifest run_scenario(const ExperimentConfig& cfg);

RunManifest run_momentum(const ExperimentConfig& cfg);
RunManifest run_tstar(const ExperimentConfig& cfg);
RunManifest run_linear_compare(const ExperimentConfig& cfg);
RunManifest run_pairdiff(const ExperimentConfig& cfg);
RunManifest run_twotime(const ExperimentConfig& cfg);
RunManifest run_convergence(const ExperimentConfig& cfg);
RunManifest run_commutator_suite(const ExperimentConfig& cfg);
RunManifest run_eterm_table(const ExperimentConfig& cfg);

/// JSON text of the manifest (stable key order).
std::string manifest_json(const RunManifest& m);

/// Exit code for a finished run: 0 when every gate passed, 5 otherwise.
int exit_code(const RunManifest& m);

/// x^power times a smooth window equal to 1 for |x| <= 0.35 L and 0 for
/// |x| >= 0.45 L. Used as the weight in commutator checks.
Field windowed_power(const Grid& g, int power);

/// \hat u(xi) = \int e^{-i xi x} u dx by direct summation over the nodes,
/// in extended precision. Serves as an off-grid evaluation of the spectrum
/// of effectively compactly supported data.
cplx direct_transform(const Field& u, double xi);

} // namespace bolab
