// Acceptance suite at the reference resolution (n=8192, L=400, dt=2e-3,
// first-derivative Gaussian data A=1, sigma=1). Prints one PASS/FAIL line per
// criterion; exit status is 0 only when every selected criterion passes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bolab/decay.hpp"
#include "bolab/errors.hpp"
#include "bolab/experiments.hpp"

using namespace bolab;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        passed = passed && ok;
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
    void gate(const RunManifest& m, const std::string& name) {
        const Gate& g = m.gate(name);
        char buf[160];
        if (g.comparison.rfind("in ", 0) == 0)
            std::snprintf(buf, sizeof buf, "%s=%.4g %s", name.c_str(), g.measured, g.comparison.c_str());
        else
            std::snprintf(buf, sizeof buf, "%s=%.4g %s %.4g", name.c_str(), g.measured, g.comparison.c_str(), g.limit);
        require(g.passed, buf);
    }
};

std::filesystem::path g_out = "acceptance_out";

ExperimentConfig reference(Scenario s, const std::string& dir) {
    ExperimentConfig c;
    c.scenario = s;
    c.grid = {8192, 400.0};
    c.data.amplitude = 1.0;
    c.data.width = 1.0;
    c.time.dt = 2e-3;
    c.time.snapshots = 12;
    c.output_dir = (g_out / dir).string();
    return c;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

Outcome momentum_law() {
    Outcome o;
    const RunManifest m = run_momentum(reference(Scenario::momentum, "c1_momentum"));
    o.gate(m, "momentum_law");
    o.gate(m, "mu1_closed_form");
    o.gate(m, "l2sq_closed_form");
    return o;
}

Outcome conservation() {
    Outcome o;
    const RunManifest m = run_momentum(reference(Scenario::momentum, "c2_conservation"));
    const double i1 = m.measurements.at("max_abs_i1");
    o.require(i1 < 1e-10, "max|I1|=" + fmt(i1) + " < 1e-10");
    o.gate(m, "l2_drift");
    return o;
}

Outcome tstar_recovery() {
    Outcome o;
    const RunManifest m = run_tstar(reference(Scenario::tstar, "c3_tstar"));
    o.gate(m, "tstar_root");
    o.gate(m, "quadratic_fit_residual");
    ExperimentConfig half = reference(Scenario::tstar, "c3_tstar_half");
    half.data.amplitude = 0.5;
    try {
        const RunManifest h = run_tstar(half);
        const Gate& g = h.gate("tstar_root");
        o.require(g.passed, "A=0.5 tstar_root=" + fmt(g.measured) + " < 0.05");
    } catch (const ContaminationError& e) {
        o.require(false, std::string("A=0.5 run aborted: ") + e.what());
    }
    return o;
}

Outcome linear_contrast() {
    Outcome o;
    const RunManifest m = run_linear_compare(reference(Scenario::linear_compare, "c4_linear_compare"));
    o.gate(m, "linear_affine_residual");
    o.gate(m, "linear_no_root");
    o.gate(m, "difference_quadratic_residual");
    return o;
}

Outcome pair_difference() {
    Outcome o;
    ExperimentConfig c = reference(Scenario::pairdiff, "c5_pairdiff");
    c.data.shift = 2.0;
    const RunManifest m = run_pairdiff(c);
    o.gate(m, "jump_agreement");
    o.gate(m, "difference_proxy_bounded");
    o.gate(m, "jump_growth");
    return o;
}

Outcome two_time() {
    Outcome o;
    ExperimentConfig c = reference(Scenario::twotime, "c6_twotime");
    c.data.derivative_order = 2;
    const RunManifest m = run_twotime(c);
    o.gate(m, "ratio_constancy");
    o.gate(m, "no_zero");
    return o;
}

Outcome calibration() {
    Outcome o;
    // Synthetic |xi|^3 exp(-xi^2): jump of the third derivative is 12.
    for (double dxi : {0.02, 2.0 * std::numbers::pi / 400.0}) {
        const Grid g = make_grid(8192, 2.0 * std::numbers::pi / dxi);
        Spectrum s(g);
        for (int k = g.kmin(); k <= g.kmax(); ++k) {
            const double xi = g.xi(k);
            s.at(k) = std::pow(std::abs(xi), 3) * std::exp(-xi * xi);
        }
        const double J = jump_estimate(s).jump;
        o.require(std::abs(J / 12.0 - 1.0) < 0.01, "synthetic J=" + fmt(J) + " at dxi=" + fmt(dxi));
    }
    const std::vector<double> ts = ExperimentConfig{}.calibration_times;
    auto kappa = [&](int n, double L) {
        return calibrate_kappa(gaussian_derivative_data(make_grid(n, L), 1.0, 1.0, 0.0, 1), ts).kappa;
    };
    const double k0 = kappa(8192, 400.0), kn = kappa(16384, 400.0), kl = kappa(16384, 800.0);
    o.require(std::abs(kn / k0 - 1.0) < 0.01, "kappa n->2n " + fmt(k0) + "->" + fmt(kn));
    o.require(std::abs(kl / k0 - 1.0) < 0.01, "kappa L->2L " + fmt(k0) + "->" + fmt(kl));
    return o;
}

Outcome solver_quality() {
    Outcome o;
    const RunManifest m = run_convergence(reference(Scenario::convergence, "c8_convergence"));
    o.gate(m, "dt_halving_ratio");
    o.gate(m, "grid_doubling");
    o.gate(m, "time_reversal");
    return o;
}

Outcome property_suite() {
    Outcome o;
    const RunManifest m = run_commutator_suite(reference(Scenario::commutator_suite, "c9_commutator"));
    for (const auto& g : m.gates) o.gate(m, g.name);
    return o;
}

Outcome eterm_algebra() {
    Outcome o;
    const RunManifest m = run_eterm_table(reference(Scenario::eterm_table, "c10_eterm"));
    o.gate(m, "eterm_finite_difference");
    o.gate(m, "eterm_ratios_finite");
    o.gate(m, "eterm_identity");
    return o;
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {"momentum law", momentum_law},
        {"conservation", conservation},
        {"t* recovery", tstar_recovery},
        {"linear/nonlinear contrast", linear_contrast},
        {"pair-difference decay", pair_difference},
        {"two-time rigidity", two_time},
        {"jump estimator calibration", calibration},
        {"solver quality", solver_quality},
        {"commutator and weight properties", property_suite},
        {"fourth-derivative algebra", eterm_algebra},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bolab acceptance suite"};
    std::vector<int> selected;
    std::string out = g_out.string();
    app.add_option("--criterion", selected, "criterion number(s), 1-10; default all")->check(CLI::Range(1, 10));
    app.add_option("--out", out, "directory for run outputs");
    CLI11_PARSE(app, argc, argv);
    g_out = out;
    if (selected.empty())
        for (int i = 1; i <= 10; ++i) selected.push_back(i);

    int failed = 0;
    for (int id : selected) {
        const Criterion& c = criteria()[static_cast<std::size_t>(id - 1)];
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("error: ") + e.what());
        }
        std::printf("%s criterion %d (%s): %s\n", o.passed ? "PASS" : "FAIL", id, c.name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.passed) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
