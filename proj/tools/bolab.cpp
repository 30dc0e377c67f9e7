#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "bolab/errors.hpp"
#include "bolab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Benjamin-Ono decay laboratory"};
    std::string scenario, config, out;
    std::uint64_t seed = 0;
    app.add_option("scenario", scenario,
                   "momentum | tstar | linear_compare | pairdiff | twotime | convergence | commutator_suite | eterm_table")
        ->required();
    app.add_option("--config", config, "key=value configuration file")->required();
    app.add_option("--out", out, "output directory (overrides output_dir)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides seed)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(bolab::ExitCode::config);
    }

    try {
        bolab::ExperimentConfig cfg = bolab::load_config(config);
        cfg.scenario = bolab::parse_scenario(scenario);
        if (!out.empty()) cfg.output_dir = out;
        if (seed_opt->count() > 0) cfg.seed = seed;
        const bolab::RunManifest m = bolab::run_scenario(cfg);
        for (const auto& g : m.gates) {
            if (g.comparison.rfind("in ", 0) == 0)
                std::printf("%-4s %-34s measured=%.6g %s\n", g.passed ? "PASS" : "FAIL", g.name.c_str(), g.measured,
                            g.comparison.c_str());
            else
                std::printf("%-4s %-34s measured=%.6g %s %.6g\n", g.passed ? "PASS" : "FAIL", g.name.c_str(),
                            g.measured, g.comparison.c_str(), g.limit);
        }
        std::printf("wrote %s (%.1f s)\n", (cfg.output_dir + "/manifest.json").c_str(), m.wall_seconds);
        return bolab::exit_code(m);
    } catch (const bolab::RunError& e) {
        std::cerr << "bolab: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "bolab: " << e.what() << '\n';
        return 1;
    }
}
