#include <benchmark/benchmark.h>

#include <cmath>

#include "bolab/decay.hpp"
#include "bolab/experiments.hpp"
#include "bolab/integrator.hpp"
#include "bolab/spectral_ops.hpp"
#include "bolab/transform.hpp"

namespace {

using namespace bolab;

Field canonical(int n, double L) { return gaussian_derivative_data(make_grid(n, L), 1.0, 1.0, 0.0, 1); }

void BM_Forward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Field u = canonical(n, 400.0);
    for (auto _ : state) benchmark::DoNotOptimize(forward(u));
    state.SetComplexityN(n);
}
BENCHMARK(BM_Forward)->RangeMultiplier(2)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oNLogN);

void BM_Inverse(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Spectrum s = forward(canonical(n, 400.0));
    for (auto _ : state) benchmark::DoNotOptimize(inverse(s));
    state.SetComplexityN(n);
}
BENCHMARK(BM_Inverse)->RangeMultiplier(2)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oNLogN);

void BM_Hilbert(benchmark::State& state) {
    const Field u = canonical(static_cast<int>(state.range(0)), 400.0);
    for (auto _ : state) benchmark::DoNotOptimize(hilbert(u));
}
BENCHMARK(BM_Hilbert)->Arg(8192);

void BM_StepIfrk4(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    SpectralState s{0.0, forward(canonical(n, 400.0))};
    BOParams p;
    p.dealias_fraction = default_dealias_fraction(0);
    for (auto _ : state) {
        s = step_ifrk4(s, 2e-3, p);
        benchmark::DoNotOptimize(s);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_StepIfrk4)->RangeMultiplier(2)->Range(1 << 11, 1 << 15)->Complexity(benchmark::oNLogN);

void BM_Evolve(benchmark::State& state) {
    const Field u0 = canonical(8192, 400.0);
    BOParams p;
    p.dt = 2e-3;
    p.t_end = 0.2;
    p.record_stride = 10;
    for (auto _ : state) benchmark::DoNotOptimize(evolve(u0, p));
}
BENCHMARK(BM_Evolve)->Unit(benchmark::kMillisecond);

void BM_JumpEstimate(benchmark::State& state) {
    const Spectrum s = linear_propagator(forward(canonical(8192, 400.0)), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(jump_estimate(s));
}
BENCHMARK(BM_JumpEstimate);

void BM_ETermTable(benchmark::State& state) {
    const Field u0 = canonical(8192, 400.0);
    for (auto _ : state) benchmark::DoNotOptimize(e_term_table(1.0, u0));
}
BENCHMARK(BM_ETermTable)->Unit(benchmark::kMillisecond);

void BM_Commutator(benchmark::State& state) {
    const Grid g = make_grid(8192, 400.0);
    const Field a = windowed_power(g, 1);
    const Field f = canonical(8192, 400.0);
    for (auto _ : state) benchmark::DoNotOptimize(commutator(a, f, 1, 1));
}
BENCHMARK(BM_Commutator);

} // namespace

BENCHMARK_MAIN();
