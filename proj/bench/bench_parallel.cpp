#include <benchmark/benchmark.h>

#include <vector>

#include "harmonize/existence.hpp"
#include "harmonize/parallel.hpp"
#include "harmonize/simulate.hpp"

using namespace harmonize;

namespace {

// Arg 0 runs the serial reference, arg 1 the OpenMP path.
Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel/" + std::to_string(thread_count()));
}

void BM_BuildGrid(benchmark::State& state) {
    const ControlSpec spec = ControlSpec::fbs(0.4, {0.6});
    for (auto _ : state) benchmark::DoNotOptimize(build_grid(spec, 32.0, 256, exec_of(state)));
    label(state);
}

void BM_McMoments(benchmark::State& state) {
    const HermitianGrid g = build_grid(ControlSpec::fbm(0.5), 32.0, 256);
    std::vector<FieldPoint> points;
    for (double t : {0.25, 0.5, 1.0, 2.0}) points.push_back({t, {}});
    const Generator gen = field_generator(g, FieldKind::Fbm, points);
    for (auto _ : state) benchmark::DoNotOptimize(mc_moments(gen, points.size(), 2000, 1, exec_of(state)));
    label(state);
}

void BM_VerifyBounds(benchmark::State& state) {
    const std::vector<double> psis{1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3};
    for (auto _ : state)
        benchmark::DoNotOptimize(verify_bounds(OperatorSpec::wave(2.0, 1), SpectralDensity1D::riesz(0.5),
                                               {0.5, 1.0, 2.0}, psis, WaveForm::CondHyp, exec_of(state)));
    label(state);
}

void BM_RadialShells(benchmark::State& state) {
    const OperatorSpec heat = OperatorSpec::heat(2.0, 2);
    const SpectralDensity1D nu = SpectralDensity1D::riesz(0.3);
    const SpatialMeasure mu = SpatialMeasure::radial_power(0.5, 2);
    const RealFn g = [&](double r) { return n_t(heat, nu, heat.psi(r), 1.0); };
    for (auto _ : state) benchmark::DoNotOptimize(radial_shells(g, mu, -8, 8, {}, exec_of(state)));
    label(state);
}

}  // namespace

BENCHMARK(BM_BuildGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McMoments)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyBounds)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RadialShells)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
