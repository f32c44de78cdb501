// Serial reference vs OpenMP paths of the parallel kernels.
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "accelgates/oracle.hpp"
#include "accelgates/rotation.hpp"
#include "accelgates/synthesis.hpp"

using namespace accelgates;

namespace {

constexpr double pi = std::numbers::pi;

Execution mode_of(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_IntegralTables(benchmark::State& state) {
    const CavityConfig cfg{pi, 8, 1.0, 0.01};
    const auto seg = TrajectorySegment::accelerated(0.7, 0.2, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(compute_tables(seg, cfg, 2.0, true, {}, mode_of(state)));
    label(state);
}

void BM_AzimuthScan(benchmark::State& state) {
    const CavityConfig cfg{pi, 1, 1.0, 0.01};
    const auto prep = CoherentPrep::polar(1, 1.0, 0.0);
    std::vector<double> as;
    for (int i = 0; i <= 40; ++i) as.push_back(0.05 * i);
    for (auto _ : state) benchmark::DoNotOptimize(azimuth_scan(cfg, prep, 0.01, 2.0, as, 0.0, {}, mode_of(state)));
    label(state);
}

void BM_RotationGrid(benchmark::State& state) {
    const CavityTemplate tpl{CavityConfig{pi, 1, 1.0, 0.0}, 1};
    SynthesisConstraints c;
    c.a_max = 2.0;
    c.T_max = 20.0;
    c.alpha_max = 5.0;
    for (auto _ : state) benchmark::DoNotOptimize(build_rotation_grid(tpl, c, {}, mode_of(state)));
    label(state);
}

void BM_OracleLadder(benchmark::State& state) {
    const CavityConfig cfg{pi, 2, 1.0, 0.01};
    const auto seg = TrajectorySegment::accelerated(1.0, 0.0, 2.0);
    const std::vector<LadderRung> ladder{{2, 1}, {2, 2}, {2, 3}};
    const auto rho0 = QubitState::from_bloch({0.6, 0.0, 0.8});
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            convergence_check(seg, cfg, FieldPrep::vacuum(), rho0, 2.0, ladder, 1e-6, {}, mode_of(state)));
    }
    label(state);
}

}  // namespace

BENCHMARK(BM_IntegralTables)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AzimuthScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RotationGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleLadder)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
