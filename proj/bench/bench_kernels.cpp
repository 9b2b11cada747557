// OpenMP kernels against their serial references. With one hardware thread
// the pairs should time roughly equal; the gap shows the threading overhead.
#include "earfit/fit.hpp"
#include "earfit/horn_fem.hpp"

#include <benchmark/benchmark.h>

using namespace earfit;

namespace {

const HornProblem& basic_problem() {
    static const HornProblem p = FitBounds::defaults(4).basic.problem(Medium{});
    return p;
}

void BM_ImpedancesParallel(benchmark::State& state) {
    const auto grid = validation_grid();
    const MeshOptions mesh{0, static_cast<int>(state.range(0))};
    for (auto _ : state)
        benchmark::DoNotOptimize(impedances(basic_problem(), grid, mesh));
}

void BM_ImpedancesSerial(benchmark::State& state) {
    const auto grid = validation_grid();
    const MeshOptions mesh{0, static_cast<int>(state.range(0))};
    for (auto _ : state)
        benchmark::DoNotOptimize(impedances_serial(basic_problem(), grid, mesh));
}

const ImpedanceSpectrum& synthetic_zin() {
    static const ImpedanceSpectrum z = [] {
        ModelParameters truth = FitBounds::defaults(1).basic;
        truth.area.length = 0.027;
        truth.drum = {153.0, 4.0, 1.1, 1.5, 1000.0, 3500.0};
        return impedances(truth.problem(Medium{}), validation_grid()).input;
    }();
    return z;
}

void multistart(benchmark::State& state, Execution execution) {
    FitConfig config;
    config.order = 1;
    config.multistart = {static_cast<int>(state.range(0)), 0, 7};
    config.optimizer.evals_per_dimension = 40;
    config.execution = execution;
    for (auto _ : state)
        benchmark::DoNotOptimize(fit(synthetic_zin(), config));
}

void BM_MultistartParallel(benchmark::State& state) { multistart(state, Execution::parallel); }
void BM_MultistartSerial(benchmark::State& state) { multistart(state, Execution::serial); }

} // namespace

BENCHMARK(BM_ImpedancesParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImpedancesSerial)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultistartParallel)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultistartSerial)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
