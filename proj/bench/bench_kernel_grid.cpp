#include <benchmark/benchmark.h>

#include <vector>

#include "conespec/cross_section.hpp"
#include "conespec/propagator.hpp"

using namespace conespec;

namespace {

const AngularSpectrum& spectrum() {
    static const AngularSpectrum s = eigensolve(RoundSphere{2, 1.0, -3.0 / 16.0}, 3, 40 * 40);
    return s;
}

std::vector<ConePoint> ring(double r, int count) {
    std::vector<ConePoint> out;
    for (int i = 0; i < count; ++i)
        out.push_back(cone_point(r, Eigen::VectorXd(sphere_point(3.0 * i / count, 0.4 * i))));
    return out;
}

void run(benchmark::State& state, bool parallel) {
    const auto xs = ring(2.0, static_cast<int>(state.range(0))), ys = ring(3.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernel_grid(spectrum(), 0, 5.0, xs, ys, parallel));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_KernelGridSerial(benchmark::State& state) { run(state, false); }
void BM_KernelGridParallel(benchmark::State& state) { run(state, true); }

}  // namespace

BENCHMARK(BM_KernelGridSerial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelGridParallel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
