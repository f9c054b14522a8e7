#include <benchmark/benchmark.h>

#include "horolab/graphing.hpp"
#include "horolab/growth.hpp"
#include "horolab/percolation.hpp"
#include "horolab/point_process.hpp"
#include "horolab/slope_schedule.hpp"

using namespace horolab;

namespace {

struct F2 {
  Group g{GroupSpec::free(2)};
  GrowthSeries series = counted_growth_series(GroupSpec::free(2), 30);
  SlopeSchedule schedule = build_schedule(series, series, 1.0, 24);
};

const F2& f2() {
  static const F2 w;
  return w;
}

const ProcessSpace& space() {
  static const ProcessSpace s(f2().g, f2().g, f2().series, f2().series, f2().schedule, 1.0, 5.0, 3);
  return s;
}

void BM_BfsGrowth(benchmark::State& state) {
  const Group g(GroupSpec::free(2));
  for (auto _ : state) benchmark::DoNotOptimize(growth_series(g, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BfsGrowth)->Arg(6)->Arg(9)->Arg(11)->Unit(benchmark::kMillisecond);

void BM_CayleyBall(benchmark::State& state) {
  const Group g(GroupSpec::free(2));
  for (auto _ : state) benchmark::DoNotOptimize(CayleyBall(g, static_cast<int>(state.range(0))).size());
}
BENCHMARK(BM_CayleyBall)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_BuildSchedule(benchmark::State& state) {
  const auto& s = f2().series;
  for (auto _ : state) benchmark::DoNotOptimize(build_schedule(s, s, 1.0, 24).breakpoints());
}
BENCHMARK(BM_BuildSchedule);

void BM_ProcessSpace(benchmark::State& state) {
  const auto& w = f2();
  for (auto _ : state) {
    const ProcessSpace s(w.g, w.g, w.series, w.series, w.schedule, 1.0, static_cast<double>(state.range(0)), 3);
    benchmark::DoNotOptimize(s.outer_size());
  }
}
BENCHMARK(BM_ProcessSpace)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_SampleProcess(benchmark::State& state) {
  const auto& s = space();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_diamond_process(s, seed++).diamonds.size());
}
BENCHMARK(BM_SampleProcess)->Unit(benchmark::kMillisecond);

void BM_Percolation(benchmark::State& state) {
  const PercolationSampler sampler(space().window_ptr(),
                                   PercolationKernel::geometric(f2().series, f2().series, 1.0, 10), 0.2);
  const auto keys = window_keys(space());
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(seed++, keys).edges.size());
}
BENCHMARK(BM_Percolation)->Unit(benchmark::kMillisecond);

void BM_GraphingRun(benchmark::State& state) {
  const PercolationSampler sampler(space().window_ptr(),
                                   PercolationKernel::geometric(f2().series, f2().series, 1.0, 10), 0.2);
  const auto keys = window_keys(space());
  const auto process = sample_diamond_process(space(), 7);
  const auto sample = sampler.sample(7, keys);
  for (auto _ : state) {
    const auto run = run_graphing(space(), process, sample, 0.05);
    benchmark::DoNotOptimize(seed_cost(space(), run, 1.0).pi3_half_degree);
  }
}
BENCHMARK(BM_GraphingRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
