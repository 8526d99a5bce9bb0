#include <benchmark/benchmark.h>

#include "diffuvolume/pipeline.hpp"

using namespace diffuvolume;

namespace {

Stereogram scene(int size) {
  SceneSpec spec;
  spec.width = size;
  spec.height = size;
  spec.max_disparity = 32;
  spec.constant_disparity = 9.5;
  spec.seed = 3;
  return gen_stereogram(spec);
}

MatcherConfig matcher() {
  MatcherConfig m;
  m.max_disparity = 32;
  return m;
}

void BM_BaseVolume(benchmark::State& state) {
  const Stereogram st = scene(static_cast<int>(state.range(0)));
  const MatcherConfig m = matcher();
  for (auto _ : state) benchmark::DoNotOptimize(build_base_volume(st.pair, m));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_BaseVolume)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Aggregate(benchmark::State& state) {
  const Stereogram st = scene(static_cast<int>(state.range(0)));
  const MatcherConfig m = matcher();
  const CostVolume base = build_base_volume(st.pair, m);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(base, m));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Aggregate)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RunReverse(benchmark::State& state) {
  const Stereogram st = scene(64);
  const MatcherConfig m = matcher();
  const CostVolume base = build_base_volume(st.pair, m);
  const ClassicalMatcher cm(m);
  const DisparityMap baseline = cm.predict(base).disparity;
  SamplerConfig s;
  s.steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_reverse(base, cm, baseline, s));
}
BENCHMARK(BM_RunReverse)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_Suite(benchmark::State& state) {
  const std::vector<SceneSpec> scenes = default_suite();
  const MatcherConfig m = matcher();
  const SamplerConfig s;
  for (auto _ : state) benchmark::DoNotOptimize(run_suite(scenes, m, s, 1));
}
BENCHMARK(BM_Suite)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
