#include <random>

#include <benchmark/benchmark.h>

#include "tubeflow/baseline.hpp"
#include "tubeflow/eval.hpp"
#include "tubeflow/loss.hpp"
#include "tubeflow/match.hpp"
#include "tubeflow/optim.hpp"
#include "tubeflow/pipeline.hpp"
#include "tubeflow/synth.hpp"

using namespace tubeflow;

namespace {

SyntheticScene scene(int n) {
  SceneConfig cfg;
  cfg.width = n;
  cfg.height = n;
  cfg.seed = 1;
  return generate_tree(cfg);
}

VesselParams init_for(const ScalarField2D& image) {
  const ParamBounds b = ParamBounds::for_image(image.width(), image.height());
  return init_matched_filter(image, default_template(), OptimConfig::defaults(b), b);
}

}  // namespace

static void BM_GenerateTree(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scene(n));
}
BENCHMARK(BM_GenerateTree)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_SamplePatch(benchmark::State& state) {
  const SyntheticScene s = scene(128);
  const TubeTemplate& t = default_template();
  std::vector<double> out(t.sample_count());
  double angle = 0.0;
  for (auto _ : state) {
    sample_patch(s.image, {64.3, 60.7}, 3.0, angle, t, out);
    angle += 0.01;
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SamplePatch);

static void BM_VesselnessMap(benchmark::State& state) {
  const SyntheticScene s = scene(128);
  const VesselParams p = init_for(s.image);
  const VesselnessOptions opt{state.range(0) != 0, state.range(1) != 0};
  for (auto _ : state) benchmark::DoNotOptimize(vesselness_map(s.image, p, default_template(), opt));
}
BENCHMARK(BM_VesselnessMap)->ArgsProduct({{0, 1}, {0, 1}})->ArgNames({"robust", "bifurc"})->Unit(benchmark::kMillisecond);

static void BM_InitMatchedFilter(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SyntheticScene s = scene(n);
  for (auto _ : state) benchmark::DoNotOptimize(init_for(s.image));
}
BENCHMARK(BM_InitMatchedFilter)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_LossTotal(benchmark::State& state) {
  const SyntheticScene s = scene(128);
  const VesselParams p = init_for(s.image);
  const ScalarField2D v = vesselness_map(s.image, p, default_template());
  for (auto _ : state) benchmark::DoNotOptimize(loss_total(s.image, v, p, default_template(), {}));
}
BENCHMARK(BM_LossTotal)->Unit(benchmark::kMillisecond);

static void BM_RefineIteration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SyntheticScene s = scene(n);
  const ParamBounds b = ParamBounds::for_image(n, n);
  OptimConfig cfg = OptimConfig::defaults(b);
  cfg.iters = 1;
  const VesselParams p = init_matched_filter(s.image, default_template(), cfg, b);
  for (auto _ : state) benchmark::DoNotOptimize(refine(s.image, p, default_template(), {}, cfg));
}
BENCHMARK(BM_RefineIteration)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Frangi(benchmark::State& state) {
  const SyntheticScene s = scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(frangi2d(s.image));
}
BENCHMARK(BM_Frangi)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_RocAuc(benchmark::State& state) {
  const SyntheticScene s = scene(static_cast<int>(state.range(0)));
  const ScalarField2D f = frangi2d(s.image);
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(f, s.mask));
}
BENCHMARK(BM_RocAuc)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_BestThreshold(benchmark::State& state) {
  const SyntheticScene s = scene(128);
  const ScalarField2D f = frangi2d(s.image);
  for (auto _ : state) benchmark::DoNotOptimize(best_threshold(f, s.mask));
}
BENCHMARK(BM_BestThreshold)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
