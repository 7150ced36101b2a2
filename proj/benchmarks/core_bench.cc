#include <random>

#include <benchmark/benchmark.h>

#include "fusionlab/denoiser.h"
#include "fusionlab/experiment.h"
#include "fusionlab/grid.h"
#include "fusionlab/snf.h"

namespace fusionlab {
namespace {

struct Defaults {
  ExperimentConfig cfg;
  ExperimentContext ctx = make_context(cfg);
  Raster x;
  Defaults() {
    std::mt19937_64 rng(1);
    x = sample_world(ctx.gmm, rng).first;
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.7 * x[i] + 0.7 * n(rng);
  }
};

const Defaults& defaults() {
  static const Defaults d;
  return d;
}

void BM_GmmDenoise(benchmark::State& state) {
  const Defaults& d = defaults();
  for (auto _ : state) benchmark::DoNotOptimize(gmm_denoise(d.ctx.gmm, d.x, 500, d.ctx.schedule));
}
BENCHMARK(BM_GmmDenoise);

void BM_ConvolveSmooth(benchmark::State& state) {
  const Raster img(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1, 0.5);
  const Kernel2D k = gaussian_kernel(3, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_smooth(img, k));
}
BENCHMARK(BM_ConvolveSmooth)->Arg(32)->Arg(128);

void BM_SnfStep(benchmark::State& state) {
  const Defaults& d = defaults();
  const SnfSettings settings;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        snf_step(*d.ctx.scene_expert, *d.ctx.subject_expert, d.x, 500, 0, 1, settings));
  }
}
BENCHMARK(BM_SnfStep);

void BM_PipelineRun(benchmark::State& state) {
  const Defaults& d = defaults();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_experiment(d.ctx, d.cfg.pipeline, 0, 1, seed++));
  }
}
BENCHMARK(BM_PipelineRun)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fusionlab

BENCHMARK_MAIN();
