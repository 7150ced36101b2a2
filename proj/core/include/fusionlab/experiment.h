#pragma once

#include <cstdint>
#include <memory>

#include "fusionlab/config.h"
#include "fusionlab/denoiser.h"
#include "fusionlab/pipeline.h"

namespace fusionlab {

// Models and schedules resolved from an ExperimentConfig. Denoisers are
// immutable after construction and safe to share between threads.
struct ExperimentContext {
  WorldConfig world;
  GmmSpec gmm;
  NoiseSchedule schedule;
  TimestepPlan plan;
  std::shared_ptr<const Denoiser> scene_expert;
  std::shared_ptr<const Denoiser> subject_expert;

  LatentShape shape() const { return {world.height, world.width, world.channels}; }
};

// Exact mixture denoisers, or parameter files loaded for the learned kind.
ExperimentContext make_context(const ExperimentConfig& cfg);

// One pipeline run with the config's pipeline settings.
SampleTrace run_experiment(const ExperimentContext& ctx, const PipelineConfig& pipeline,
                           int scene, int subject, std::uint64_t seed,
                           const RunOptions& opts = {});

}  // namespace fusionlab
