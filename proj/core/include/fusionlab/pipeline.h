#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fusionlab/denoiser.h"
#include "fusionlab/grid.h"
#include "fusionlab/guidance.h"
#include "fusionlab/schedule.h"
#include "fusionlab/snf.h"

namespace fusionlab {

// Fractions of the sampling steps: [0, alpha) scene construction,
// [alpha, beta) fusion, [beta, 1] subject enhancement.
struct StageSchedule {
  double alpha = 0.3;
  double beta = 0.6;
  int infer_steps = 50;

  void validate() const;
  bool operator==(const StageSchedule&) const = default;
};

struct StageCounts {
  int scene = 0;
  int fusion = 0;
  int subject = 0;
};

// scene = round(alpha T), fusion = round(beta T) - scene, subject = rest.
StageCounts stage_boundaries(const StageSchedule& sched);

enum class Stage { kSceneConstruction = 1, kFusion = 2, kSubjectEnhancement = 3 };

// Stage-II noise combination. kAddition is the ablation arm that averages the
// two guided predictions instead of masking.
enum class FusionMode { kSnf, kAddition };

struct PipelineConfig {
  StageSchedule stages;
  GuidanceConfig scene_guidance;
  GuidanceConfig subject_guidance;
  // Stage III uses subject guidance; when false it uses eps(x|c, r) directly.
  bool subject_stage_guidance = true;
  FusionMode fusion = FusionMode::kSnf;
  int kernel_size = 3;
  double kernel_sigma = 1.0;
  MaskOverride mask_override = MaskOverride::kNone;

  bool operator==(const PipelineConfig&) const = default;
};

struct LatentShape {
  int height = 32;
  int width = 32;
  int channels = 1;
};

// Standard normal x_T from a generator seeded with `seed`.
Raster initial_latent(const LatentShape& shape, std::uint64_t seed);

struct StepRecord {
  Stage stage = Stage::kSceneConstruction;
  int step = 0;  // index into the plan
  int t = 0;
  std::optional<SnfRecord> snf;    // fusion steps only
  std::optional<Raster> latent;    // x after this step, when requested
};

struct SampleTrace {
  std::vector<StepRecord> steps;
  Raster final;
  std::uint64_t seed = 0;
  std::optional<int> scene;
  std::optional<int> subject;
  PipelineConfig config;
};

struct RunOptions {
  bool keep_latents = false;
};

// Full three-stage run from seeded noise.
SampleTrace run_pipeline(const Denoiser& scene_expert, const Denoiser& subject_expert,
                         std::optional<int> scene, std::optional<int> subject,
                         const PipelineConfig& cfg, const NoiseSchedule& ns,
                         const TimestepPlan& plan, const LatentShape& shape,
                         std::uint64_t seed, const RunOptions& opts = {});

// Runs plan steps [first_step, T_infer) starting from x. Stage labels follow
// the global step index.
SampleTrace resume_pipeline(const Denoiser& scene_expert, const Denoiser& subject_expert,
                            std::optional<int> scene, std::optional<int> subject,
                            const PipelineConfig& cfg, const NoiseSchedule& ns,
                            const TimestepPlan& plan, Raster x, int first_step,
                            const RunOptions& opts = {});

// Scene expert alone: run_pipeline with alpha = beta = 1.
SampleTrace run_text_only(const Denoiser& scene_expert, std::optional<int> scene,
                          const PipelineConfig& cfg, const NoiseSchedule& ns,
                          const TimestepPlan& plan, const LatentShape& shape,
                          std::uint64_t seed, const RunOptions& opts = {});

}  // namespace fusionlab
