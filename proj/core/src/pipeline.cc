#include "fusionlab/pipeline.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fusionlab/error.h"

namespace fusionlab {

void StageSchedule::validate() const {
  if (infer_steps < 1) {
    throw std::invalid_argument("StageSchedule: infer_steps must be positive");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("StageSchedule: alpha and beta must lie in [0, 1]");
  }
  if (alpha > beta) {
    throw std::invalid_argument("StageSchedule: alpha must not exceed beta");
  }
}

StageCounts stage_boundaries(const StageSchedule& sched) {
  sched.validate();
  const int n1 = static_cast<int>(std::lround(sched.alpha * sched.infer_steps));
  const int n12 = static_cast<int>(std::lround(sched.beta * sched.infer_steps));
  return {n1, n12 - n1, sched.infer_steps - n12};
}

Raster initial_latent(const LatentShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Raster x(shape.height, shape.width, shape.channels);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = normal(rng);
  return x;
}

namespace {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kSceneConstruction:
      return "scene construction";
    case Stage::kFusion:
      return "fusion";
    case Stage::kSubjectEnhancement:
      return "subject enhancement";
  }
  return "?";
}

}  // namespace

SampleTrace resume_pipeline(const Denoiser& scene_expert, const Denoiser& subject_expert,
                            std::optional<int> scene, std::optional<int> subject,
                            const PipelineConfig& cfg, const NoiseSchedule& ns,
                            const TimestepPlan& plan, Raster x, int first_step,
                            const RunOptions& opts) {
  const StageCounts counts = stage_boundaries(cfg.stages);
  if (plan.size() != cfg.stages.infer_steps) {
    throw std::invalid_argument("run_pipeline: plan length must equal infer_steps");
  }
  if (first_step < 0 || first_step > plan.size()) {
    throw std::invalid_argument("run_pipeline: first_step out of range");
  }
  SnfSettings snf;
  snf.scene_guidance = cfg.scene_guidance;
  snf.subject_guidance = cfg.subject_guidance;
  snf.kernel = gaussian_kernel(cfg.kernel_size, cfg.kernel_sigma);
  snf.mask_override = cfg.mask_override;

  SampleTrace trace;
  trace.scene = scene;
  trace.subject = subject;
  trace.config = cfg;
  trace.steps.reserve(static_cast<std::size_t>(plan.size() - first_step));
  for (int i = first_step; i < plan.size(); ++i) {
    const int t = plan.at(i);
    StepRecord rec;
    rec.step = i;
    rec.t = t;
    Raster eps;
    if (i < counts.scene) {
      rec.stage = Stage::kSceneConstruction;
      eps = cfg_scene(scene_expert, x, t, scene, cfg.scene_guidance).eps_hat;
    } else if (i < counts.scene + counts.fusion) {
      rec.stage = Stage::kFusion;
      SnfOutput out = snf_step(scene_expert, subject_expert, x, t, scene, subject, snf);
      if (cfg.fusion == FusionMode::kSnf) {
        eps = std::move(out.eps_fused);
      } else {
        eps = scale(add(out.subject.eps_hat, out.scene.eps_hat), 0.5);
      }
      rec.snf = std::move(out.record);
    } else {
      rec.stage = Stage::kSubjectEnhancement;
      eps = cfg.subject_stage_guidance
                ? cfg_subject(subject_expert, x, t, scene, subject, cfg.subject_guidance).eps_hat
                : subject_expert.predict(x, t, Condition{scene, subject});
    }
    x = ddim_step(x, eps, t, plan.next(i), ns);
    if (!x.all_finite()) {
      throw SamplingFailure(std::string("sampling produced a non-finite latent in stage ") +
                                std::to_string(static_cast<int>(rec.stage)) + " (" +
                                stage_name(rec.stage) + ") at step " + std::to_string(i),
                            static_cast<int>(rec.stage), i);
    }
    if (opts.keep_latents) rec.latent = x;
    trace.steps.push_back(std::move(rec));
  }
  trace.final = std::move(x);
  return trace;
}

SampleTrace run_pipeline(const Denoiser& scene_expert, const Denoiser& subject_expert,
                         std::optional<int> scene, std::optional<int> subject,
                         const PipelineConfig& cfg, const NoiseSchedule& ns,
                         const TimestepPlan& plan, const LatentShape& shape,
                         std::uint64_t seed, const RunOptions& opts) {
  SampleTrace trace = resume_pipeline(scene_expert, subject_expert, scene, subject, cfg,
                                      ns, plan, initial_latent(shape, seed), 0, opts);
  trace.seed = seed;
  return trace;
}

SampleTrace run_text_only(const Denoiser& scene_expert, std::optional<int> scene,
                          const PipelineConfig& cfg, const NoiseSchedule& ns,
                          const TimestepPlan& plan, const LatentShape& shape,
                          std::uint64_t seed, const RunOptions& opts) {
  PipelineConfig text_only = cfg;
  text_only.stages.alpha = 1.0;
  text_only.stages.beta = 1.0;
  return run_pipeline(scene_expert, scene_expert, scene, std::nullopt, text_only, ns,
                      plan, shape, seed, opts);
}

}  // namespace fusionlab
