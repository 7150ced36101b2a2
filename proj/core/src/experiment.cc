#include "fusionlab/experiment.h"

#include <stdexcept>

#include "fusionlab/mlp.h"

namespace fusionlab {

namespace {

std::shared_ptr<const Denoiser> load_learned(const std::string& path, const WorldConfig& w,
                                             const NoiseSchedule& s) {
  auto m = std::make_shared<MlpDenoiser>(load_mlp(path));
  const MlpArchitecture& a = m->architecture();
  if (a.height != w.height || a.width != w.width || a.channels != w.channels ||
      a.scene_count != static_cast<int>(w.scenes.size()) ||
      a.subject_count != static_cast<int>(w.subjects.size()) ||
      a.train_steps != s.train_steps()) {
    throw std::invalid_argument("model " + path + " does not match the configured world");
  }
  return m;
}

}  // namespace

ExperimentContext make_context(const ExperimentConfig& cfg) {
  cfg.validate();
  NoiseSchedule schedule = build_schedule(cfg.schedule);
  ExperimentContext ctx{cfg.world, build_gmm(cfg.world), schedule,
                        make_plan(cfg.schedule.train_steps, cfg.pipeline.stages.infer_steps),
                        nullptr, nullptr};
  if (cfg.denoiser == DenoiserKind::kExact) {
    ctx.scene_expert =
        std::make_shared<GmmDenoiser>(ctx.gmm, schedule, Vocabulary::kSceneOnly);
    ctx.subject_expert =
        std::make_shared<GmmDenoiser>(ctx.gmm, schedule, Vocabulary::kSceneAndSubject);
  } else {
    ctx.scene_expert = load_learned(cfg.scene_model, cfg.world, schedule);
    ctx.subject_expert = load_learned(cfg.subject_model, cfg.world, schedule);
  }
  return ctx;
}

SampleTrace run_experiment(const ExperimentContext& ctx, const PipelineConfig& pipeline,
                           int scene, int subject, std::uint64_t seed,
                           const RunOptions& opts) {
  if (pipeline.stages.infer_steps != ctx.plan.size()) {
    throw std::invalid_argument("run_experiment: infer_steps differs from the context plan");
  }
  return run_pipeline(*ctx.scene_expert, *ctx.subject_expert, scene, subject, pipeline,
                      ctx.schedule, ctx.plan, ctx.shape(), seed, opts);
}

}  // namespace fusionlab
