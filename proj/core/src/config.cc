#include "fusionlab/config.h"

#include <stdexcept>

#include "canonical_json.h"

#ifndef FUSIONLAB_VERSION
#define FUSIONLAB_VERSION "0.0.0"
#endif

namespace fusionlab {

using detail::json;

const char* tool_version() { return "fusionlab " FUSIONLAB_VERSION; }

TrainConfig ExperimentConfig::default_scene_training() {
  TrainConfig t;
  t.p_drop_subject = 0.0;
  t.p_drop_all = 0.2;
  t.seed = 1;
  return t;
}

TrainConfig ExperimentConfig::default_subject_training() {
  TrainConfig t;
  t.p_drop_subject = 0.2;
  t.p_drop_all = 0.0;
  t.seed = 2;
  return t;
}

void ExperimentConfig::validate() const {
  world.validate();
  build_schedule(schedule);
  make_plan(schedule.train_steps, pipeline.stages.infer_steps);
  pipeline.stages.validate();
  pipeline.scene_guidance.validate();
  pipeline.subject_guidance.validate();
  gaussian_kernel(pipeline.kernel_size, pipeline.kernel_sigma);
  world.scene_index(scene);
  world.subject_index(subject);
  if (denoiser == DenoiserKind::kLearned && (scene_model.empty() || subject_model.empty())) {
    throw std::invalid_argument("config: learned denoisers need scene_model and subject_model");
  }
}

const char* fusion_name(FusionMode m) { return m == FusionMode::kSnf ? "snf" : "addition"; }

FusionMode parse_fusion(const std::string& name) {
  if (name == "snf") return FusionMode::kSnf;
  if (name == "addition") return FusionMode::kAddition;
  throw std::invalid_argument("unknown fusion mode '" + name + "'");
}

const char* anchor_name(SubjectAnchor a) {
  return a == SubjectAnchor::kUnconditional ? "unconditional" : "conditional";
}

SubjectAnchor parse_anchor(const std::string& name) {
  if (name == "unconditional") return SubjectAnchor::kUnconditional;
  if (name == "conditional") return SubjectAnchor::kConditional;
  throw std::invalid_argument("unknown guidance anchor '" + name + "'");
}

namespace {

json guidance_json(const GuidanceConfig& g) {
  return {{"scale", g.scale}, {"anchor", anchor_name(g.anchor)}};
}

GuidanceConfig guidance_from(const json& j, GuidanceConfig g) {
  detail::check_keys(j, {"scale", "anchor"}, "guidance");
  g.scale = detail::get_number(j, "scale", g.scale);
  g.anchor = parse_anchor(detail::get_string(j, "anchor", anchor_name(g.anchor)));
  return g;
}

json training_json(const TrainConfig& t) {
  return {{"steps", t.steps},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"p_drop_subject", t.p_drop_subject},
          {"p_drop_all", t.p_drop_all},
          {"hidden", t.hidden},
          {"seed", t.seed},
          {"log_every", t.log_every}};
}

TrainConfig training_from(const json& j, TrainConfig t) {
  detail::check_keys(j, {"steps", "batch_size", "learning_rate", "p_drop_subject",
                         "p_drop_all", "hidden", "seed", "log_every"},
                     "training");
  t.steps = detail::get_integer(j, "steps", t.steps);
  t.batch_size = static_cast<int>(detail::get_integer(j, "batch_size", t.batch_size));
  t.learning_rate = detail::get_number(j, "learning_rate", t.learning_rate);
  t.p_drop_subject = detail::get_number(j, "p_drop_subject", t.p_drop_subject);
  t.p_drop_all = detail::get_number(j, "p_drop_all", t.p_drop_all);
  if (j.contains("hidden")) {
    t.hidden.clear();
    for (const json& w : j.at("hidden")) {
      if (!w.is_number_integer()) throw std::invalid_argument("training: hidden widths must be integers");
      t.hidden.push_back(w.get<int>());
    }
  }
  t.seed = detail::get_unsigned(j, "seed", t.seed);
  t.log_every = detail::get_integer(j, "log_every", t.log_every);
  return t;
}

json world_json(const WorldConfig& w) {
  json positions = json::array();
  for (const Position& p : w.positions) positions.push_back({p.row, p.col});
  return {{"height", w.height},         {"width", w.width},
          {"channels", w.channels},     {"scenes", w.scenes},
          {"subjects", w.subjects},     {"glyph_size", w.glyph_size},
          {"positions", positions},     {"sigma0", w.sigma0}};
}

std::vector<std::string> string_list(const json& j, const char* where) {
  if (!j.is_array()) throw std::invalid_argument(std::string(where) + " must be a list");
  std::vector<std::string> out;
  for (const json& s : j) {
    if (!s.is_string()) throw std::invalid_argument(std::string(where) + " must hold strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

WorldConfig world_from(const json& j, WorldConfig w) {
  detail::check_keys(j, {"height", "width", "channels", "scenes", "subjects", "glyph_size",
                         "positions", "sigma0"},
                     "world");
  w.height = static_cast<int>(detail::get_integer(j, "height", w.height));
  w.width = static_cast<int>(detail::get_integer(j, "width", w.width));
  w.channels = static_cast<int>(detail::get_integer(j, "channels", w.channels));
  if (j.contains("scenes")) w.scenes = string_list(j.at("scenes"), "world.scenes");
  if (j.contains("subjects")) w.subjects = string_list(j.at("subjects"), "world.subjects");
  w.glyph_size = static_cast<int>(detail::get_integer(j, "glyph_size", w.glyph_size));
  if (j.contains("positions")) {
    w.positions.clear();
    for (const json& p : j.at("positions")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
          !p[1].is_number_integer()) {
        throw std::invalid_argument("world.positions entries must be [row, col]");
      }
      w.positions.push_back({p[0].get<int>(), p[1].get<int>()});
    }
  }
  w.sigma0 = detail::get_number(j, "sigma0", w.sigma0);
  return w;
}

}  // namespace

namespace detail {

json config_json(const ExperimentConfig& c) {
  const PipelineConfig& p = c.pipeline;
  return {
      {"world", world_json(c.world)},
      {"schedule",
       {{"train_steps", c.schedule.train_steps},
        {"beta_start", c.schedule.beta_start},
        {"beta_end", c.schedule.beta_end}}},
      {"stages",
       {{"alpha", p.stages.alpha}, {"beta", p.stages.beta}, {"infer_steps", p.stages.infer_steps}}},
      {"guidance",
       {{"scene", guidance_json(p.scene_guidance)},
        {"subject", guidance_json(p.subject_guidance)},
        {"subject_stage_guidance", p.subject_stage_guidance}}},
      {"fusion",
       {{"mode", fusion_name(p.fusion)},
        {"kernel_size", p.kernel_size},
        {"kernel_sigma", p.kernel_sigma}}},
      {"training",
       {{"scene_expert", training_json(c.scene_training)},
        {"subject_expert", training_json(c.subject_training)}}},
      {"denoiser",
       {{"kind", c.denoiser == DenoiserKind::kExact ? "exact" : "learned"},
        {"scene_model", c.scene_model},
        {"subject_model", c.subject_model}}},
      {"run", {{"scene", c.scene}, {"subject", c.subject}, {"seed", c.seed}}},
  };
}

ExperimentConfig config_from(const json& j) {
  check_keys(j, {"world", "schedule", "stages", "guidance", "fusion", "training", "denoiser",
                 "run"},
             "config");
  ExperimentConfig c;
  const json empty = json::object();
  auto section = [&](const char* key) -> const json& {
    auto it = j.find(key);
    return it == j.end() ? empty : *it;
  };
  c.world = world_from(section("world"), c.world);

  const json& s = section("schedule");
  check_keys(s, {"train_steps", "beta_start", "beta_end"}, "schedule");
  c.schedule.train_steps = static_cast<int>(get_integer(s, "train_steps", c.schedule.train_steps));
  c.schedule.beta_start = get_number(s, "beta_start", c.schedule.beta_start);
  c.schedule.beta_end = get_number(s, "beta_end", c.schedule.beta_end);

  PipelineConfig& p = c.pipeline;
  const json& st = section("stages");
  check_keys(st, {"alpha", "beta", "infer_steps"}, "stages");
  p.stages.alpha = get_number(st, "alpha", p.stages.alpha);
  p.stages.beta = get_number(st, "beta", p.stages.beta);
  p.stages.infer_steps = static_cast<int>(get_integer(st, "infer_steps", p.stages.infer_steps));

  const json& g = section("guidance");
  check_keys(g, {"scene", "subject", "subject_stage_guidance"}, "guidance");
  if (g.contains("scene")) p.scene_guidance = guidance_from(g.at("scene"), p.scene_guidance);
  if (g.contains("subject")) p.subject_guidance = guidance_from(g.at("subject"), p.subject_guidance);
  p.subject_stage_guidance = get_bool(g, "subject_stage_guidance", p.subject_stage_guidance);

  const json& f = section("fusion");
  check_keys(f, {"mode", "kernel_size", "kernel_sigma"}, "fusion");
  p.fusion = parse_fusion(get_string(f, "mode", fusion_name(p.fusion)));
  p.kernel_size = static_cast<int>(get_integer(f, "kernel_size", p.kernel_size));
  p.kernel_sigma = get_number(f, "kernel_sigma", p.kernel_sigma);

  const json& t = section("training");
  check_keys(t, {"scene_expert", "subject_expert"}, "training");
  if (t.contains("scene_expert")) c.scene_training = training_from(t.at("scene_expert"), c.scene_training);
  if (t.contains("subject_expert")) {
    c.subject_training = training_from(t.at("subject_expert"), c.subject_training);
  }

  const json& d = section("denoiser");
  check_keys(d, {"kind", "scene_model", "subject_model"}, "denoiser");
  const std::string kind = get_string(d, "kind", "exact");
  if (kind == "exact") {
    c.denoiser = DenoiserKind::kExact;
  } else if (kind == "learned") {
    c.denoiser = DenoiserKind::kLearned;
  } else {
    throw std::invalid_argument("denoiser.kind must be 'exact' or 'learned'");
  }
  c.scene_model = get_string(d, "scene_model", c.scene_model);
  c.subject_model = get_string(d, "subject_model", c.subject_model);

  const json& r = section("run");
  check_keys(r, {"scene", "subject", "seed"}, "run");
  c.scene = get_string(r, "scene", c.scene);
  c.subject = get_string(r, "subject", c.subject);
  c.seed = get_unsigned(r, "seed", c.seed);
  return c;
}

}  // namespace detail

std::string config_to_text(const ExperimentConfig& cfg) {
  return detail::canonical_dump(detail::config_json(cfg));
}

ExperimentConfig parse_config(std::string_view text) {
  return detail::config_from(detail::parse_json(text));
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(detail::read_text_file(path));
}

}  // namespace fusionlab
