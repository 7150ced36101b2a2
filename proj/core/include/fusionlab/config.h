#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "fusionlab/mlp.h"
#include "fusionlab/pipeline.h"
#include "fusionlab/schedule.h"
#include "fusionlab/world.h"

namespace fusionlab {

const char* tool_version();

enum class DenoiserKind { kExact, kLearned };

// Everything a run depends on. The text form is canonical JSON; missing
// fields take the defaults below and unknown fields are rejected.
struct ExperimentConfig {
  WorldConfig world;
  ScheduleConfig schedule;
  PipelineConfig pipeline;
  TrainConfig scene_training = default_scene_training();
  TrainConfig subject_training = default_subject_training();
  DenoiserKind denoiser = DenoiserKind::kExact;
  std::string scene_model;    // parameter files for DenoiserKind::kLearned
  std::string subject_model;
  std::string scene = "horizontal_gradient";
  std::string subject = "cross";
  std::uint64_t seed = 0;

  static TrainConfig default_scene_training();
  static TrainConfig default_subject_training();

  // World, schedule, stage and guidance checks plus scene/subject lookup.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

std::string config_to_text(const ExperimentConfig& cfg);
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

const char* fusion_name(FusionMode m);
FusionMode parse_fusion(const std::string& name);
const char* anchor_name(SubjectAnchor a);
SubjectAnchor parse_anchor(const std::string& name);

}  // namespace fusionlab
