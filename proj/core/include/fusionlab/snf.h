#pragma once

#include <optional>

#include "fusionlab/denoiser.h"
#include "fusionlab/grid.h"
#include "fusionlab/guidance.h"

namespace fusionlab {

// Single-channel, nonnegative.
using SalienceMap = Raster;
// Single-channel, entries exactly 0 (scene expert) or 1 (subject expert).
using FusionMask = Raster;

// Smooth(Abs(response)). Multi-channel responses are reduced to the
// per-pixel mean of absolute values before smoothing.
SalienceMap salience(const Raster& response, const Kernel2D& kernel);

// 1 where softmax(omega_s) >= softmax(omega_t), else 0. Exact ties go to the
// subject expert.
FusionMask fusion_mask(const SalienceMap& omega_t, const SalienceMap& omega_s);

// mask * eps_s + (1 - mask) * eps_t; the mask broadcasts over channels.
Raster fuse_noise(const FusionMask& mask, const Raster& eps_s, const Raster& eps_t);

struct SnfRecord {
  SalienceMap omega_t;
  SalienceMap omega_s;
  FusionMask mask;
};

struct SnfOutput {
  Raster eps_fused;
  GuidedNoise scene;
  GuidedNoise subject;
  SnfRecord record;
};

// Test hook: replaces the computed mask.
enum class MaskOverride { kNone, kAllSubject, kAllScene };

struct SnfSettings {
  GuidanceConfig scene_guidance;
  GuidanceConfig subject_guidance;
  Kernel2D kernel = gaussian_kernel(3, 1.0);
  MaskOverride mask_override = MaskOverride::kNone;
};

// One fusion step: both experts see the same x_t.
SnfOutput snf_step(const Denoiser& scene_expert, const Denoiser& subject_expert,
                   const Raster& x_t, int t, std::optional<int> scene,
                   std::optional<int> subject, const SnfSettings& settings);

}  // namespace fusionlab
