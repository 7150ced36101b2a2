#include "fusionlab/snf.h"

#include <stdexcept>

namespace fusionlab {

SalienceMap salience(const Raster& response, const Kernel2D& kernel) {
  return convolve_smooth(mean_abs_channels(response), kernel);
}

FusionMask fusion_mask(const SalienceMap& omega_t, const SalienceMap& omega_s) {
  if (!omega_t.same_shape(omega_s)) {
    throw std::invalid_argument("fusion_mask: salience maps differ in shape");
  }
  const Raster p_t = softmax_over_pixels(omega_t);
  const Raster p_s = softmax_over_pixels(omega_s);
  FusionMask mask = Raster::constant_like(omega_t, 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = p_s[i] >= p_t[i] ? 1.0 : 0.0;
  return mask;
}

Raster fuse_noise(const FusionMask& mask, const Raster& eps_s, const Raster& eps_t) {
  if (!eps_s.same_shape(eps_t) || mask.channels() != 1 ||
      mask.height() != eps_s.height() || mask.width() != eps_s.width()) {
    throw std::invalid_argument("fuse_noise: shape mismatch");
  }
  Raster out = eps_s;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const double m = mask.at(y, x);
      for (int c = 0; c < out.channels(); ++c) {
        out.at(y, x, c) = m * eps_s.at(y, x, c) + (1.0 - m) * eps_t.at(y, x, c);
      }
    }
  }
  return out;
}

SnfOutput snf_step(const Denoiser& scene_expert, const Denoiser& subject_expert,
                   const Raster& x_t, int t, std::optional<int> scene,
                   std::optional<int> subject, const SnfSettings& settings) {
  GuidedNoise g_t = cfg_scene(scene_expert, x_t, t, scene, settings.scene_guidance);
  GuidedNoise g_s = cfg_subject(subject_expert, x_t, t, scene, subject,
                                settings.subject_guidance);
  SnfRecord rec;
  rec.omega_t = salience(g_t.response, settings.kernel);
  rec.omega_s = salience(g_s.response, settings.kernel);
  switch (settings.mask_override) {
    case MaskOverride::kNone:
      rec.mask = fusion_mask(rec.omega_t, rec.omega_s);
      break;
    case MaskOverride::kAllSubject:
      rec.mask = Raster::constant_like(rec.omega_t, 1.0);
      break;
    case MaskOverride::kAllScene:
      rec.mask = Raster::constant_like(rec.omega_t, 0.0);
      break;
  }
  Raster fused = fuse_noise(rec.mask, g_s.eps_hat, g_t.eps_hat);
  return {std::move(fused), std::move(g_t), std::move(g_s), std::move(rec)};
}

}  // namespace fusionlab
