#include "fusionlab/guidance.h"

#include <cmath>
#include <stdexcept>

namespace fusionlab {

void GuidanceConfig::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("GuidanceConfig: guidance scale must be positive");
  }
}

GuidedNoise cfg_scene(const Denoiser& d, const Raster& x_t, int t,
                      std::optional<int> scene, const GuidanceConfig& g) {
  g.validate();
  const Raster uncond = d.predict(x_t, t, Condition::null());
  const Raster cond = d.predict(x_t, t, Condition{scene, std::nullopt});
  Raster response = sub(cond, uncond);
  Raster eps_hat = axpy(uncond, g.scale, response);
  return {std::move(eps_hat), std::move(response)};
}

GuidedNoise cfg_subject(const Denoiser& d, const Raster& x_t, int t,
                        std::optional<int> scene, std::optional<int> subject,
                        const GuidanceConfig& g) {
  g.validate();
  const Raster scene_only = d.predict(x_t, t, Condition{scene, std::nullopt});
  const Raster full = d.predict(x_t, t, Condition{scene, subject});
  Raster response = sub(full, scene_only);
  const Raster anchor = g.anchor == SubjectAnchor::kUnconditional
                            ? d.predict(x_t, t, Condition::null())
                            : scene_only;
  Raster eps_hat = axpy(anchor, g.scale, response);
  return {std::move(eps_hat), std::move(response)};
}

}  // namespace fusionlab
