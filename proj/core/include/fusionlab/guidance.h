#pragma once

#include <optional>

#include "fusionlab/denoiser.h"
#include "fusionlab/grid.h"

namespace fusionlab {

// Base term of the subject-expert guidance. kUnconditional uses eps(x|null);
// kConditional anchors at eps(x|scene) instead.
enum class SubjectAnchor { kUnconditional, kConditional };

struct GuidanceConfig {
  double scale = 3.0;
  SubjectAnchor anchor = SubjectAnchor::kUnconditional;

  void validate() const;
  bool operator==(const GuidanceConfig&) const = default;
};

// Guided prediction eps_hat = base + scale * response.
struct GuidedNoise {
  Raster eps_hat;
  Raster response;
};

// Scene guidance: R_T = eps(x|c) - eps(x|null), eps_hat = eps(x|null) + s R_T.
GuidedNoise cfg_scene(const Denoiser& d, const Raster& x_t, int t,
                      std::optional<int> scene, const GuidanceConfig& g);

// Subject guidance, which ablates only the subject:
// R_S = eps(x|c, r) - eps(x|c), eps_hat = anchor + s R_S.
GuidedNoise cfg_subject(const Denoiser& d, const Raster& x_t, int t,
                        std::optional<int> scene, std::optional<int> subject,
                        const GuidanceConfig& g);

}  // namespace fusionlab
