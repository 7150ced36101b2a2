#pragma once

#include <optional>
#include <vector>

#include "fusionlab/grid.h"
#include "fusionlab/schedule.h"
#include "fusionlab/world.h"

namespace fusionlab {

// Epsilon-prediction model eps(x_t | t, cond). Implementations must be
// deterministic and return a raster shaped like x_t.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Raster predict(const Raster& x_t, int t, const Condition& cond) const = 0;
};

// Posterior p(k | x_t) over mixture components. Each component's x_t
// marginal is N(sqrt(abar) mu_k, (abar sigma0^2 + 1 - abar) I).
std::vector<double> gmm_posterior(const GmmSpec& gmm, const Raster& x_t, int t,
                                  const NoiseSchedule& s);

// Posterior mean E[x0 | x_t] of the mixture.
Raster gmm_posterior_mean(const GmmSpec& gmm, const Raster& x_t, int t,
                          const NoiseSchedule& s);

// Bayes-optimal epsilon prediction for the mixture. Requires t >= 1.
Raster gmm_denoise(const GmmSpec& gmm, const Raster& x_t, int t,
                   const NoiseSchedule& s);

// Which condition fields a model was trained to understand. A scene-only
// model (the scene expert) rejects conditions that name a subject.
enum class Vocabulary { kSceneOnly, kSceneAndSubject };

// Exact denoiser of a GmmSpec: predict(x, t, c) = gmm_denoise(restrict(gmm, c)).
class GmmDenoiser : public Denoiser {
 public:
  GmmDenoiser(const GmmSpec& gmm, NoiseSchedule schedule, Vocabulary vocabulary);

  Raster predict(const Raster& x_t, int t, const Condition& cond) const override;

  const GmmSpec& restricted(const Condition& cond) const;
  Vocabulary vocabulary() const { return vocabulary_; }
  const NoiseSchedule& schedule() const { return schedule_; }

 private:
  std::size_t slot(const Condition& cond) const;

  int scene_count_;
  int subject_count_;
  NoiseSchedule schedule_;
  Vocabulary vocabulary_;
  // Indexed by (scene + 1) * (subject_count + 1) + (subject + 1), with -1
  // standing for null. Empty restrictions are left unset.
  std::vector<std::optional<GmmSpec>> restricted_;
};

}  // namespace fusionlab
