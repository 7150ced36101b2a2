#include "fusionlab/denoiser.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fusionlab/error.h"

namespace fusionlab {

std::vector<double> gmm_posterior(const GmmSpec& gmm, const Raster& x_t, int t,
                                  const NoiseSchedule& s) {
  if (gmm.components.empty()) {
    throw std::invalid_argument("gmm_posterior: empty mixture");
  }
  if (t < 0 || t > s.train_steps()) {
    throw std::invalid_argument("gmm_posterior: timestep out of range");
  }
  const double a = s.alpha_bar(t);
  const double sa = std::sqrt(a);
  const double var = a * gmm.sigma0 * gmm.sigma0 + (1.0 - a);
  std::vector<double> logw(gmm.components.size());
  for (std::size_t k = 0; k < gmm.components.size(); ++k) {
    const Raster& mu = gmm.components[k].mean;
    if (!mu.same_shape(x_t)) {
      throw std::invalid_argument("gmm_posterior: shape mismatch");
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < x_t.size(); ++i) {
      const double d = x_t[i] - sa * mu[i];
      d2 += d * d;
    }
    logw[k] = std::log(gmm.components[k].weight) - d2 / (2.0 * var);
  }
  const double peak = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& v : logw) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : logw) v /= total;
  return logw;
}

Raster gmm_posterior_mean(const GmmSpec& gmm, const Raster& x_t, int t,
                          const NoiseSchedule& s) {
  const std::vector<double> post = gmm_posterior(gmm, x_t, t, s);
  const double a = s.alpha_bar(t);
  const double sa = std::sqrt(a);
  const double var = a * gmm.sigma0 * gmm.sigma0 + (1.0 - a);
  // Per-component posterior mean is mu + gain * (x_t - sqrt(abar) mu).
  const double gain = sa * gmm.sigma0 * gmm.sigma0 / var;
  Raster mean_mu = Raster::constant_like(x_t, 0.0);
  for (std::size_t k = 0; k < post.size(); ++k) {
    if (post[k] == 0.0) continue;
    const Raster& mu = gmm.components[k].mean;
    for (std::size_t i = 0; i < mean_mu.size(); ++i) mean_mu[i] += post[k] * mu[i];
  }
  Raster out = x_t;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - gain * sa) * mean_mu[i] + gain * x_t[i];
  }
  return out;
}

Raster gmm_denoise(const GmmSpec& gmm, const Raster& x_t, int t,
                   const NoiseSchedule& s) {
  if (t < 1 || t > s.train_steps()) {
    throw std::invalid_argument("gmm_denoise: need 1 <= t <= T_train");
  }
  const Raster x0 = gmm_posterior_mean(gmm, x_t, t, s);
  const double a = s.alpha_bar(t);
  const double sa = std::sqrt(a);
  const double inv = 1.0 / std::sqrt(1.0 - a);
  Raster eps = x_t;
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (x_t[i] - sa * x0[i]) * inv;
  return eps;
}

GmmDenoiser::GmmDenoiser(const GmmSpec& gmm, NoiseSchedule schedule,
                         Vocabulary vocabulary)
    : scene_count_(gmm.scene_count),
      subject_count_(gmm.subject_count),
      schedule_(std::move(schedule)),
      vocabulary_(vocabulary) {
  restricted_.resize(static_cast<std::size_t>((scene_count_ + 1) * (subject_count_ + 1)));
  for (int s = -1; s < scene_count_; ++s) {
    for (int u = -1; u < subject_count_; ++u) {
      Condition c;
      if (s >= 0) c.scene = s;
      if (u >= 0) c.subject = u;
      try {
        restricted_[slot(c)] = restrict(gmm, c);
      } catch (const EmptyConditionError&) {
      }
    }
  }
}

std::size_t GmmDenoiser::slot(const Condition& cond) const {
  const int s = cond.scene.value_or(-1);
  const int u = cond.subject.value_or(-1);
  if (s < -1 || s >= scene_count_ || u < -1 || u >= subject_count_) {
    throw std::invalid_argument("GmmDenoiser: condition id out of range");
  }
  return static_cast<std::size_t>((s + 1) * (subject_count_ + 1) + (u + 1));
}

const GmmSpec& GmmDenoiser::restricted(const Condition& cond) const {
  if (vocabulary_ == Vocabulary::kSceneOnly && cond.subject) {
    throw std::invalid_argument(
        "GmmDenoiser: scene-only model cannot take a subject condition");
  }
  const auto& entry = restricted_[slot(cond)];
  if (!entry) {
    throw EmptyConditionError("GmmDenoiser: condition leaves no mixture components");
  }
  return *entry;
}

Raster GmmDenoiser::predict(const Raster& x_t, int t, const Condition& cond) const {
  return gmm_denoise(restricted(cond), x_t, t, schedule_);
}

}  // namespace fusionlab
