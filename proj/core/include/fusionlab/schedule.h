#pragma once

#include <vector>

#include "fusionlab/grid.h"

namespace fusionlab {

// Linear-beta diffusion schedule. alpha_bar(0) == 1 and alpha_bar(t) is the
// running product of (1 - beta_i) for i = 1..t.
class NoiseSchedule {
 public:
  NoiseSchedule(std::vector<double> betas);

  int train_steps() const { return static_cast<int>(betas_.size()); }
  // t in [1, train_steps()].
  double beta(int t) const { return betas_.at(static_cast<std::size_t>(t - 1)); }
  // t in [0, train_steps()].
  double alpha_bar(int t) const { return alpha_bars_.at(static_cast<std::size_t>(t)); }
  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& alpha_bars() const { return alpha_bars_; }

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

struct ScheduleConfig {
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  bool operator==(const ScheduleConfig&) const = default;
};

NoiseSchedule build_schedule(int train_steps, double beta_start, double beta_end);
inline NoiseSchedule build_schedule(const ScheduleConfig& cfg) {
  return build_schedule(cfg.train_steps, cfg.beta_start, cfg.beta_end);
}

// sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps.
Raster forward_noise(const Raster& x0, int t, const Raster& eps,
                     const NoiseSchedule& s);

// Clean-sample estimate implied by an epsilon prediction at step t.
Raster predict_x0(const Raster& x_t, const Raster& eps_hat, int t,
                  const NoiseSchedule& s);

// Deterministic (eta = 0) DDIM update from t to t_prev <= t.
Raster ddim_step(const Raster& x_t, const Raster& eps_hat, int t, int t_prev,
                 const NoiseSchedule& s);

// Strictly decreasing training timesteps visited by the sampler. The step
// after the last entry is t = 0.
struct TimestepPlan {
  std::vector<int> steps;

  int size() const { return static_cast<int>(steps.size()); }
  int at(int i) const { return steps.at(static_cast<std::size_t>(i)); }
  int next(int i) const {
    return i + 1 < size() ? steps[static_cast<std::size_t>(i + 1)] : 0;
  }
};

TimestepPlan make_plan(int train_steps, int infer_steps);

}  // namespace fusionlab
