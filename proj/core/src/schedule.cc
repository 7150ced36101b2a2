#include "fusionlab/schedule.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fusionlab {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) {
    throw std::invalid_argument("NoiseSchedule: need at least one step");
  }
  alpha_bars_.reserve(betas_.size() + 1);
  alpha_bars_.push_back(1.0);
  double prod = 1.0;
  for (double b : betas_) {
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("NoiseSchedule: betas must lie in (0, 1)");
    }
    prod *= 1.0 - b;
    alpha_bars_.push_back(prod);
  }
}

NoiseSchedule build_schedule(int train_steps, double beta_start, double beta_end) {
  if (train_steps < 1) {
    throw std::invalid_argument("build_schedule: train_steps must be >= 1");
  }
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw std::invalid_argument(
        "build_schedule: need 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(train_steps));
  for (int i = 0; i < train_steps; ++i) {
    const double frac = train_steps == 1 ? 0.0 : static_cast<double>(i) / (train_steps - 1);
    betas[static_cast<std::size_t>(i)] = beta_start + frac * (beta_end - beta_start);
  }
  return NoiseSchedule(std::move(betas));
}

namespace {

void check_t(int t, const NoiseSchedule& s, const char* op) {
  if (t < 0 || t > s.train_steps()) {
    throw std::invalid_argument(std::string(op) + ": timestep " +
                                std::to_string(t) + " out of range [0, " +
                                std::to_string(s.train_steps()) + "]");
  }
}

}  // namespace

Raster forward_noise(const Raster& x0, int t, const Raster& eps,
                     const NoiseSchedule& s) {
  check_t(t, s, "forward_noise");
  const double a = s.alpha_bar(t);
  return axpy(scale(x0, std::sqrt(a)), std::sqrt(1.0 - a), eps);
}

Raster predict_x0(const Raster& x_t, const Raster& eps_hat, int t,
                  const NoiseSchedule& s) {
  check_t(t, s, "predict_x0");
  const double a = s.alpha_bar(t);
  return scale(axpy(x_t, -std::sqrt(1.0 - a), eps_hat), 1.0 / std::sqrt(a));
}

Raster ddim_step(const Raster& x_t, const Raster& eps_hat, int t, int t_prev,
                 const NoiseSchedule& s) {
  check_t(t, s, "ddim_step");
  check_t(t_prev, s, "ddim_step");
  if (t_prev > t) {
    throw std::invalid_argument("ddim_step: t_prev must not exceed t");
  }
  if (!x_t.same_shape(eps_hat)) {
    throw std::invalid_argument("ddim_step: shape mismatch");
  }
  if (t_prev == t) return x_t;
  const double a_prev = s.alpha_bar(t_prev);
  const Raster x0 = predict_x0(x_t, eps_hat, t, s);
  return axpy(scale(x0, std::sqrt(a_prev)), std::sqrt(1.0 - a_prev), eps_hat);
}

TimestepPlan make_plan(int train_steps, int infer_steps) {
  if (infer_steps < 1 || infer_steps > train_steps) {
    throw std::invalid_argument("make_plan: need 1 <= T_infer <= T_train");
  }
  TimestepPlan plan;
  plan.steps.reserve(static_cast<std::size_t>(infer_steps));
  for (int i = 0; i < infer_steps; ++i) {
    const long long k = infer_steps - i;
    plan.steps.push_back(static_cast<int>(k * train_steps / infer_steps));
  }
  return plan;
}

}  // namespace fusionlab
