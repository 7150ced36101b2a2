#pragma once

// Slow, deliberately plain reimplementations. Nothing here calls the
// optimized code path it is used to check.

#include <cstdint>
#include <optional>
#include <vector>

#include "fusionlab/denoiser.h"
#include "fusionlab/mlp.h"
#include "fusionlab/schedule.h"
#include "fusionlab/world.h"

namespace fusionlab::oracle {

// prod_{s <= t} (1 - beta_s), recomputed from scratch for every t.
std::vector<double> alpha_bar_direct(const std::vector<double>& betas);

// Replicate-padded correlation with explicit bounds checks.
std::vector<double> naive_convolve(const std::vector<double>& img, int h, int w,
                                   const std::vector<double>& kernel, int ksize);

// exp(v_i) / sum exp(v_j) in long double without shifting.
std::vector<double> direct_softmax(const std::vector<double>& v);

// mask_i = 1 iff softmax(omega_s)_i >= softmax(omega_t)_i.
std::vector<double> brute_force_mask(const std::vector<double>& omega_t,
                                     const std::vector<double>& omega_s);

// p_k = 1 / sum_j (w_j / w_k) exp((|x - a mu_k|^2 - |x - a mu_j|^2) / 2v).
std::vector<double> density_ratio_posterior(const GmmSpec& gmm, const Raster& x_t, int t,
                                            const NoiseSchedule& s);

// E[x0 | x_t] for a one-pixel mixture by composite Simpson quadrature over
// x0, then converted to the implied noise prediction.
double quadrature_posterior_mean_1d(const GmmSpec& gmm, double x_t, int t,
                                    const NoiseSchedule& s, int intervals = 20000);
double quadrature_eps_1d(const GmmSpec& gmm, double x_t, int t, const NoiseSchedule& s,
                         int intervals = 20000);

// Central differences of noise_loss with respect to every parameter.
std::vector<double> finite_difference_gradient(const MlpDenoiser& m,
                                               const std::vector<NoiseSample>& samples,
                                               double h = 1e-6);

// Guided predictions, salience, mask and fused noise written out pixel by
// pixel from raw predictor calls.
std::vector<double> reference_snf_step(const Denoiser& scene_expert,
                                       const Denoiser& subject_expert, const Raster& x_t,
                                       int t, int scene, int subject, double scale_t,
                                       double scale_s, double kernel_sigma);

// One deterministic DDIM update written out from the update formula.
std::vector<double> reference_ddim(const std::vector<double>& x, const std::vector<double>& eps,
                                   double abar_t, double abar_prev);

}  // namespace fusionlab::oracle
