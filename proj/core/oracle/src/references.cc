#include "fusionlab/oracle/references.h"

#include <cmath>
#include <stdexcept>

namespace fusionlab::oracle {

std::vector<double> alpha_bar_direct(const std::vector<double>& betas) {
  std::vector<double> out(betas.size() + 1, 1.0);
  for (std::size_t t = 1; t <= betas.size(); ++t) {
    long double p = 1.0L;
    for (std::size_t s = 0; s < t; ++s) p *= 1.0L - betas[s];
    out[t] = static_cast<double>(p);
  }
  return out;
}

std::vector<double> naive_convolve(const std::vector<double>& img, int h, int w,
                                   const std::vector<double>& kernel, int ksize) {
  const int r = ksize / 2;
  std::vector<double> out(img.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < ksize; ++ky) {
        for (int kx = 0; kx < ksize; ++kx) {
          int sy = y + ky - r;
          int sx = x + kx - r;
          if (sy < 0) sy = 0;
          if (sy > h - 1) sy = h - 1;
          if (sx < 0) sx = 0;
          if (sx > w - 1) sx = w - 1;
          acc += kernel[ky * ksize + kx] * img[sy * w + sx];
        }
      }
      out[y * w + x] = acc;
    }
  }
  return out;
}

std::vector<double> direct_softmax(const std::vector<double>& v) {
  long double total = 0.0L;
  for (double x : v) total += std::exp(static_cast<long double>(x));
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(static_cast<double>(std::exp(static_cast<long double>(x)) / total));
  return out;
}

std::vector<double> brute_force_mask(const std::vector<double>& omega_t,
                                     const std::vector<double>& omega_s) {
  const std::vector<double> pt = direct_softmax(omega_t);
  const std::vector<double> ps = direct_softmax(omega_s);
  std::vector<double> mask(pt.size());
  for (std::size_t i = 0; i < pt.size(); ++i) mask[i] = ps[i] >= pt[i] ? 1.0 : 0.0;
  return mask;
}

std::vector<double> density_ratio_posterior(const GmmSpec& gmm, const Raster& x_t, int t,
                                            const NoiseSchedule& s) {
  const long double a = s.alpha_bar(t);
  const long double sa = std::sqrt(a);
  const long double v = a * gmm.sigma0 * gmm.sigma0 + (1.0L - a);
  const std::size_t K = gmm.components.size();
  std::vector<long double> d2(K, 0.0L);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < x_t.size(); ++i) {
      const long double d = x_t[i] - sa * gmm.components[k].mean[i];
      d2[k] += d * d;
    }
  }
  std::vector<double> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    long double denom = 0.0L;
    for (std::size_t j = 0; j < K; ++j) {
      denom += (static_cast<long double>(gmm.components[j].weight) / gmm.components[k].weight) *
               std::exp((d2[k] - d2[j]) / (2.0L * v));
    }
    out[k] = std::isinf(denom) ? 0.0 : static_cast<double>(1.0L / denom);
  }
  return out;
}

double quadrature_posterior_mean_1d(const GmmSpec& gmm, double x_t, int t,
                                    const NoiseSchedule& s, int intervals) {
  if (intervals % 2) ++intervals;
  const double a = s.alpha_bar(t);
  const double sa = std::sqrt(a);
  const double s0 = gmm.sigma0;
  const double noise_var = 1.0 - a;
  // The posterior over x0 is concentrated near the prior components and near
  // x_t / sqrt(a); cover both with a generous margin.
  double lo = x_t / sa, hi = x_t / sa;
  for (const GmmComponent& c : gmm.components) {
    lo = std::min(lo, c.mean[0]);
    hi = std::max(hi, c.mean[0]);
  }
  lo -= 14.0 * s0;
  hi += 14.0 * s0;
  auto log_integrand = [&](double x0) {
    long double prior = 0.0L;
    for (const GmmComponent& c : gmm.components) {
      const long double z = (x0 - c.mean[0]) / s0;
      prior += c.weight * std::exp(-0.5L * z * z);
    }
    const long double r = x_t - sa * x0;
    return std::log(prior) - r * r / (2.0L * noise_var);
  };
  const double h = (hi - lo) / intervals;
  std::vector<long double> logf(static_cast<std::size_t>(intervals) + 1);
  long double peak = -INFINITY;
  for (int i = 0; i <= intervals; ++i) {
    logf[static_cast<std::size_t>(i)] = log_integrand(lo + i * h);
    peak = std::max(peak, logf[static_cast<std::size_t>(i)]);
  }
  long double num = 0.0L, den = 0.0L;
  for (int i = 0; i <= intervals; ++i) {
    const long double wgt = (i == 0 || i == intervals) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    const long double f = std::exp(logf[static_cast<std::size_t>(i)] - peak);
    num += wgt * f * (lo + i * h);
    den += wgt * f;
  }
  return static_cast<double>(num / den);
}

double quadrature_eps_1d(const GmmSpec& gmm, double x_t, int t, const NoiseSchedule& s,
                         int intervals) {
  const double a = s.alpha_bar(t);
  const double x0 = quadrature_posterior_mean_1d(gmm, x_t, t, s, intervals);
  return (x_t - std::sqrt(a) * x0) / std::sqrt(1.0 - a);
}

std::vector<double> finite_difference_gradient(const MlpDenoiser& m,
                                               const std::vector<NoiseSample>& samples,
                                               double h) {
  MlpDenoiser probe = m;
  std::vector<double> grad(probe.parameters().size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double orig = probe.parameters()[i];
    probe.parameters()[i] = orig + h;
    const double up = noise_loss(probe, samples);
    probe.parameters()[i] = orig - h;
    const double down = noise_loss(probe, samples);
    probe.parameters()[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> reference_snf_step(const Denoiser& scene_expert,
                                       const Denoiser& subject_expert, const Raster& x_t,
                                       int t, int scene, int subject, double scale_t,
                                       double scale_s, double kernel_sigma) {
  const Raster t_null = scene_expert.predict(x_t, t, Condition{});
  const Raster t_cond = scene_expert.predict(x_t, t, Condition{scene, std::nullopt});
  const Raster s_null = subject_expert.predict(x_t, t, Condition{});
  const Raster s_scene = subject_expert.predict(x_t, t, Condition{scene, std::nullopt});
  const Raster s_full = subject_expert.predict(x_t, t, Condition{scene, subject});
  const int H = x_t.height(), W = x_t.width(), C = x_t.channels();
  const std::size_t n = x_t.size();
  std::vector<double> eps_t(n), eps_s(n), abs_t(static_cast<std::size_t>(H * W)),
      abs_s(static_cast<std::size_t>(H * W));
  for (std::size_t i = 0; i < n; ++i) {
    const double rt = t_cond[i] - t_null[i];
    const double rs = s_full[i] - s_scene[i];
    eps_t[i] = t_null[i] + scale_t * rt;
    eps_s[i] = s_null[i] + scale_s * rs;
    abs_t[i / C] += std::fabs(rt) / C;
    abs_s[i / C] += std::fabs(rs) / C;
  }
  std::vector<double> kernel(9);
  double ksum = 0.0;
  for (int ky = -1; ky <= 1; ++ky) {
    for (int kx = -1; kx <= 1; ++kx) {
      const double v = std::exp(-(ky * ky + kx * kx) / (2.0 * kernel_sigma * kernel_sigma));
      kernel[static_cast<std::size_t>((ky + 1) * 3 + kx + 1)] = v;
      ksum += v;
    }
  }
  for (double& v : kernel) v /= ksum;
  const std::vector<double> mask = brute_force_mask(naive_convolve(abs_t, H, W, kernel, 3),
                                                    naive_convolve(abs_s, H, W, kernel, 3));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mask[i / C];
    out[i] = m * eps_s[i] + (1.0 - m) * eps_t[i];
  }
  return out;
}

std::vector<double> reference_ddim(const std::vector<double>& x, const std::vector<double>& eps,
                                   double abar_t, double abar_prev) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = (x[i] - std::sqrt(1.0 - abar_t) * eps[i]) / std::sqrt(abar_t);
    out[i] = std::sqrt(abar_prev) * x0 + std::sqrt(1.0 - abar_prev) * eps[i];
  }
  return out;
}

}  // namespace fusionlab::oracle
