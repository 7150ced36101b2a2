#include "fusionlab/oracle/suites.h"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fusionlab/denoiser.h"
#include "fusionlab/grid.h"
#include "fusionlab/mlp.h"
#include "fusionlab/oracle/references.h"
#include "fusionlab/schedule.h"
#include "fusionlab/snf.h"
#include "fusionlab/world.h"

namespace fusionlab::oracle {

namespace {

using Clock = std::chrono::steady_clock;

SuiteResult finish(SuiteResult r, Clock::time_point start, double tol, const char* unit) {
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.detail.empty()) {
    std::ostringstream ss;
    ss << r.checks << " checks, worst " << unit << " " << r.worst << " (tol " << tol << ")";
    r.detail = ss.str();
  }
  return r;
}

Raster random_raster(int h, int w, int c, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Raster r(h, w, c);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = u(rng);
  return r;
}

GmmSpec random_1d_mixture(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kd(1, 5);
  std::uniform_real_distribution<double> mean(-1.0, 1.5), wgt(0.1, 1.0), sig(0.03, 0.3);
  GmmSpec g;
  g.sigma0 = sig(rng);
  const int K = kd(rng);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    GmmComponent c;
    c.mean = Raster(1, 1, 1, mean(rng));
    c.weight = wgt(rng);
    total += c.weight;
    g.components.push_back(std::move(c));
  }
  for (GmmComponent& c : g.components) c.weight /= total;
  g.scene_count = 1;
  g.subject_count = 1;
  return g;
}

}  // namespace

SuiteResult denoiser_quadrature_suite(int probes, std::uint64_t seed) {
  const auto start = Clock::now();
  const double tol = 1e-6;
  SuiteResult r;
  r.name = "denoiser.quadrature";
  std::mt19937_64 rng(seed);
  const NoiseSchedule s = build_schedule(ScheduleConfig{});
  std::uniform_int_distribution<int> td(1, s.train_steps());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int p = 0; p < probes; ++p) {
    const GmmSpec g = random_1d_mixture(rng);
    const int t = p == 0 ? 1 : (p == 1 ? s.train_steps() : td(rng));
    // Half the probes come from the forward process, half are arbitrary.
    double x;
    if (p % 2 == 0) {
      std::mt19937_64 draw(seed + static_cast<std::uint64_t>(p));
      const double x0 = sample_world(g, draw).first[0];
      x = std::sqrt(s.alpha_bar(t)) * x0 + std::sqrt(1.0 - s.alpha_bar(t)) * normal(rng);
    } else {
      x = 3.0 * normal(rng);
    }
    const double got = gmm_denoise(g, Raster(1, 1, 1, x), t, s)[0];
    const double want = quadrature_eps_1d(g, x, t, s);
    r.worst = std::max(r.worst, std::fabs(got - want));
    ++r.checks;
  }
  r.passed = r.worst <= tol;
  return finish(r, start, tol, "|eps error|");
}

SuiteResult posterior_density_ratio_suite(int probes, std::uint64_t seed) {
  const auto start = Clock::now();
  const double tol = 1e-10;
  SuiteResult r;
  r.name = "denoiser.density_ratio";
  std::mt19937_64 rng(seed);
  const WorldConfig world;
  const GmmSpec full = build_gmm(world);
  const NoiseSchedule s = build_schedule(ScheduleConfig{});
  std::uniform_int_distribution<int> td(1, s.train_steps());
  std::normal_distribution<double> normal(0.0, 1.0);
  const Condition conds[] = {Condition{}, Condition{1, std::nullopt}, Condition{2, 3}};
  for (int p = 0; p < probes; ++p) {
    const GmmSpec g = restrict(full, conds[p % 3]);
    const int t = p == 0 ? 1 : td(rng);
    Raster x0 = sample_world(full, rng).first;
    Raster x = x0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::sqrt(s.alpha_bar(t)) * x0[i] + std::sqrt(1.0 - s.alpha_bar(t)) * normal(rng);
    }
    const std::vector<double> got = gmm_posterior(g, x, t, s);
    const std::vector<double> want = density_ratio_posterior(g, x, t, s);
    for (std::size_t k = 0; k < got.size(); ++k) {
      r.worst = std::max(r.worst, std::fabs(got[k] - want[k]));
    }
    ++r.checks;
  }
  r.passed = r.worst <= tol;
  return finish(r, start, tol, "|posterior error|");
}

SuiteResult snf_mask_suite(int pairs, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r;
  r.name = "snf.mask";
  std::mt19937_64 rng(seed);
  // Maps live on a dyadic grid and shifts are integers, so x + c is exact and
  // shift invariance can be demanded bit for bit.
  std::uniform_int_distribution<int> level(0, 3 * 1024), shift(-50, 50);
  auto dyadic_map = [&] {
    Raster m(8, 8, 1);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = level(rng) / 1024.0;
    return m;
  };
  int mismatches = 0, nonbinary = 0, shift_breaks = 0;
  double worst_sum = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const Raster ot = dyadic_map();
    // Every tenth pair compares a map with itself (all ties).
    const Raster os = p % 10 == 9 ? ot : dyadic_map();
    const FusionMask mask = fusion_mask(ot, os);
    if (mask.data() != brute_force_mask(ot.data(), os.data())) ++mismatches;
    for (double v : mask.values()) nonbinary += (v == 0.0 || v == 1.0) ? 0 : 1;
    for (const Raster* m : {&ot, &os}) {
      worst_sum = std::max(worst_sum, std::fabs(softmax_over_pixels(*m).sum() - 1.0));
    }
    const double ct = shift(rng), cs = shift(rng);
    const FusionMask shifted = fusion_mask(elementwise(ElementwiseOp::kAdd, ot, ct),
                                           elementwise(ElementwiseOp::kAdd, os, cs));
    if (!(shifted == mask)) ++shift_breaks;
    r.checks += 4;
  }
  r.worst = worst_sum;
  r.passed = mismatches == 0 && nonbinary == 0 && shift_breaks == 0 && worst_sum <= 1e-9;
  std::ostringstream ss;
  ss << pairs << " pairs: " << mismatches << " mask mismatches, " << nonbinary
     << " non-binary entries, " << shift_breaks << " shift-invariance breaks, worst |sum-1| "
     << worst_sum << " (tol 1e-09)";
  r.detail = ss.str();
  return finish(r, start, 1e-9, "");
}

SuiteResult gradient_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  const double tol = 1e-4;
  SuiteResult r;
  r.name = "mlp.gradient";
  MlpArchitecture arch;
  arch.height = 2;
  arch.width = 2;
  arch.channels = 1;
  arch.scene_count = 2;
  arch.subject_count = 2;
  arch.hidden = {6, 5};
  arch.train_steps = 1000;
  MlpDenoiser m(arch, seed);
  std::mt19937_64 rng(seed);
  // Nonzero biases so their gradients are exercised away from the init.
  std::normal_distribution<double> normal(0.0, 0.3);
  for (int l = 0; l < m.layer_count(); ++l) {
    for (std::size_t i = m.bias_offset(l); i < m.layer_end(l); ++i) m.parameters()[i] = normal(rng);
  }
  const NoiseSchedule s = build_schedule(ScheduleConfig{});
  std::vector<CleanSample> clean;
  for (int i = 0; i < 4; ++i) {
    Condition c;
    if (i % 2 == 0) c.scene = i / 2;
    if (i == 0) c.subject = 1;
    clean.push_back({random_raster(2, 2, 1, rng, 0.0, 1.0), c});
  }
  const std::vector<NoiseSample> samples = draw_noise_samples(clean, s, rng);
  const std::vector<double> analytic = backward(m, record_loss(m, samples));
  const std::vector<double> numeric = finite_difference_gradient(m, samples, 1e-5);
  // Gradients below 1e-6 in magnitude are compared on an absolute 1e-10 scale,
  // where central differences in double precision stop being informative.
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]), 1e-6});
    r.worst = std::max(r.worst, std::fabs(analytic[i] - numeric[i]) / denom);
    ++r.checks;
  }
  r.passed = r.worst < tol;
  return finish(r, start, tol, "relative error");
}

SuiteResult convolution_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  const double tol = 1e-12;
  SuiteResult r;
  r.name = "grid.convolution";
  std::mt19937_64 rng(seed);
  for (int h = 1; h <= 9; h += 2) {
    for (int w = 1; w <= 10; w += 3) {
      for (int k : {1, 3, 5}) {
        const Raster img = random_raster(h, w, 1, rng, -2.0, 2.0);
        const Kernel2D kern = gaussian_kernel(k, 0.5 + 0.25 * k);
        const Raster got = convolve_smooth(img, kern);
        const std::vector<double> want = naive_convolve(img.data(), h, w, kern.weights(), k);
        for (std::size_t i = 0; i < want.size(); ++i) {
          r.worst = std::max(r.worst, std::fabs(got[i] - want[i]));
        }
        ++r.checks;
      }
    }
  }
  r.passed = r.worst <= tol;
  return finish(r, start, tol, "|difference|");
}

SuiteResult softmax_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  const double tol = 1e-12;
  SuiteResult r;
  r.name = "grid.softmax";
  std::mt19937_64 rng(seed);
  for (int p = 0; p < 200; ++p) {
    const Raster v = random_raster(1 + p % 8, 1 + p % 5, 1, rng, -20.0, 20.0);
    const Raster got = softmax_over_pixels(v);
    const std::vector<double> want = direct_softmax(v.data());
    for (std::size_t i = 0; i < want.size(); ++i) {
      r.worst = std::max(r.worst, std::fabs(got[i] - want[i]));
    }
    r.worst = std::max(r.worst, std::fabs(got.sum() - 1.0));
    ++r.checks;
  }
  r.passed = r.worst <= tol;
  return finish(r, start, tol, "|difference|");
}

SuiteResult schedule_suite(std::uint64_t seed) {
  const auto start = Clock::now();
  const double tol = 1e-12;
  SuiteResult r;
  r.name = "schedule.ddim";
  const NoiseSchedule s = build_schedule(ScheduleConfig{});
  const std::vector<double> direct = alpha_bar_direct(s.betas());
  for (int t = 0; t <= s.train_steps(); ++t) {
    r.worst = std::max(r.worst, std::fabs(s.alpha_bar(t) - direct[static_cast<std::size_t>(t)]));
    ++r.checks;
  }
  std::mt19937_64 rng(seed);
  const TimestepPlan plan = make_plan(s.train_steps(), 50);
  for (int i = 0; i < plan.size(); ++i) {
    const Raster x = random_raster(4, 4, 2, rng, -2.0, 2.0);
    const Raster eps = random_raster(4, 4, 2, rng, -2.0, 2.0);
    const int t = plan.at(i), tp = plan.next(i);
    const Raster got = ddim_step(x, eps, t, tp, s);
    const std::vector<double> want =
        reference_ddim(x.data(), eps.data(), direct[static_cast<std::size_t>(t)],
                       direct[static_cast<std::size_t>(tp)]);
    for (std::size_t k = 0; k < want.size(); ++k) {
      r.worst = std::max(r.worst, std::fabs(got[k] - want[k]));
    }
    ++r.checks;
  }
  r.passed = r.worst <= tol;
  return finish(r, start, tol, "|difference|");
}

SuiteResult snf_step_suite(int probes, std::uint64_t seed) {
  const auto start = Clock::now();
  const double tol = 1e-12;
  SuiteResult r;
  r.name = "snf.step";
  const WorldConfig world;
  const GmmSpec gmm = build_gmm(world);
  const NoiseSchedule s = build_schedule(ScheduleConfig{});
  const GmmDenoiser tdm(gmm, s, Vocabulary::kSceneOnly);
  const GmmDenoiser sdm(gmm, s, Vocabulary::kSceneAndSubject);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const TimestepPlan plan = make_plan(s.train_steps(), 50);
  SnfSettings settings;
  for (int p = 0; p < probes; ++p) {
    Raster x(world.height, world.width, world.channels);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = normal(rng);
    const int t = plan.at(15 + p % 15);
    const int scene = p % 4, subject = (p + 1) % 4;
    const Raster got = snf_step(tdm, sdm, x, t, scene, subject, settings).eps_fused;
    const std::vector<double> want = reference_snf_step(
        tdm, sdm, x, t, scene, subject, settings.scene_guidance.scale,
        settings.subject_guidance.scale, 1.0);
    for (std::size_t i = 0; i < want.size(); ++i) {
      r.worst = std::max(r.worst, std::fabs(got[i] - want[i]));
    }
    ++r.checks;
  }
  r.passed = r.worst <= tol;
  return finish(r, start, tol, "|difference|");
}

std::vector<SuiteResult> run_all_suites() {
  return {schedule_suite(),         convolution_suite(),
          softmax_suite(),          denoiser_quadrature_suite(),
          posterior_density_ratio_suite(), snf_mask_suite(),
          snf_step_suite(),         gradient_suite()};
}

}  // namespace fusionlab::oracle
