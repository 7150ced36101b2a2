#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fusionlab/denoiser.h"
#include "fusionlab/error.h"
#include "fusionlab/mlp.h"
#include "fusionlab/oracle/references.h"
#include "fusionlab/schedule.h"
#include "fusionlab/world.h"

namespace fusionlab {
namespace {

GmmSpec one_pixel_mixture(std::vector<double> means, std::vector<double> weights, double sigma0) {
  GmmSpec g;
  g.sigma0 = sigma0;
  g.scene_count = 1;
  g.subject_count = 1;
  for (std::size_t k = 0; k < means.size(); ++k) {
    GmmComponent c;
    c.mean = Raster(1, 1, 1, means[k]);
    c.weight = weights[k];
    g.components.push_back(c);
  }
  return g;
}

const NoiseSchedule& default_schedule() {
  static const NoiseSchedule s = build_schedule(ScheduleConfig{});
  return s;
}

TEST(GmmPosterior, SingleComponentIsCertain) {
  const GmmSpec g = one_pixel_mixture({0.3}, {1.0}, 0.05);
  for (double x : {-5.0, 0.0, 0.3, 9.0}) {
    EXPECT_EQ(gmm_posterior(g, Raster(1, 1, 1, x), 300, default_schedule()),
              std::vector<double>{1.0});
  }
}

TEST(GmmPosterior, SymmetricPairAtOrigin) {
  const GmmSpec g = one_pixel_mixture({-0.4, 0.4}, {0.5, 0.5}, 0.05);
  const std::vector<double> p = gmm_posterior(g, Raster(1, 1, 1, 0.0), 500, default_schedule());
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(GmmPosterior, MatchesDensityRatioOneD) {
  const GmmSpec g = one_pixel_mixture({-0.4, 0.4}, {0.5, 0.5}, 0.05);
  const Raster x(1, 1, 1, 0.3);
  const std::vector<double> got = gmm_posterior(g, x, 500, default_schedule());
  const std::vector<double> want = oracle::density_ratio_posterior(g, x, 500, default_schedule());
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(got[k], want[k], 1e-10);
}

TEST(GmmPosterior, NormalizedAndScaleInvariantInWeights) {
  const GmmSpec g = build_gmm(WorldConfig{});
  GmmSpec scaled = g;
  for (GmmComponent& c : scaled.components) c.weight *= 37.5;
  std::mt19937_64 rng(9);
  for (int t : {5, 200, 700}) {
    const Raster x = sample_world(g, rng).first;
    const std::vector<double> p = gmm_posterior(g, x, t, default_schedule());
    const std::vector<double> q = gmm_posterior(scaled, x, t, default_schedule());
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      EXPECT_GE(p[k], 0.0);
      EXPECT_NEAR(p[k], q[k], 1e-12);
      total += p[k];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(GmmPosterior, ExtremeInputsStayFinite) {
  const GmmSpec g = build_gmm(WorldConfig{});
  const Raster far(32, 32, 1, 1e3);
  const std::vector<double> p = gmm_posterior(g, far, 1, default_schedule());
  double total = 0.0;
  for (double v : p) {
    EXPECT_TRUE(std::isfinite(v));
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(GmmDenoise, DeltaComponent) {
  const GmmSpec g = one_pixel_mixture({0.6}, {1.0}, 0.0);
  const NoiseSchedule& s = default_schedule();
  for (int t : {1, 100, 1000}) {
    const double x = 0.9;
    const double expected = (x - std::sqrt(s.alpha_bar(t)) * 0.6) / std::sqrt(1.0 - s.alpha_bar(t));
    EXPECT_NEAR(gmm_denoise(g, Raster(1, 1, 1, x), t, s)[0], expected, 1e-12);
  }
}

TEST(GmmDenoise, SymmetricPairAtOrigin) {
  const GmmSpec g = one_pixel_mixture({-0.4, 0.4}, {0.5, 0.5}, 0.05);
  const Raster zero(1, 1, 1, 0.0);
  EXPECT_EQ(gmm_posterior_mean(g, zero, 400, default_schedule())[0], 0.0);
  EXPECT_EQ(gmm_denoise(g, zero, 400, default_schedule())[0], 0.0);
}

TEST(GmmDenoise, MatchesQuadrature) {
  const GmmSpec g = one_pixel_mixture({-0.2, 0.35, 0.9}, {0.2, 0.5, 0.3}, 0.07);
  const NoiseSchedule& s = default_schedule();
  for (int t : {1, 10, 100, 500, 1000}) {
    for (double x : {-1.2, -0.1, 0.3, 0.8, 2.0}) {
      EXPECT_NEAR(gmm_denoise(g, Raster(1, 1, 1, x), t, s)[0],
                  oracle::quadrature_eps_1d(g, x, t, s), 1e-6)
          << "t=" << t << " x=" << x;
    }
  }
}

TEST(GmmDenoise, RejectsTimestepZero) {
  const GmmSpec g = one_pixel_mixture({0.0}, {1.0}, 0.1);
  EXPECT_THROW(gmm_denoise(g, Raster(1, 1, 1), 0, default_schedule()), std::invalid_argument);
}

// Optimal predictor dominance: the exact denoiser's loss is no larger than
// the best constant predictor's on the same draws.
TEST(GmmDenoise, BeatsConstantPredictors) {
  WorldConfig w;
  w.height = 8;
  w.width = 8;
  w.glyph_size = 4;
  w.positions = {{0, 0}, {4, 4}};
  const GmmSpec g = build_gmm(w);
  const NoiseSchedule& s = default_schedule();
  const GmmDenoiser exact(g, s, Vocabulary::kSceneAndSubject);
  std::mt19937_64 rng(5);
  std::vector<CleanSample> batch;
  for (int i = 0; i < 1000; ++i) batch.push_back({sample_world(g, rng).first, Condition{}});
  const std::vector<NoiseSample> samples = draw_noise_samples(batch, s, rng);
  const double exact_loss = noise_loss(exact, samples);

  struct Constant : Denoiser {
    double c;
    explicit Constant(double v) : c(v) {}
    Raster predict(const Raster& x, int, const Condition&) const override {
      return Raster::constant_like(x, c);
    }
  };
  for (double c : {-0.5, -0.1, 0.0, 0.1, 0.5}) {
    EXPECT_LE(exact_loss, noise_loss(Constant(c), samples)) << "constant " << c;
  }
}

TEST(GmmDenoise, ConditioningSharpensPosterior) {
  const WorldConfig w;
  const GmmSpec g = build_gmm(w);
  const NoiseSchedule& s = default_schedule();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto [x0, k] = sample_world(g, rng);
    const GmmComponent& truth = g.components[k];
    const int t = 300 + 10 * trial;
    Raster eps = Raster::constant_like(x0, 0.0);
    for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = normal(rng);
    const Raster x = forward_noise(x0, t, eps, s);
    auto mass_on_truth = [&](const Condition& c) {
      const GmmSpec r = restrict(g, c);
      const std::vector<double> p = gmm_posterior(r, x, t, s);
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (r.components[j].position == truth.position && r.components[j].subject == truth.subject &&
            r.components[j].scene == truth.scene) {
          return p[j];
        }
      }
      return 0.0;
    };
    EXPECT_GE(mass_on_truth(Condition{truth.scene, truth.subject}),
              mass_on_truth(Condition{truth.scene, std::nullopt}));
  }
}

TEST(GmmDenoiser, RestrictsByCondition) {
  const WorldConfig w;
  const GmmSpec g = build_gmm(w);
  const NoiseSchedule& s = default_schedule();
  const GmmDenoiser sdm(g, s, Vocabulary::kSceneAndSubject);
  const GmmDenoiser tdm(g, s, Vocabulary::kSceneOnly);
  std::mt19937_64 rng(4);
  const Raster x = sample_world(g, rng).first;
  const Condition c{1, 2};
  EXPECT_EQ(sdm.predict(x, 250, c), gmm_denoise(restrict(g, c), x, 250, s));
  EXPECT_EQ(tdm.predict(x, 250, Condition{1, std::nullopt}),
            gmm_denoise(restrict(g, Condition{1, std::nullopt}), x, 250, s));
  EXPECT_THROW(tdm.predict(x, 250, c), std::invalid_argument);
  EXPECT_THROW(sdm.predict(x, 250, Condition{9, std::nullopt}), std::invalid_argument);
  EXPECT_EQ(sdm.predict(x, 250, c), sdm.predict(x, 250, c));
}

}  // namespace
}  // namespace fusionlab
