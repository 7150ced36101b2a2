#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "fusionlab/error.h"
#include "fusionlab/mlp.h"
#include "fusionlab/oracle/references.h"
#include "fusionlab/oracle/suites.h"

namespace fusionlab {
namespace {

MlpArchitecture small_arch() {
  MlpArchitecture a;
  a.height = 2;
  a.width = 3;
  a.channels = 1;
  a.scene_count = 2;
  a.subject_count = 3;
  a.hidden = {8, 7};
  a.train_steps = 1000;
  return a;
}

const NoiseSchedule& schedule() {
  static const NoiseSchedule s = build_schedule(ScheduleConfig{});
  return s;
}

Raster random_input(const MlpArchitecture& a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Raster r(a.height, a.width, a.channels);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = normal(rng);
  return r;
}

TEST(MlpArchitecture, Widths) {
  const MlpArchitecture a = small_arch();
  EXPECT_EQ(a.input_width(), 6 + 3 + 4 + 2);
  EXPECT_EQ(a.widths(), (std::vector<int>{15, 8, 7, 6}));
  MlpArchitecture d;
  EXPECT_EQ(d.hidden, (std::vector<int>{256, 256}));
}

TEST(MlpDenoiser, EncodesConditionsWithNullSlot) {
  const MlpDenoiser m(small_arch());
  const Raster x = random_input(small_arch(), 1);
  const std::vector<double> in = m.encode(x, 500, Condition{1, std::nullopt});
  for (int i = 0; i < 6; ++i) EXPECT_EQ(in[i], x[i]);
  EXPECT_EQ(std::vector<double>(in.begin() + 6, in.begin() + 9), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(std::vector<double>(in.begin() + 9, in.begin() + 13),
            (std::vector<double>{0, 0, 0, 1}));
  EXPECT_NEAR(in[13], std::sin(M_PI / 4), 1e-15);
  EXPECT_NEAR(in[14], std::cos(M_PI / 4), 1e-15);
  EXPECT_THROW(m.encode(x, 500, Condition{2, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(m.encode(Raster(3, 2, 1), 500, Condition{}), std::invalid_argument);
}

TEST(MlpForward, ZeroParametersGiveZero) {
  const MlpDenoiser m(small_arch());
  const Raster out = mlp_forward(m, random_input(small_arch(), 2), 10, Condition{0, 1});
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(MlpForward, FinalLayerIsLinear) {
  MlpDenoiser m(small_arch(), 3);
  const Raster x = random_input(small_arch(), 4);
  const Raster before = mlp_forward(m, x, 321, Condition{1, 2});
  const int last = m.layer_count() - 1;
  for (std::size_t i = m.weight_offset(last); i < m.layer_end(last); ++i) m.parameters()[i] *= 2.0;
  const Raster after = mlp_forward(m, x, 321, Condition{1, 2});
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(after[i], 2.0 * before[i], 1e-14);
}

TEST(MlpForward, Reproducible) {
  const MlpDenoiser a(small_arch(), 11), b(small_arch(), 11);
  EXPECT_EQ(a, b);
  const Raster x = random_input(small_arch(), 5);
  EXPECT_EQ(mlp_forward(a, x, 77, Condition{}), mlp_forward(b, x, 77, Condition{}));
  EXPECT_FALSE(MlpDenoiser(small_arch(), 12) == a);
}

// Test stub that knows the clean sample and recovers the drawn noise.
struct OracleNoise : Denoiser {
  Raster x0;
  const NoiseSchedule* s;
  Raster predict(const Raster& x_t, int t, const Condition&) const override {
    const double a = s->alpha_bar(t);
    Raster eps = x_t;
    for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (x_t[i] - std::sqrt(a) * x0[i]) / std::sqrt(1 - a);
    return eps;
  }
};

struct Zero : Denoiser {
  Raster predict(const Raster& x, int, const Condition&) const override {
    return Raster::constant_like(x, 0.0);
  }
};

TEST(NoiseLoss, ExactNoiseGivesZero) {
  OracleNoise d;
  d.x0 = Raster(2, 2, 1, {0.1, 0.9, 0.4, 0.5});
  d.s = &schedule();
  std::mt19937_64 rng(1);
  const std::vector<CleanSample> batch = {{d.x0, Condition{}}};
  EXPECT_NEAR(noise_loss(d, batch, schedule(), rng), 0.0, 1e-20);
}

TEST(NoiseLoss, ZeroPredictorMatchesDimension) {
  const Raster x0(3, 2, 1, 0.5);
  std::vector<CleanSample> batch(10000, CleanSample{x0, Condition{}});
  std::mt19937_64 rng(2);
  const double loss = noise_loss(Zero{}, batch, schedule(), rng);
  // ||eps||^2 is chi-square with 6 degrees of freedom: variance 12.
  EXPECT_NEAR(loss, 6.0, 3.0 * std::sqrt(12.0 / 10000));
}

TEST(NoiseLoss, SingleTermByHand) {
  NoiseSample s{Raster(1, 2, 1, {0.3, -0.2}), 40, Condition{}, Raster(1, 2, 1, {1.5, 0.25})};
  const std::vector<NoiseSample> one = {s};
  EXPECT_NEAR(noise_loss(Zero{}, one), 1.5 * 1.5 + 0.25 * 0.25, 1e-12);
}

TEST(NoiseLoss, EmptyBatchThrows) {
  std::mt19937_64 rng(0);
  EXPECT_THROW(noise_loss(Zero{}, std::vector<NoiseSample>{}), std::invalid_argument);
  EXPECT_THROW(noise_loss(Zero{}, std::vector<CleanSample>{}, schedule(), rng),
               std::invalid_argument);
}

std::vector<NoiseSample> small_batch(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CleanSample> clean;
  const MlpArchitecture a = small_arch();
  for (int i = 0; i < 5; ++i) {
    Condition c;
    if (i % 2) c.scene = i % 2;
    if (i % 3 == 0) c.subject = i % 3;
    clean.push_back({random_input(a, seed * 10 + i), c});
  }
  return draw_noise_samples(clean, schedule(), rng);
}

TEST(Backward, RecordedLossMatchesNoiseLoss) {
  const MlpDenoiser m(small_arch(), 6);
  const auto samples = small_batch(6);
  EXPECT_NEAR(record_loss(m, samples).loss, noise_loss(m, samples), 1e-12);
}

TEST(Backward, ZeroUpstreamGivesZeroGradient) {
  const MlpDenoiser m(small_arch(), 7);
  LossContext ctx = record_loss(m, small_batch(7));
  std::fill(ctx.upstream.begin(), ctx.upstream.end(), 0.0);
  for (double g : backward(m, ctx)) EXPECT_EQ(g, 0.0);
}

TEST(Backward, MatchesFiniteDifferences) {
  MlpDenoiser m(small_arch(), 8);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 0.2);
  for (double& p : m.parameters()) p += normal(rng);
  const auto samples = small_batch(8);
  const std::vector<double> g = backward(m, record_loss(m, samples));
  const std::vector<double> fd = oracle::finite_difference_gradient(m, samples, 1e-5);
  ASSERT_EQ(g.size(), fd.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double denom = std::max({std::fabs(g[i]), std::fabs(fd[i]), 1e-6});
    EXPECT_LT(std::fabs(g[i] - fd[i]) / denom, 1e-4) << "parameter " << i;
  }
}

TEST(Backward, OracleSuitePasses) {
  const oracle::SuiteResult r = oracle::gradient_suite();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Backward, FrozenLayerGetsExactZero) {
  MlpDenoiser m(small_arch(), 9);
  m.set_frozen(1, true);
  const std::vector<double> g = backward(m, record_loss(m, small_batch(9)));
  for (std::size_t i = m.weight_offset(1); i < m.layer_end(1); ++i) EXPECT_EQ(g[i], 0.0);
  double other = 0.0;
  for (std::size_t i = m.weight_offset(0); i < m.layer_end(0); ++i) other += std::fabs(g[i]);
  EXPECT_GT(other, 0.0);
}

GmmSpec tiny_world_gmm() {
  WorldConfig w;
  w.height = 2;
  w.width = 3;
  w.scenes = {"horizontal_gradient", "flat_gray"};
  w.subjects = {"cross", "disk", "square"};
  w.glyph_size = 1;
  w.positions = {{0, 0}, {1, 2}};
  return build_gmm(w);
}

TEST(Train, ZeroStepsLeavesParametersUnchanged) {
  const MlpDenoiser init(small_arch(), 10);
  TrainConfig cfg;
  cfg.steps = 0;
  const TrainResult r = train(init, tiny_world_gmm(), schedule(), TrainingRole::kSubjectExpert, cfg);
  EXPECT_EQ(r.model, init);
  EXPECT_TRUE(r.loss_curve.empty());
}

TEST(Train, DeterministicUnderSeed) {
  TrainConfig cfg;
  cfg.steps = 30;
  cfg.batch_size = 8;
  cfg.log_every = 5;
  cfg.seed = 99;
  const MlpDenoiser init(small_arch(), 10);
  const TrainResult a = train(init, tiny_world_gmm(), schedule(), TrainingRole::kSceneExpert, cfg);
  const TrainResult b = train(init, tiny_world_gmm(), schedule(), TrainingRole::kSceneExpert, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_EQ(a.loss_curve.size(), 6u);
}

TEST(Train, LossTrendsDown) {
  TrainConfig cfg;
  cfg.steps = 1500;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.02;
  cfg.log_every = 10;
  const TrainResult r = train(MlpDenoiser(small_arch(), 12), tiny_world_gmm(), schedule(),
                              TrainingRole::kSubjectExpert, cfg);
  const std::size_t n = r.loss_curve.size();
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    head += r.loss_curve[i];
    tail += r.loss_curve[n - 1 - i];
  }
  EXPECT_LT(tail, head);
}

TEST(Train, DivergenceNamesStep) {
  TrainConfig cfg;
  cfg.steps = 500;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e6;
  try {
    train(MlpDenoiser(small_arch(), 13), tiny_world_gmm(), schedule(),
          TrainingRole::kSubjectExpert, cfg);
    FAIL() << "expected TrainingFailure";
  } catch (const TrainingFailure& e) {
    EXPECT_GT(e.step(), 0);
    EXPECT_NE(std::string(e.what()).find(std::to_string(e.step())), std::string::npos);
  }
}

TEST(Train, PairIsIndependent) {
  WorldConfig w;
  w.height = 2;
  w.width = 2;
  w.scenes = {"flat_gray", "checkerboard"};
  w.subjects = {"cross", "disk"};
  w.glyph_size = 1;
  w.positions = {{0, 0}};
  TrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 4;
  cfg.hidden = {4};
  const TrainedPair p = train_pair(w, schedule(), cfg, cfg);
  EXPECT_FALSE(p.scene_expert.model == p.subject_expert.model);
  const TrainedPair q = train_pair(w, schedule(), cfg, cfg);
  EXPECT_EQ(p.scene_expert.model, q.scene_expert.model);
  EXPECT_EQ(p.subject_expert.model, q.subject_expert.model);
}

TEST(Serialization, RoundTripAndHeader) {
  const MlpDenoiser m(small_arch(), 14);
  const std::string path = (std::filesystem::temp_directory_path() / "fusionlab_mlp_test.bin").string();
  save_mlp(m, path);
  EXPECT_EQ(load_mlp(path), m);
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  EXPECT_EQ(std::string(magic, 5), "FLMLP");
  const auto size = std::filesystem::file_size(path);
  EXPECT_EQ(size, 8 + 4 + 6 * 4 + 4 + 4 * 4 + 8 * m.parameters().size());
  std::filesystem::remove(path);
}

TEST(Serialization, RejectsCorruptFiles) {
  const std::string path = (std::filesystem::temp_directory_path() / "fusionlab_mlp_bad.bin").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTANMLP and some trailing bytes";
  }
  EXPECT_THROW(load_mlp(path), IoError);
  EXPECT_THROW(load_mlp(path + ".missing"), IoError);
  const MlpDenoiser m(small_arch(), 15);
  save_mlp(m, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(load_mlp(path), IoError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fusionlab
