#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fusionlab/denoiser.h"
#include "fusionlab/grid.h"
#include "fusionlab/schedule.h"
#include "fusionlab/world.h"

namespace fusionlab {

// Input is [x_t (H*W*C) | scene one-hot (S+1) | subject one-hot (U+1) |
// sin, cos of (pi/2) t/T]. The last slot of each one-hot block is the null
// condition. Hidden layers use tanh; the output layer is linear.
struct MlpArchitecture {
  int height = 1;
  int width = 1;
  int channels = 1;
  int scene_count = 1;
  int subject_count = 1;
  std::vector<int> hidden = {256, 256};
  int train_steps = 1000;

  int pixel_count() const { return height * width * channels; }
  int input_width() const { return pixel_count() + scene_count + 1 + subject_count + 1 + 2; }
  // [input, hidden..., output]
  std::vector<int> widths() const;

  bool operator==(const MlpArchitecture&) const = default;
};

class MlpDenoiser : public Denoiser {
 public:
  // Xavier-uniform weights from `seed`, zero biases.
  MlpDenoiser(MlpArchitecture arch, std::uint64_t seed);
  // All parameters zero.
  explicit MlpDenoiser(MlpArchitecture arch);

  Raster predict(const Raster& x_t, int t, const Condition& cond) const override;

  const MlpArchitecture& architecture() const { return arch_; }
  int layer_count() const { return static_cast<int>(arch_.widths().size()) - 1; }

  // Flat parameter vector; layer l holds W_l (out x in, row-major) then b_l.
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t weight_offset(int layer) const;
  std::size_t bias_offset(int layer) const;
  std::size_t layer_end(int layer) const;

  void set_frozen(int layer, bool frozen);
  bool frozen(int layer) const { return frozen_.at(static_cast<std::size_t>(layer)); }

  // Network input for one sample.
  std::vector<double> encode(const Raster& x_t, int t, const Condition& cond) const;

  bool operator==(const MlpDenoiser& other) const {
    return arch_ == other.arch_ && params_ == other.params_;
  }

 private:
  MlpArchitecture arch_;
  std::vector<double> params_;
  std::vector<bool> frozen_;
};

// Raw forward pass on one encoded input.
std::vector<double> mlp_forward(const MlpDenoiser& m, std::span<const double> input);
// Encodes, runs the network and reshapes to x_t's shape.
Raster mlp_forward(const MlpDenoiser& m, const Raster& x_t, int t, const Condition& cond);

// One term of the noise-prediction loss: x_t = forward_noise(x0, t, eps).
struct NoiseSample {
  Raster x_t;
  int t = 1;
  Condition cond;
  Raster eps;
};

struct CleanSample {
  Raster x0;
  Condition cond;
};

// Draws t ~ U{1..T} and eps ~ N(0, I) for every clean sample.
std::vector<NoiseSample> draw_noise_samples(std::span<const CleanSample> batch,
                                            const NoiseSchedule& s,
                                            std::mt19937_64& rng);

// Mean over samples of ||eps - d.predict(x_t, t, cond)||^2.
double noise_loss(const Denoiser& d, std::span<const NoiseSample> samples);
double noise_loss(const Denoiser& d, std::span<const CleanSample> batch,
                  const NoiseSchedule& s, std::mt19937_64& rng);

// Recorded forward pass of the noise loss over a batch. Activations are
// stored per layer as column-major (width x batch) blocks; `upstream` holds
// dLoss/dOutput in the same layout.
struct LossContext {
  int batch = 0;
  double loss = 0.0;
  std::vector<std::vector<double>> activations;
  std::vector<double> upstream;
};

LossContext record_loss(const MlpDenoiser& m, std::span<const NoiseSample> samples);

// Reverse-mode gradient of the recorded loss, laid out like parameters().
// Frozen layers get exactly zero.
std::vector<double> backward(const MlpDenoiser& m, const LossContext& ctx);

enum class TrainingRole { kSceneExpert, kSubjectExpert };

struct TrainConfig {
  long steps = 2000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  // Scene expert: every condition dropped to null with p_drop_all.
  // Subject expert: subject dropped with p_drop_subject, then everything
  // dropped with p_drop_all.
  double p_drop_subject = 0.2;
  double p_drop_all = 0.2;
  std::vector<int> hidden = {256, 256};
  std::uint64_t seed = 0;
  // Loss-curve sampling interval in steps.
  long log_every = 50;

  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  MlpDenoiser model;
  std::vector<double> loss_curve;  // batch loss every log_every steps
};

// Plain SGD on the noise-prediction loss with the role's condition dropout.
// Throws TrainingFailure when the loss becomes non-finite.
TrainResult train(MlpDenoiser m, const GmmSpec& world, const NoiseSchedule& s,
                  TrainingRole role, const TrainConfig& cfg);

struct TrainedPair {
  TrainResult scene_expert;
  TrainResult subject_expert;
};

// Independent models for both roles: no shared parameters, independent
// generators derived from cfg.seed. The scene expert ignores p_drop_subject.
TrainedPair train_pair(const WorldConfig& world, const NoiseSchedule& s,
                       const TrainConfig& scene_cfg, const TrainConfig& subject_cfg);

// Little-endian binary: "FLMLP\0\0\0", u32 version, u32 H, W, C, S, U, T,
// u32 layer count L, u32 widths[L + 1], f64 parameters.
void save_mlp(const MlpDenoiser& m, const std::string& path);
MlpDenoiser load_mlp(const std::string& path);

}  // namespace fusionlab
