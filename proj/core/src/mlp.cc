#include "fusionlab/mlp.h"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "fusionlab/error.h"

namespace fusionlab {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
using ConstWeights = Eigen::Map<const RowMat>;
using Weights = Eigen::Map<RowMat>;
using Block = Eigen::Map<ColMat>;
using ConstBlock = Eigen::Map<const ColMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;

std::size_t param_count(const MlpArchitecture& arch) {
  const auto w = arch.widths();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    n += static_cast<std::size_t>(w[l + 1]) * static_cast<std::size_t>(w[l] + 1);
  }
  return n;
}

void validate(const MlpArchitecture& arch) {
  if (arch.height <= 0 || arch.width <= 0 || arch.channels <= 0 ||
      arch.scene_count <= 0 || arch.subject_count <= 0 || arch.train_steps <= 0) {
    throw std::invalid_argument("MlpArchitecture: sizes must be positive");
  }
  for (int h : arch.hidden) {
    if (h <= 0) throw std::invalid_argument("MlpArchitecture: hidden widths must be positive");
  }
}

// Runs the network on a (input_width x batch) block. Returns activations per
// layer, input first.
std::vector<std::vector<double>> forward_block(const MlpDenoiser& m,
                                               std::vector<double> input, int batch) {
  const auto widths = m.architecture().widths();
  const auto params = m.parameters();
  std::vector<std::vector<double>> acts;
  acts.reserve(widths.size());
  acts.push_back(std::move(input));
  const int layers = m.layer_count();
  for (int l = 0; l < layers; ++l) {
    const int in = widths[static_cast<std::size_t>(l)];
    const int out = widths[static_cast<std::size_t>(l + 1)];
    ConstWeights w(params.data() + m.weight_offset(l), out, in);
    ConstVec b(params.data() + m.bias_offset(l), out);
    ConstBlock x(acts.back().data(), in, batch);
    std::vector<double> next(static_cast<std::size_t>(out) * static_cast<std::size_t>(batch));
    Block y(next.data(), out, batch);
    y.noalias() = w * x;
    y.colwise() += b;
    if (l + 1 < layers) y = y.array().tanh();
    acts.push_back(std::move(next));
  }
  return acts;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("load_mlp: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("load_mlp: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

constexpr char kMagic[8] = {'F', 'L', 'M', 'L', 'P', '\0', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

std::vector<int> MlpArchitecture::widths() const {
  std::vector<int> w;
  w.push_back(input_width());
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(pixel_count());
  return w;
}

MlpDenoiser::MlpDenoiser(MlpArchitecture arch)
    : arch_(std::move(arch)) {
  validate(arch_);
  params_.assign(param_count(arch_), 0.0);
  frozen_.assign(static_cast<std::size_t>(layer_count()), false);
}

MlpDenoiser::MlpDenoiser(MlpArchitecture arch, std::uint64_t seed)
    : MlpDenoiser(std::move(arch)) {
  std::mt19937_64 rng(seed);
  const auto w = arch_.widths();
  for (int l = 0; l < layer_count(); ++l) {
    const int in = w[static_cast<std::size_t>(l)];
    const int out = w[static_cast<std::size_t>(l + 1)];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t begin = weight_offset(l);
    for (std::size_t i = 0; i < static_cast<std::size_t>(in) * static_cast<std::size_t>(out); ++i) {
      params_[begin + i] = dist(rng);
    }
  }
}

std::size_t MlpDenoiser::weight_offset(int layer) const {
  const auto w = arch_.widths();
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(w[static_cast<std::size_t>(l + 1)]) *
           static_cast<std::size_t>(w[static_cast<std::size_t>(l)] + 1);
  }
  return off;
}

std::size_t MlpDenoiser::bias_offset(int layer) const {
  const auto w = arch_.widths();
  return weight_offset(layer) + static_cast<std::size_t>(w[static_cast<std::size_t>(layer + 1)]) *
                                    static_cast<std::size_t>(w[static_cast<std::size_t>(layer)]);
}

std::size_t MlpDenoiser::layer_end(int layer) const {
  return bias_offset(layer) + static_cast<std::size_t>(arch_.widths()[static_cast<std::size_t>(layer + 1)]);
}

void MlpDenoiser::set_frozen(int layer, bool frozen) {
  frozen_.at(static_cast<std::size_t>(layer)) = frozen;
}

std::vector<double> MlpDenoiser::encode(const Raster& x_t, int t,
                                        const Condition& cond) const {
  if (x_t.height() != arch_.height || x_t.width() != arch_.width ||
      x_t.channels() != arch_.channels) {
    throw std::invalid_argument("MlpDenoiser: input raster has the wrong shape");
  }
  if ((cond.scene && (*cond.scene < 0 || *cond.scene >= arch_.scene_count)) ||
      (cond.subject && (*cond.subject < 0 || *cond.subject >= arch_.subject_count))) {
    throw std::invalid_argument("MlpDenoiser: condition id out of range");
  }
  std::vector<double> in(static_cast<std::size_t>(arch_.input_width()), 0.0);
  std::size_t off = 0;
  for (std::size_t i = 0; i < x_t.size(); ++i) in[off++] = x_t[i];
  in[off + static_cast<std::size_t>(cond.scene.value_or(arch_.scene_count))] = 1.0;
  off += static_cast<std::size_t>(arch_.scene_count + 1);
  in[off + static_cast<std::size_t>(cond.subject.value_or(arch_.subject_count))] = 1.0;
  off += static_cast<std::size_t>(arch_.subject_count + 1);
  const double phase = 0.5 * std::numbers::pi * t / arch_.train_steps;
  in[off++] = std::sin(phase);
  in[off++] = std::cos(phase);
  return in;
}

Raster MlpDenoiser::predict(const Raster& x_t, int t, const Condition& cond) const {
  return mlp_forward(*this, x_t, t, cond);
}

std::vector<double> mlp_forward(const MlpDenoiser& m, std::span<const double> input) {
  if (static_cast<int>(input.size()) != m.architecture().input_width()) {
    throw std::invalid_argument("mlp_forward: input width mismatch");
  }
  auto acts = forward_block(m, std::vector<double>(input.begin(), input.end()), 1);
  return std::move(acts.back());
}

Raster mlp_forward(const MlpDenoiser& m, const Raster& x_t, int t, const Condition& cond) {
  std::vector<double> out = mlp_forward(m, m.encode(x_t, t, cond));
  return Raster(x_t.height(), x_t.width(), x_t.channels(), std::move(out));
}

std::vector<NoiseSample> draw_noise_samples(std::span<const CleanSample> batch,
                                            const NoiseSchedule& s,
                                            std::mt19937_64& rng) {
  std::uniform_int_distribution<int> step(1, s.train_steps());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<NoiseSample> out;
  out.reserve(batch.size());
  for (const CleanSample& c : batch) {
    NoiseSample n;
    n.t = step(rng);
    n.cond = c.cond;
    n.eps = Raster::constant_like(c.x0, 0.0);
    for (std::size_t i = 0; i < n.eps.size(); ++i) n.eps[i] = normal(rng);
    n.x_t = forward_noise(c.x0, n.t, n.eps, s);
    out.push_back(std::move(n));
  }
  return out;
}

double noise_loss(const Denoiser& d, std::span<const NoiseSample> samples) {
  if (samples.empty()) throw std::invalid_argument("noise_loss: empty batch");
  double total = 0.0;
  for (const NoiseSample& n : samples) {
    const Raster pred = d.predict(n.x_t, n.t, n.cond);
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double r = n.eps[i] - pred[i];
      sq += r * r;
    }
    total += sq;
  }
  return total / static_cast<double>(samples.size());
}

double noise_loss(const Denoiser& d, std::span<const CleanSample> batch,
                  const NoiseSchedule& s, std::mt19937_64& rng) {
  if (batch.empty()) throw std::invalid_argument("noise_loss: empty batch");
  const auto samples = draw_noise_samples(batch, s, rng);
  return noise_loss(d, samples);
}

LossContext record_loss(const MlpDenoiser& m, std::span<const NoiseSample> samples) {
  if (samples.empty()) throw std::invalid_argument("record_loss: empty batch");
  const int batch = static_cast<int>(samples.size());
  const auto in_w = static_cast<std::size_t>(m.architecture().input_width());
  std::vector<double> input(in_w * samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto enc = m.encode(samples[j].x_t, samples[j].t, samples[j].cond);
    std::copy(enc.begin(), enc.end(), input.begin() + static_cast<std::ptrdiff_t>(j * in_w));
  }
  LossContext ctx;
  ctx.batch = batch;
  ctx.activations = forward_block(m, std::move(input), batch);
  const std::vector<double>& out = ctx.activations.back();
  const auto out_w = static_cast<std::size_t>(m.architecture().pixel_count());
  ctx.upstream.resize(out.size());
  double total = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    for (std::size_t i = 0; i < out_w; ++i) {
      const double r = out[j * out_w + i] - samples[j].eps[i];
      total += r * r;
      ctx.upstream[j * out_w + i] = 2.0 * r / batch;
    }
  }
  ctx.loss = total / batch;
  return ctx;
}

std::vector<double> backward(const MlpDenoiser& m, const LossContext& ctx) {
  const auto widths = m.architecture().widths();
  const auto params = m.parameters();
  const int batch = ctx.batch;
  std::vector<double> grad(params.size(), 0.0);
  // delta = dLoss / d(pre-activation) of the current layer.
  ColMat delta = ConstBlock(ctx.upstream.data(), widths.back(), batch);
  for (int l = m.layer_count() - 1; l >= 0; --l) {
    const int in = widths[static_cast<std::size_t>(l)];
    const int out = widths[static_cast<std::size_t>(l + 1)];
    ConstBlock x(ctx.activations[static_cast<std::size_t>(l)].data(), in, batch);
    if (!m.frozen(l)) {
      Weights gw(grad.data() + m.weight_offset(l), out, in);
      gw.noalias() = delta * x.transpose();
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + m.bias_offset(l), out);
      gb = delta.rowwise().sum();
    }
    if (l == 0) break;
    ConstWeights w(params.data() + m.weight_offset(l), out, in);
    ColMat prev = w.transpose() * delta;
    prev.array() *= 1.0 - x.array().square();
    delta = std::move(prev);
  }
  return grad;
}

TrainResult train(MlpDenoiser m, const GmmSpec& world, const NoiseSchedule& s,
                  TrainingRole role, const TrainConfig& cfg) {
  if (cfg.steps < 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("train: need steps >= 0, batch_size > 0, learning_rate > 0");
  }
  if (cfg.log_every <= 0) throw std::invalid_argument("train: log_every must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  TrainResult result{std::move(m), {}};
  MlpDenoiser& model = result.model;
  std::vector<CleanSample> clean(static_cast<std::size_t>(cfg.batch_size));
  for (long step = 0; step < cfg.steps; ++step) {
    for (CleanSample& c : clean) {
      auto [x0, k] = sample_world(world, rng);
      const GmmComponent& comp = world.components[k];
      c.x0 = std::move(x0);
      c.cond = Condition{comp.scene, comp.subject};
      if (role == TrainingRole::kSceneExpert) {
        c.cond.subject.reset();
      } else if (coin(rng) < cfg.p_drop_subject) {
        c.cond.subject.reset();
      }
      if (coin(rng) < cfg.p_drop_all) c.cond = Condition::null();
    }
    const auto samples = draw_noise_samples(clean, s, rng);
    const LossContext ctx = record_loss(model, samples);
    if (!std::isfinite(ctx.loss)) {
      throw TrainingFailure("train: loss became non-finite at step " + std::to_string(step),
                            step);
    }
    if (step % cfg.log_every == 0) result.loss_curve.push_back(ctx.loss);
    const std::vector<double> g = backward(model, ctx);
    auto p = model.parameters();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= cfg.learning_rate * g[i];
  }
  return result;
}

TrainedPair train_pair(const WorldConfig& world, const NoiseSchedule& s,
                       const TrainConfig& scene_cfg, const TrainConfig& subject_cfg) {
  const GmmSpec gmm = build_gmm(world);
  auto arch_for = [&](const TrainConfig& cfg) {
    MlpArchitecture arch;
    arch.height = world.height;
    arch.width = world.width;
    arch.channels = world.channels;
    arch.scene_count = static_cast<int>(world.scenes.size());
    arch.subject_count = static_cast<int>(world.subjects.size());
    arch.hidden = cfg.hidden;
    arch.train_steps = s.train_steps();
    return arch;
  };
  // Distinct init seeds even when both configs share cfg.seed.
  MlpDenoiser scene_init(arch_for(scene_cfg), scene_cfg.seed * 2 + 1);
  MlpDenoiser subject_init(arch_for(subject_cfg), subject_cfg.seed * 2 + 2);
  TrainConfig scene_run = scene_cfg;
  TrainConfig subject_run = subject_cfg;
  scene_run.seed = scene_cfg.seed ^ 0x5CE4E5CE4EULL;
  subject_run.seed = subject_cfg.seed ^ 0x5B1EC75B1EULL;
  return {train(std::move(scene_init), gmm, s, TrainingRole::kSceneExpert, scene_run),
          train(std::move(subject_init), gmm, s, TrainingRole::kSubjectExpert, subject_run)};
}

void save_mlp(const MlpDenoiser& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("save_mlp: cannot open '" + path + "' for writing");
  const MlpArchitecture& a = m.architecture();
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, kFormatVersion);
  for (int v : {a.height, a.width, a.channels, a.scene_count, a.subject_count, a.train_steps}) {
    put_u32(os, static_cast<std::uint32_t>(v));
  }
  const auto widths = a.widths();
  put_u32(os, static_cast<std::uint32_t>(widths.size() - 1));
  for (int w : widths) put_u32(os, static_cast<std::uint32_t>(w));
  for (double p : m.parameters()) put_f64(os, p);
  if (!os) throw IoError("save_mlp: write failed for '" + path + "'");
}

MlpDenoiser load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_mlp: cannot open '" + path + "'");
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("load_mlp: bad magic in '" + path + "'");
  }
  if (get_u32(is) != kFormatVersion) throw IoError("load_mlp: unsupported version");
  MlpArchitecture a;
  a.height = static_cast<int>(get_u32(is));
  a.width = static_cast<int>(get_u32(is));
  a.channels = static_cast<int>(get_u32(is));
  a.scene_count = static_cast<int>(get_u32(is));
  a.subject_count = static_cast<int>(get_u32(is));
  a.train_steps = static_cast<int>(get_u32(is));
  const std::uint32_t layers = get_u32(is);
  if (layers < 1 || layers > 64) throw IoError("load_mlp: implausible layer count");
  std::vector<int> widths(layers + 1);
  for (int& w : widths) w = static_cast<int>(get_u32(is));
  a.hidden.assign(widths.begin() + 1, widths.end() - 1);
  if (a.widths() != widths) throw IoError("load_mlp: layer widths disagree with header");
  MlpDenoiser m(a);
  for (double& p : m.parameters()) p = get_f64(is);
  return m;
}

}  // namespace fusionlab
