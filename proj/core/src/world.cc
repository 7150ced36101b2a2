#include "fusionlab/world.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fusionlab/error.h"

namespace fusionlab {
namespace {

int find_name(const std::vector<std::string>& names, const std::string& name,
              const char* what) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw std::invalid_argument(std::string("unknown ") + what + " id '" + name + "'");
  }
  return static_cast<int>(it - names.begin());
}

bool glyph_ink(const std::string& name, double y, double x, double g) {
  const double c = g / 2.0;
  const double dy = std::fabs(y - c);
  const double dx = std::fabs(x - c);
  if (name == "cross") {
    return dy < 0.15 * g || dx < 0.15 * g;
  }
  if (name == "square") {
    // Hollow square ring.
    const bool outer = dy < 0.35 * g && dx < 0.35 * g;
    const bool inner = dy < 0.15 * g && dx < 0.15 * g;
    return outer && !inner;
  }
  if (name == "disk") {
    return dy * dy + dx * dx <= (0.4 * g) * (0.4 * g);
  }
  if (name == "triangle") {
    // Apex at the top, base on the bottom row.
    const double top = 0.1 * g;
    const double bottom = 0.9 * g;
    if (y < top || y > bottom) return false;
    const double half = 0.5 * (y - top) * (0.8 * g) / (bottom - top) + 0.05 * g;
    return dx <= half;
  }
  throw std::invalid_argument("unknown subject template '" + name + "'");
}

}  // namespace

const std::vector<std::string>& known_scene_templates() {
  static const std::vector<std::string> kNames = {
      "horizontal_gradient", "vertical_gradient", "checkerboard", "flat_gray"};
  return kNames;
}

const std::vector<std::string>& known_subject_templates() {
  static const std::vector<std::string> kNames = {"cross", "square", "disk",
                                                  "triangle"};
  return kNames;
}

void WorldConfig::validate() const {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw std::invalid_argument("WorldConfig: dimensions must be positive");
  }
  if (scenes.empty() || subjects.empty() || positions.empty()) {
    throw std::invalid_argument("WorldConfig: scene, subject and position lists must be non-empty");
  }
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
    throw std::invalid_argument("WorldConfig: sigma0 must be positive");
  }
  if (glyph_size <= 0) {
    throw std::invalid_argument("WorldConfig: glyph_size must be positive");
  }
  for (const auto& s : scenes) find_name(known_scene_templates(), s, "scene template");
  for (const auto& s : subjects) find_name(known_subject_templates(), s, "subject template");
  for (const Position& p : positions) {
    if (p.row < 0 || p.col < 0 || p.row + glyph_size > height ||
        p.col + glyph_size > width) {
      throw std::invalid_argument("WorldConfig: glyph box at (" +
                                  std::to_string(p.row) + "," +
                                  std::to_string(p.col) + ") leaves the image");
    }
  }
}

int WorldConfig::scene_index(const std::string& name) const {
  return find_name(scenes, name, "scene");
}

int WorldConfig::subject_index(const std::string& name) const {
  return find_name(subjects, name, "subject");
}

Raster scene_template(const WorldConfig& cfg, int scene) {
  if (scene < 0 || scene >= static_cast<int>(cfg.scenes.size())) {
    throw std::invalid_argument("scene_template: scene index out of range");
  }
  const std::string& name = cfg.scenes[static_cast<std::size_t>(scene)];
  Raster out(cfg.height, cfg.width, 1);
  const int cell = std::max(1, std::min(cfg.height, cfg.width) / 4);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      double v;
      if (name == "horizontal_gradient") {
        v = cfg.width == 1 ? 0.5 : 0.1 + 0.8 * x / (cfg.width - 1.0);
      } else if (name == "vertical_gradient") {
        v = cfg.height == 1 ? 0.5 : 0.1 + 0.8 * y / (cfg.height - 1.0);
      } else if (name == "checkerboard") {
        v = ((y / cell) + (x / cell)) % 2 == 0 ? 0.3 : 0.7;
      } else if (name == "flat_gray") {
        v = 0.5;
      } else {
        throw std::invalid_argument("unknown scene template '" + name + "'");
      }
      out.at(y, x) = v;
    }
  }
  return out;
}

Raster glyph_template(const WorldConfig& cfg, int subject) {
  if (subject < 0 || subject >= static_cast<int>(cfg.subjects.size())) {
    throw std::invalid_argument("glyph_template: subject index out of range");
  }
  const std::string& name = cfg.subjects[static_cast<std::size_t>(subject)];
  const int g = cfg.glyph_size;
  Raster out(g, g, 1);
  for (int y = 0; y < g; ++y) {
    for (int x = 0; x < g; ++x) {
      out.at(y, x) = glyph_ink(name, y + 0.5, x + 0.5, g) ? 1.0 : 0.0;
    }
  }
  return out;
}

Raster compose(const WorldConfig& cfg, int scene, int subject, Position pos) {
  const int g = cfg.glyph_size;
  if (pos.row < 0 || pos.col < 0 || pos.row + g > cfg.height ||
      pos.col + g > cfg.width) {
    throw std::invalid_argument("compose: glyph box out of bounds");
  }
  const Raster background = scene_template(cfg, scene);
  const Raster glyph = glyph_template(cfg, subject);
  Raster out(cfg.height, cfg.width, cfg.channels);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const bool inside = y >= pos.row && y < pos.row + g && x >= pos.col &&
                          x < pos.col + g;
      const double v = inside ? glyph.at(y - pos.row, x - pos.col) : background.at(y, x);
      for (int c = 0; c < cfg.channels; ++c) out.at(y, x, c) = v;
    }
  }
  return out;
}

double GmmSpec::total_weight() const {
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  return total;
}

GmmSpec build_gmm(const WorldConfig& cfg) {
  cfg.validate();
  GmmSpec gmm;
  gmm.sigma0 = cfg.sigma0;
  gmm.scene_count = static_cast<int>(cfg.scenes.size());
  gmm.subject_count = static_cast<int>(cfg.subjects.size());
  const std::size_t n = cfg.scenes.size() * cfg.subjects.size() * cfg.positions.size();
  const double w = 1.0 / static_cast<double>(n);
  gmm.components.reserve(n);
  for (int s = 0; s < gmm.scene_count; ++s) {
    for (int u = 0; u < gmm.subject_count; ++u) {
      for (int p = 0; p < static_cast<int>(cfg.positions.size()); ++p) {
        gmm.components.push_back(
            {s, u, p, compose(cfg, s, u, cfg.positions[static_cast<std::size_t>(p)]), w});
      }
    }
  }
  return gmm;
}

void check_condition(const GmmSpec& gmm, const Condition& cond) {
  if (cond.scene && (*cond.scene < 0 || *cond.scene >= gmm.scene_count)) {
    throw std::invalid_argument("condition: scene id " + std::to_string(*cond.scene) +
                                " not in the world");
  }
  if (cond.subject && (*cond.subject < 0 || *cond.subject >= gmm.subject_count)) {
    throw std::invalid_argument("condition: subject id " +
                                std::to_string(*cond.subject) + " not in the world");
  }
}

GmmSpec restrict(const GmmSpec& gmm, const Condition& cond) {
  check_condition(gmm, cond);
  GmmSpec out;
  out.sigma0 = gmm.sigma0;
  out.scene_count = gmm.scene_count;
  out.subject_count = gmm.subject_count;
  double total = 0.0;
  for (const auto& c : gmm.components) {
    if (cond.scene && c.scene != *cond.scene) continue;
    if (cond.subject && c.subject != *cond.subject) continue;
    out.components.push_back(c);
    total += c.weight;
  }
  if (out.components.empty()) {
    throw EmptyConditionError("restrict: condition leaves no mixture components");
  }
  for (auto& c : out.components) c.weight /= total;
  return out;
}

std::pair<Raster, std::size_t> sample_world(const GmmSpec& gmm,
                                            std::mt19937_64& rng) {
  if (gmm.components.empty()) {
    throw std::invalid_argument("sample_world: empty mixture");
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng) * gmm.total_weight();
  std::size_t k = 0;
  double acc = gmm.components[0].weight;
  while (acc <= u && k + 1 < gmm.components.size()) {
    ++k;
    acc += gmm.components[k].weight;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Raster x = gmm.components[k].mean;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += gmm.sigma0 * normal(rng);
  return {std::move(x), k};
}

}  // namespace fusionlab
