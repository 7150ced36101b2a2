#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fusionlab/grid.h"

namespace fusionlab {

// Top-left corner of a pasted glyph box.
struct Position {
  int row = 0;
  int col = 0;
  bool operator==(const Position&) const = default;
};

// Procedural scene + subject universe. Scene and subject ids are stable
// template names; conditions and mixture components refer to them by index
// into `scenes` / `subjects`.
struct WorldConfig {
  int height = 32;
  int width = 32;
  int channels = 1;
  std::vector<std::string> scenes = {"horizontal_gradient", "vertical_gradient",
                                     "checkerboard", "flat_gray"};
  std::vector<std::string> subjects = {"cross", "square", "disk", "triangle"};
  int glyph_size = 10;
  std::vector<Position> positions = {{3, 3}, {3, 19}, {19, 3}, {19, 19}};
  double sigma0 = 0.05;

  // Throws std::invalid_argument on unknown templates, non-positive sizes,
  // sigma0 <= 0 or a glyph box that does not fit at some position.
  void validate() const;

  int scene_index(const std::string& name) const;
  int subject_index(const std::string& name) const;

  bool operator==(const WorldConfig&) const = default;
};

const std::vector<std::string>& known_scene_templates();
const std::vector<std::string>& known_subject_templates();

// Null fields stand for the null condition of classifier-free guidance.
struct Condition {
  std::optional<int> scene;
  std::optional<int> subject;

  static Condition null() { return {}; }
  bool operator==(const Condition&) const = default;
};

// Single-channel template renderings, values in [0, 1].
Raster scene_template(const WorldConfig& cfg, int scene);
// glyph_size x glyph_size patch: ink 1.0 on paper 0.0.
Raster glyph_template(const WorldConfig& cfg, int subject);

// Scene with the whole glyph box pasted at `pos`. Multi-channel configs
// replicate the grayscale value into every channel.
Raster compose(const WorldConfig& cfg, int scene, int subject, Position pos);

struct GmmComponent {
  int scene = 0;
  int subject = 0;
  int position = 0;
  Raster mean;
  double weight = 0.0;
};

// Mixture of isotropic Gaussians N(mean_k, sigma0^2 I).
struct GmmSpec {
  std::vector<GmmComponent> components;
  double sigma0 = 0.0;
  int scene_count = 0;
  int subject_count = 0;

  std::size_t size() const { return components.size(); }
  double total_weight() const;
};

// One uniformly weighted component per (scene, subject, position).
GmmSpec build_gmm(const WorldConfig& cfg);

// Keeps the components matching every non-null field and renormalizes.
// Throws EmptyConditionError when nothing matches.
GmmSpec restrict(const GmmSpec& gmm, const Condition& cond);

// Throws std::invalid_argument when a present id is out of range.
void check_condition(const GmmSpec& gmm, const Condition& cond);

// Draws a component by weight, then adds N(0, sigma0^2) per entry.
std::pair<Raster, std::size_t> sample_world(const GmmSpec& gmm,
                                            std::mt19937_64& rng);

}  // namespace fusionlab
