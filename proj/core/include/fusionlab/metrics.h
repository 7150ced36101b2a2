#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fusionlab/grid.h"
#include "fusionlab/pipeline.h"
#include "fusionlab/world.h"

namespace fusionlab {

// Centered normalized cross-correlation in [-1, 1]; 0 when either side has
// zero variance. Inputs must have the same size.
double ncc(std::span<const double> a, std::span<const double> b);

// Uncentered cosine similarity; 0 when either side has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Channel-averaged glyph_size box at `pos`.
std::vector<double> glyph_box(const Raster& img, const WorldConfig& cfg, Position pos);

struct BoxMatch {
  int subject = 0;
  int position = 0;
  double score = 0.0;  // raw NCC
};

// Best NCC of `subject`'s glyph over the configured positions.
BoxMatch best_subject_match(const Raster& img, const WorldConfig& cfg, int subject);
// Best match over every subject and position; ties go to the first.
BoxMatch best_box(const Raster& img, const WorldConfig& cfg);

// max(0, best NCC) of the subject glyph over positions.
double subject_fidelity(const Raster& img, const WorldConfig& cfg, int subject);

// Cosine similarity to the scene template over pixels outside best_box(img),
// clamped to [0, 1].
double scene_consistency(const Raster& img, const WorldConfig& cfg, int scene);

struct Localization {
  double subject_ratio = 0.0;  // softmax(Omega^S) mass inside the box / area fraction
  double scene_ratio = 0.0;    // softmax(Omega^T) mass outside the box / area fraction
};

// Averages the per-step softmax-normalized maps before measuring mass.
double mass_ratio(const std::vector<Raster>& maps, const WorldConfig& cfg, Position box,
                  bool inside);

// Box = best position of `subject` in the final raster. Throws when the trace
// has no fusion steps.
Localization salience_localization(const SampleTrace& trace, const WorldConfig& cfg,
                                   int subject);

struct SeedMetrics {
  std::uint64_t seed = 0;
  int scene = 0;
  int subject = 0;
  double subject_fidelity = 0.0;
  double scene_consistency = 0.0;
  std::optional<Localization> localization;

  bool operator==(const SeedMetrics&) const = default;
};

struct MetricsReport {
  double subject_fidelity = 0.0;
  double scene_consistency = 0.0;
  // Means over the seeds that have fusion steps; absent otherwise.
  std::optional<double> salience_localization_ratio;
  std::optional<double> scene_salience_ratio;
  std::vector<SeedMetrics> per_seed;
};

SeedMetrics measure_run(const SampleTrace& trace, const WorldConfig& cfg);
MetricsReport aggregate(std::vector<SeedMetrics> per_seed);

bool operator==(const Localization& a, const Localization& b);

}  // namespace fusionlab
