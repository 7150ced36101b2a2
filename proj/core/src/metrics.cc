#include "fusionlab/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fusionlab {

bool operator==(const Localization& a, const Localization& b) {
  return a.subject_ratio == b.subject_ratio && a.scene_ratio == b.scene_ratio;
}

double ncc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("ncc: inputs must be non-empty and equally sized");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: size mismatch");
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += a[i] * b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

void check_image(const Raster& img, const WorldConfig& cfg) {
  if (img.height() != cfg.height || img.width() != cfg.width ||
      img.channels() != cfg.channels) {
    throw std::invalid_argument("metrics: image shape does not match the world");
  }
}

bool in_box(int r, int c, Position p, int g) {
  return r >= p.row && r < p.row + g && c >= p.col && c < p.col + g;
}

}  // namespace

std::vector<double> glyph_box(const Raster& img, const WorldConfig& cfg, Position pos) {
  const int g = cfg.glyph_size;
  std::vector<double> out(static_cast<std::size_t>(g) * g, 0.0);
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      double s = 0.0;
      for (int ch = 0; ch < img.channels(); ++ch) s += img.at(pos.row + r, pos.col + c, ch);
      out[static_cast<std::size_t>(r * g + c)] = s / img.channels();
    }
  }
  return out;
}

BoxMatch best_subject_match(const Raster& img, const WorldConfig& cfg, int subject) {
  if (subject < 0 || subject >= static_cast<int>(cfg.subjects.size())) {
    throw std::invalid_argument("unknown subject id " + std::to_string(subject));
  }
  check_image(img, cfg);
  const Raster glyph = glyph_template(cfg, subject);
  BoxMatch best{subject, 0, -2.0};
  for (std::size_t p = 0; p < cfg.positions.size(); ++p) {
    const double score = ncc(glyph_box(img, cfg, cfg.positions[p]), glyph.values());
    if (score > best.score) best = {subject, static_cast<int>(p), score};
  }
  return best;
}

BoxMatch best_box(const Raster& img, const WorldConfig& cfg) {
  BoxMatch best{0, 0, -2.0};
  for (int u = 0; u < static_cast<int>(cfg.subjects.size()); ++u) {
    const BoxMatch m = best_subject_match(img, cfg, u);
    if (m.score > best.score) best = m;
  }
  return best;
}

double subject_fidelity(const Raster& img, const WorldConfig& cfg, int subject) {
  return std::max(0.0, best_subject_match(img, cfg, subject).score);
}

double scene_consistency(const Raster& img, const WorldConfig& cfg, int scene) {
  if (scene < 0 || scene >= static_cast<int>(cfg.scenes.size())) {
    throw std::invalid_argument("unknown scene id " + std::to_string(scene));
  }
  check_image(img, cfg);
  const Raster tmpl = scene_template(cfg, scene);
  const Position box = cfg.positions[static_cast<std::size_t>(best_box(img, cfg).position)];
  std::vector<double> a, b;
  a.reserve(img.size());
  b.reserve(img.size());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (in_box(r, c, box, cfg.glyph_size)) continue;
      for (int ch = 0; ch < img.channels(); ++ch) {
        a.push_back(img.at(r, c, ch));
        b.push_back(tmpl.at(r, c, 0));
      }
    }
  }
  return std::max(0.0, cosine_similarity(a, b));
}

double mass_ratio(const std::vector<Raster>& maps, const WorldConfig& cfg, Position box,
                  bool inside) {
  if (maps.empty()) throw std::invalid_argument("mass_ratio: no salience maps");
  Raster mean(cfg.height, cfg.width, 1);
  for (const Raster& m : maps) {
    if (m.height() != cfg.height || m.width() != cfg.width || m.channels() != 1) {
      throw std::invalid_argument("mass_ratio: salience map shape mismatch");
    }
    mean = add(mean, softmax_over_pixels(m));
  }
  mean = scale(mean, 1.0 / static_cast<double>(maps.size()));
  double mass = 0.0;
  long count = 0;
  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      if (in_box(r, c, box, cfg.glyph_size) == inside) {
        mass += mean.at(r, c, 0);
        ++count;
      }
    }
  }
  if (count == 0) throw std::invalid_argument("mass_ratio: empty region");
  const double fraction = static_cast<double>(count) / (cfg.height * cfg.width);
  return mass / fraction;
}

Localization salience_localization(const SampleTrace& trace, const WorldConfig& cfg,
                                   int subject) {
  std::vector<Raster> omega_s, omega_t;
  for (const StepRecord& rec : trace.steps) {
    if (!rec.snf) continue;
    omega_s.push_back(rec.snf->omega_s);
    omega_t.push_back(rec.snf->omega_t);
  }
  if (omega_s.empty()) {
    throw std::invalid_argument("salience_localization: trace has no fusion steps");
  }
  const BoxMatch match = best_subject_match(trace.final, cfg, subject);
  const Position box = cfg.positions[static_cast<std::size_t>(match.position)];
  return {mass_ratio(omega_s, cfg, box, true), mass_ratio(omega_t, cfg, box, false)};
}

SeedMetrics measure_run(const SampleTrace& trace, const WorldConfig& cfg) {
  if (!trace.scene || !trace.subject) {
    throw std::invalid_argument("measure_run: trace needs a scene and a subject");
  }
  SeedMetrics m;
  m.seed = trace.seed;
  m.scene = *trace.scene;
  m.subject = *trace.subject;
  m.subject_fidelity = subject_fidelity(trace.final, cfg, m.subject);
  m.scene_consistency = scene_consistency(trace.final, cfg, m.scene);
  const bool has_fusion = std::any_of(trace.steps.begin(), trace.steps.end(),
                                      [](const StepRecord& r) { return r.snf.has_value(); });
  if (has_fusion) m.localization = salience_localization(trace, cfg, m.subject);
  return m;
}

MetricsReport aggregate(std::vector<SeedMetrics> per_seed) {
  MetricsReport rep;
  if (!per_seed.empty()) {
    double f = 0.0, s = 0.0, ls = 0.0, lt = 0.0;
    int nl = 0;
    for (const SeedMetrics& m : per_seed) {
      f += m.subject_fidelity;
      s += m.scene_consistency;
      if (m.localization) {
        ls += m.localization->subject_ratio;
        lt += m.localization->scene_ratio;
        ++nl;
      }
    }
    const double n = static_cast<double>(per_seed.size());
    rep.subject_fidelity = f / n;
    rep.scene_consistency = s / n;
    if (nl > 0) {
      rep.salience_localization_ratio = ls / nl;
      rep.scene_salience_ratio = lt / nl;
    }
  }
  rep.per_seed = std::move(per_seed);
  return rep;
}

}  // namespace fusionlab
