#include "fusionlab/sweep.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "canonical_json.h"
#include "fusionlab/experiment.h"
#include "fusionlab/metrics.h"

namespace fusionlab {

using detail::json;

namespace {

std::vector<double> numbers(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& arr = j.at(key);
  if (!arr.is_array() || arr.empty()) {
    throw std::invalid_argument(std::string("grid: '") + key + "' must be a non-empty list");
  }
  std::vector<double> out;
  for (const json& v : arr) {
    if (!v.is_number()) throw std::invalid_argument(std::string("grid: '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : "NA";
}

}  // namespace

std::string grid_to_text(const SweepGrid& g) {
  json fusions = json::array();
  for (FusionMode f : g.fusions) fusions.push_back(fusion_name(f));
  json j = {{"alpha", g.alphas},        {"beta", g.betas},
            {"guidance_scale", g.scales}, {"fusion", fusions},
            {"runs_per_cell", g.runs_per_cell}, {"master_seed", g.master_seed}};
  if (g.scene) j["scene"] = *g.scene;
  if (g.subject) j["subject"] = *g.subject;
  return detail::canonical_dump(j);
}

SweepGrid parse_grid(std::string_view text) {
  const json j = detail::parse_json(text);
  detail::check_keys(j, {"alpha", "beta", "guidance_scale", "fusion", "runs_per_cell",
                         "master_seed", "scene", "subject"},
                     "grid");
  SweepGrid g;
  g.alphas = numbers(j, "alpha", g.alphas);
  g.betas = numbers(j, "beta", g.betas);
  g.scales = numbers(j, "guidance_scale", g.scales);
  if (j.contains("fusion")) {
    g.fusions.clear();
    for (const json& f : j.at("fusion")) {
      if (!f.is_string()) throw std::invalid_argument("grid: 'fusion' must hold strings");
      g.fusions.push_back(parse_fusion(f.get<std::string>()));
    }
    if (g.fusions.empty()) throw std::invalid_argument("grid: 'fusion' must be non-empty");
  }
  g.runs_per_cell = static_cast<int>(detail::get_integer(j, "runs_per_cell", g.runs_per_cell));
  if (g.runs_per_cell < 1) throw std::invalid_argument("grid: runs_per_cell must be positive");
  g.master_seed = detail::get_unsigned(j, "master_seed", g.master_seed);
  if (j.contains("scene")) g.scene = detail::get_string(j, "scene", "");
  if (j.contains("subject")) g.subject = detail::get_string(j, "subject", "");
  return g;
}

SweepGrid load_grid(const std::string& path) { return parse_grid(detail::read_text_file(path)); }

std::uint64_t derive_seed(std::uint64_t master, int run) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(run) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::pair<int, int> run_condition(const SweepGrid& g, const WorldConfig& world, int run) {
  const int S = static_cast<int>(world.scenes.size());
  const int U = static_cast<int>(world.subjects.size());
  const int scene = g.scene ? world.scene_index(*g.scene) : run % S;
  const int subject = g.subject ? world.subject_index(*g.subject) : (run / S) % U;
  return {scene, subject};
}

std::vector<SweepCell> expand_grid(const SweepGrid& g, const ExperimentConfig& base) {
  std::vector<SweepCell> cells;
  for (double a : g.alphas) {
    for (double b : g.betas) {
      for (double s : g.scales) {
        for (FusionMode f : g.fusions) {
          SweepCell cell;
          cell.index = static_cast<int>(cells.size());
          cell.config = base;
          cell.config.pipeline.stages.alpha = a;
          cell.config.pipeline.stages.beta = b;
          cell.config.pipeline.scene_guidance.scale = s;
          cell.config.pipeline.subject_guidance.scale = s;
          cell.config.pipeline.fusion = f;
          cell.config.seed = g.master_seed;
          if (g.scene) cell.config.scene = *g.scene;
          if (g.subject) cell.config.subject = *g.subject;
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

int SweepResult::failed_runs() const {
  int n = 0;
  for (const CellResult& c : cells) n += c.summary.failed;
  return n;
}

SweepResult run_sweep(const SweepGrid& g, const ExperimentConfig& base, int workers) {
  if (workers < 1) throw std::invalid_argument("run_sweep: workers must be positive");
  const ExperimentContext ctx = make_context(base);
  SweepResult result;
  result.grid = g;
  for (SweepCell& cell : expand_grid(g, base)) {
    CellResult c;
    c.cell = std::move(cell);
    c.runs.resize(static_cast<std::size_t>(g.runs_per_cell));
    result.cells.push_back(std::move(c));
  }

  const std::size_t runs = static_cast<std::size_t>(g.runs_per_cell);
  const std::size_t tasks = result.cells.size() * runs;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      CellResult& cell = result.cells[task / runs];
      const int run = static_cast<int>(task % runs);
      const std::uint64_t seed = derive_seed(g.master_seed, run);
      RunRecord& rec = cell.runs[static_cast<std::size_t>(run)];
      rec.seed = seed;
      try {
        const auto [scene, subject] = run_condition(g, ctx.world, run);
        rec.scene = ctx.world.scenes[static_cast<std::size_t>(scene)];
        rec.subject = ctx.world.subjects[static_cast<std::size_t>(subject)];
        cell.cell.config.pipeline.stages.validate();
        const SampleTrace trace =
            run_experiment(ctx, cell.cell.config.pipeline, scene, subject, seed);
        rec = make_record(measure_run(trace, ctx.world), ctx.world);
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  for (CellResult& c : result.cells) c.summary = summarize(c.runs);
  return result;
}

std::string sweep_table(const SweepResult& r) {
  std::string out =
      "cell\talpha\tbeta\tguidance_scale\tfusion\truns\tfailed\tsubject_fidelity\t"
      "scene_consistency\tsalience_localization_ratio\tscene_salience_ratio\n";
  for (const CellResult& c : r.cells) {
    const PipelineConfig& p = c.cell.config.pipeline;
    out += std::to_string(c.cell.index) + "\t" + format_number(p.stages.alpha) + "\t" +
           format_number(p.stages.beta) + "\t" + format_number(p.scene_guidance.scale) + "\t" +
           fusion_name(p.fusion) + "\t" + std::to_string(c.summary.runs) + "\t" +
           std::to_string(c.summary.failed) + "\t" + format_optional(c.summary.subject_fidelity) +
           "\t" + format_optional(c.summary.scene_consistency) + "\t" +
           format_optional(c.summary.salience_localization_ratio) + "\t" +
           format_optional(c.summary.scene_salience_ratio) + "\n";
  }
  return out;
}

void write_sweep(const SweepResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "cells");
  detail::write_text_file((fs::path(dir) / "sweep.tsv").string(), sweep_table(r));
  for (const CellResult& c : r.cells) {
    char name[32];
    std::snprintf(name, sizeof name, "cell_%04d.json", c.cell.index);
    RunManifest m;
    m.command = "sweep";
    m.config = c.cell.config;
    m.runs = c.runs;
    m.summary = c.summary;
    emit_manifest(m, (fs::path(dir) / "cells" / name).string());
  }
}

}  // namespace fusionlab
