#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fusionlab/config.h"
#include "fusionlab/error.h"
#include "fusionlab/experiment.h"
#include "fusionlab/image_io.h"
#include "fusionlab/manifest.h"
#include "fusionlab/metrics.h"
#include "fusionlab/mlp.h"
#include "fusionlab/oracle/suites.h"
#include "fusionlab/sweep.h"

namespace fs = std::filesystem;
using namespace fusionlab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRunFailure = 2, kValidationFailure = 3 };

// Thrown for bad configuration so that it maps to the usage exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scene;
  std::optional<std::string> subject;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> scale;
  std::optional<std::string> fusion;
  std::optional<std::string> anchor;
  bool timing = false;
};

void add_config_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Configuration file (canonical JSON)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--scene", o.scene, "Scene name");
  cmd->add_option("--subject", o.subject, "Subject name");
  cmd->add_option("--alpha", o.alpha, "End of scene construction (fraction of steps)");
  cmd->add_option("--beta", o.beta, "End of fusion (fraction of steps)");
  cmd->add_option("--scale", o.scale, "Guidance scale for both experts");
  cmd->add_option("--fusion", o.fusion, "Stage-II fusion")
      ->check(CLI::IsMember({"snf", "addition"}));
  cmd->add_option("--subject-anchor,--eq2-anchor", o.anchor, "Base term of subject guidance")
      ->check(CLI::IsMember({"unconditional", "conditional"}));
  cmd->add_flag("--timing", o.timing, "Record wall-clock duration in the manifest");
}

ExperimentConfig resolve(const Overrides& o) {
  try {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.scene) c.scene = *o.scene;
    if (o.subject) c.subject = *o.subject;
    if (o.alpha) c.pipeline.stages.alpha = *o.alpha;
    if (o.beta) c.pipeline.stages.beta = *o.beta;
    if (o.scale) {
      c.pipeline.scene_guidance.scale = *o.scale;
      c.pipeline.subject_guidance.scale = *o.scale;
    }
    if (o.fusion) c.pipeline.fusion = parse_fusion(*o.fusion);
    if (o.anchor) c.pipeline.subject_guidance.anchor = parse_anchor(*o.anchor);
    c.validate();
    return c;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string step_name(int step, const char* what) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "salience/step_%02d_%s.ppm", step, what);
  return buf;
}

// One pipeline run with image, manifest and optional salience dumps.
int run_generate(const Overrides& o, bool dump_salience, bool print_localization,
                 const char* command) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = resolve(o);
  const ExperimentContext ctx = [&] {
    try {
      return make_context(cfg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    }
  }();
  const int scene = cfg.world.scene_index(cfg.scene);
  const int subject = cfg.world.subject_index(cfg.subject);
  fs::create_directories(o.out);

  RunManifest m;
  m.command = command;
  m.config = cfg;
  RunRecord rec;
  rec.seed = cfg.seed;
  rec.scene = cfg.scene;
  rec.subject = cfg.subject;
  int status = kOk;
  try {
    const SampleTrace trace = run_experiment(ctx, cfg.pipeline, scene, subject, cfg.seed);
    rec = make_record(measure_run(trace, ctx.world), ctx.world);
    emit_image(trace.final, (fs::path(o.out) / "sample.ppm").string());
    rec.artifacts.push_back("sample.ppm");
    if (dump_salience) {
      fs::create_directories(fs::path(o.out) / "salience");
      for (const StepRecord& s : trace.steps) {
        if (!s.snf) continue;
        const std::pair<const char*, const Raster*> maps[] = {
            {"omega_t", &s.snf->omega_t}, {"omega_s", &s.snf->omega_s}, {"mask", &s.snf->mask}};
        for (const auto& [what, map] : maps) {
          const std::string rel = step_name(s.step, what);
          emit_image(normalize_for_display(*map), (fs::path(o.out) / rel).string());
          rec.artifacts.push_back(rel);
        }
      }
    }
    std::printf("subject_fidelity\t%.17g\nscene_consistency\t%.17g\n", *rec.subject_fidelity,
                *rec.scene_consistency);
    if (print_localization) {
      if (rec.salience_localization_ratio) {
        std::printf("salience_localization_ratio\t%.17g\nscene_salience_ratio\t%.17g\n",
                    *rec.salience_localization_ratio, *rec.scene_salience_ratio);
      } else {
        std::printf("salience_localization_ratio\tNA (no fusion steps)\n");
      }
    }
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    std::cerr << "run failed: " << e.what() << "\n";
    status = kRunFailure;
  }
  m.runs.push_back(rec);
  m.summary = summarize(m.runs);
  if (o.timing) m.wall_clock_seconds = seconds_since(start);
  emit_manifest(m, (fs::path(o.out) / "manifest.json").string());
  return status;
}

int run_sweep_command(const Overrides& o, const std::string& grid_path, int workers) {
  const ExperimentConfig cfg = resolve(o);
  SweepGrid grid;
  try {
    grid = load_grid(grid_path);
    if (o.seed) grid.master_seed = *o.seed;
    if (o.fusion) grid.fusions = {parse_fusion(*o.fusion)};
    if (grid.scene) cfg.world.scene_index(*grid.scene);
    if (grid.subject) cfg.world.subject_index(*grid.subject);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  const SweepResult r = run_sweep(grid, cfg, workers);
  write_sweep(r, o.out);
  std::cout << sweep_table(r);
  if (r.failed_runs() > 0) {
    std::cerr << r.failed_runs() << " run(s) failed; see the cell manifests\n";
    return kRunFailure;
  }
  return kOk;
}

int run_validate() {
  bool ok = true;
  for (const oracle::SuiteResult& r : oracle::run_all_suites()) {
    std::printf("%s %-24s %s (%.3f s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str(), r.seconds);
    ok = ok && r.passed;
  }
  return ok ? kOk : kValidationFailure;
}

int run_train(const Overrides& o) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = resolve(o);
  if (o.seed) {
    cfg.scene_training.seed = *o.seed * 2 + 1;
    cfg.subject_training.seed = *o.seed * 2 + 2;
  }
  fs::create_directories(o.out);
  RunManifest m;
  m.command = "train";
  m.config = cfg;
  try {
    const NoiseSchedule s = build_schedule(cfg.schedule);
    const TrainedPair pair = train_pair(cfg.world, s, cfg.scene_training, cfg.subject_training);
    save_mlp(pair.scene_expert.model, (fs::path(o.out) / "scene_expert.mlp").string());
    save_mlp(pair.subject_expert.model, (fs::path(o.out) / "subject_expert.mlp").string());
    m.artifacts = {"scene_expert.mlp", "subject_expert.mlp"};
    m.loss_curves["scene_expert"] = pair.scene_expert.loss_curve;
    m.loss_curves["subject_expert"] = pair.subject_expert.loss_curve;
    if (o.timing) m.wall_clock_seconds = seconds_since(start);
    emit_manifest(m, (fs::path(o.out) / "manifest.json").string());
    std::printf("final loss\tscene_expert %.6g\tsubject_expert %.6g\n",
                pair.scene_expert.loss_curve.empty() ? 0.0 : pair.scene_expert.loss_curve.back(),
                pair.subject_expert.loss_curve.empty() ? 0.0 : pair.subject_expert.loss_curve.back());
  } catch (const TrainingFailure& e) {
    std::cerr << "training failed at step " << e.step() << ": " << e.what() << "\n";
    return kRunFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative scene/subject diffusion sampler on a synthetic world"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  Overrides gen, sal, swp, trn;
  bool dump_salience = false;
  auto* generate = app.add_subcommand("generate", "One pipeline run: image + manifest");
  add_config_options(generate, gen);
  generate->add_flag("--dump-salience", dump_salience, "Also write per-step salience and masks");

  auto* salience = app.add_subcommand("salience", "Run and dump per-step salience/mask images");
  add_config_options(salience, sal);

  std::string grid_path;
  int workers = 1;
  auto* sweep = app.add_subcommand("sweep", "Grid file -> table + per-cell manifests");
  add_config_options(sweep, swp);
  sweep->add_option("--grid", grid_path, "Sweep grid file")->required();
  sweep->add_option("--workers", workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Run the brute-force oracle suites");

  auto* train = app.add_subcommand("train", "Train both learned denoisers");
  add_config_options(train, trn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) return run_generate(gen, dump_salience, false, "generate");
    if (*salience) return run_generate(sal, true, true, "salience");
    if (*sweep) return run_sweep_command(swp, grid_path, workers);
    if (*validate) return run_validate();
    if (*train) return run_train(trn);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
  return kUsage;
}
