#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fusionlab/config.h"
#include "fusionlab/manifest.h"

namespace fusionlab {

// Cartesian grid over alpha x beta x guidance scale x fusion mode. Every cell
// runs the same `runs_per_cell` seeds, so cells are paired run by run.
struct SweepGrid {
  std::vector<double> alphas = {0.3};
  std::vector<double> betas = {0.6};
  std::vector<double> scales = {3.0};  // applied to both guidance configs
  std::vector<FusionMode> fusions = {FusionMode::kSnf};
  int runs_per_cell = 1;
  std::uint64_t master_seed = 0;
  // Fixed condition; when absent run r uses scene r % S, subject (r / S) % U.
  std::optional<std::string> scene;
  std::optional<std::string> subject;

  bool operator==(const SweepGrid&) const = default;
};

std::string grid_to_text(const SweepGrid& g);
SweepGrid parse_grid(std::string_view text);
SweepGrid load_grid(const std::string& path);

// splitmix64 of (master, run).
std::uint64_t derive_seed(std::uint64_t master, int run);
std::pair<int, int> run_condition(const SweepGrid& g, const WorldConfig& world, int run);

struct SweepCell {
  int index = 0;
  ExperimentConfig config;  // base config with the cell's overrides applied
};

// Cells in row-major order of (alpha, beta, scale, fusion).
std::vector<SweepCell> expand_grid(const SweepGrid& g, const ExperimentConfig& base);

struct CellResult {
  SweepCell cell;
  std::vector<RunRecord> runs;  // indexed by run
  ManifestSummary summary;
};

struct SweepResult {
  SweepGrid grid;
  std::vector<CellResult> cells;

  int failed_runs() const;
};

// Runs every (cell, run) task on `workers` threads. Results do not depend on
// the worker count or on scheduling order. Failed runs are recorded, not
// thrown.
SweepResult run_sweep(const SweepGrid& g, const ExperimentConfig& base, int workers);

// Tab-separated, one header line plus one line per cell.
std::string sweep_table(const SweepResult& r);

// Writes <dir>/sweep.tsv and <dir>/cells/cell_NNNN.json.
void write_sweep(const SweepResult& r, const std::string& dir);

}  // namespace fusionlab
