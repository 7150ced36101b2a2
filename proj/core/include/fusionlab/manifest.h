#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fusionlab/config.h"
#include "fusionlab/metrics.h"

namespace fusionlab {

struct RunRecord {
  std::uint64_t seed = 0;
  std::string scene;
  std::string subject;
  bool ok = true;
  std::string error;  // set when !ok
  std::optional<double> subject_fidelity;
  std::optional<double> scene_consistency;
  std::optional<double> salience_localization_ratio;
  std::optional<double> scene_salience_ratio;
  std::vector<std::string> artifacts;  // relative to the manifest's directory

  bool operator==(const RunRecord&) const = default;
};

struct ManifestSummary {
  int runs = 0;
  int failed = 0;
  std::optional<double> subject_fidelity;
  std::optional<double> scene_consistency;
  std::optional<double> salience_localization_ratio;
  std::optional<double> scene_salience_ratio;

  bool operator==(const ManifestSummary&) const = default;
};

struct RunManifest {
  std::string tool_version = fusionlab::tool_version();
  std::string command;
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::optional<ManifestSummary> summary;
  std::vector<std::string> artifacts;
  std::map<std::string, std::vector<double>> loss_curves;
  // Off by default so that repeated runs produce identical files.
  std::optional<double> wall_clock_seconds;

  bool operator==(const RunManifest&) const = default;
};

// Metrics of one finished run, in manifest form.
RunRecord make_record(const SeedMetrics& m, const WorldConfig& world);
// Means over the successful runs; aggregates agree with MetricsReport.
ManifestSummary summarize(const std::vector<RunRecord>& runs);

std::string manifest_to_text(const RunManifest& m);
RunManifest parse_manifest(std::string_view text);
void emit_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace fusionlab
