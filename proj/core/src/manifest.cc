#include "fusionlab/manifest.h"

#include <stdexcept>

#include "canonical_json.h"

namespace fusionlab {

using detail::json;

namespace {

void put(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

std::optional<double> take(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return detail::get_number(j, key, 0.0);
}

std::vector<std::string> strings(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const json& s : j.at(key)) {
    if (!s.is_string()) throw std::invalid_argument(std::string("manifest: ") + key + " must hold strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

json metric_fields(const std::optional<double>& f, const std::optional<double>& s,
                   const std::optional<double>& l, const std::optional<double>& ls) {
  json j = json::object();
  put(j, "subject_fidelity", f);
  put(j, "scene_consistency", s);
  put(j, "salience_localization_ratio", l);
  put(j, "scene_salience_ratio", ls);
  return j;
}

json run_json(const RunRecord& r) {
  json j = {{"seed", r.seed},
            {"scene", r.scene},
            {"subject", r.subject},
            {"status", r.ok ? "ok" : "failed"},
            {"artifacts", r.artifacts},
            {"metrics", metric_fields(r.subject_fidelity, r.scene_consistency,
                                      r.salience_localization_ratio, r.scene_salience_ratio)}};
  if (!r.ok) j["error"] = r.error;
  return j;
}

RunRecord run_from(const json& j) {
  detail::check_keys(j, {"seed", "scene", "subject", "status", "artifacts", "metrics", "error"},
                     "manifest run");
  RunRecord r;
  r.seed = detail::get_unsigned(j, "seed", 0);
  r.scene = detail::get_string(j, "scene", "");
  r.subject = detail::get_string(j, "subject", "");
  const std::string status = detail::get_string(j, "status", "ok");
  if (status != "ok" && status != "failed") {
    throw std::invalid_argument("manifest run: unknown status '" + status + "'");
  }
  r.ok = status == "ok";
  r.error = detail::get_string(j, "error", "");
  r.artifacts = strings(j, "artifacts");
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    detail::check_keys(m, {"subject_fidelity", "scene_consistency",
                           "salience_localization_ratio", "scene_salience_ratio"},
                       "manifest metrics");
    r.subject_fidelity = take(m, "subject_fidelity");
    r.scene_consistency = take(m, "scene_consistency");
    r.salience_localization_ratio = take(m, "salience_localization_ratio");
    r.scene_salience_ratio = take(m, "scene_salience_ratio");
  }
  return r;
}

}  // namespace

RunRecord make_record(const SeedMetrics& m, const WorldConfig& world) {
  RunRecord r;
  r.seed = m.seed;
  r.scene = world.scenes.at(static_cast<std::size_t>(m.scene));
  r.subject = world.subjects.at(static_cast<std::size_t>(m.subject));
  r.subject_fidelity = m.subject_fidelity;
  r.scene_consistency = m.scene_consistency;
  if (m.localization) {
    r.salience_localization_ratio = m.localization->subject_ratio;
    r.scene_salience_ratio = m.localization->scene_ratio;
  }
  return r;
}

ManifestSummary summarize(const std::vector<RunRecord>& runs) {
  ManifestSummary s;
  s.runs = static_cast<int>(runs.size());
  auto mean = [&](std::optional<double> RunRecord::*field) -> std::optional<double> {
    double total = 0.0;
    int n = 0;
    for (const RunRecord& r : runs) {
      if (r.ok && (r.*field)) {
        total += *(r.*field);
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return total / n;
  };
  for (const RunRecord& r : runs) s.failed += r.ok ? 0 : 1;
  s.subject_fidelity = mean(&RunRecord::subject_fidelity);
  s.scene_consistency = mean(&RunRecord::scene_consistency);
  s.salience_localization_ratio = mean(&RunRecord::salience_localization_ratio);
  s.scene_salience_ratio = mean(&RunRecord::scene_salience_ratio);
  return s;
}

std::string manifest_to_text(const RunManifest& m) {
  json runs = json::array();
  for (const RunRecord& r : m.runs) runs.push_back(run_json(r));
  json curves = json::object();
  for (const auto& [name, values] : m.loss_curves) curves[name] = values;
  json j = {{"tool_version", m.tool_version},
            {"command", m.command},
            {"config", detail::config_json(m.config)},
            {"runs", runs},
            {"artifacts", m.artifacts},
            {"loss_curves", curves}};
  if (m.summary) {
    json s = metric_fields(m.summary->subject_fidelity, m.summary->scene_consistency,
                           m.summary->salience_localization_ratio,
                           m.summary->scene_salience_ratio);
    s["runs"] = m.summary->runs;
    s["failed"] = m.summary->failed;
    j["summary"] = s;
  }
  if (m.wall_clock_seconds) j["wall_clock_seconds"] = *m.wall_clock_seconds;
  return detail::canonical_dump(j);
}

RunManifest parse_manifest(std::string_view text) {
  const json j = detail::parse_json(text);
  detail::check_keys(j, {"tool_version", "command", "config", "runs", "artifacts",
                         "loss_curves", "summary", "wall_clock_seconds"},
                     "manifest");
  RunManifest m;
  m.tool_version = detail::get_string(j, "tool_version", "");
  m.command = detail::get_string(j, "command", "");
  if (j.contains("config")) m.config = detail::config_from(j.at("config"));
  if (j.contains("runs")) {
    for (const json& r : j.at("runs")) m.runs.push_back(run_from(r));
  }
  m.artifacts = strings(j, "artifacts");
  if (j.contains("loss_curves")) {
    for (auto it = j.at("loss_curves").begin(); it != j.at("loss_curves").end(); ++it) {
      std::vector<double> values;
      for (const json& v : it.value()) {
        if (!v.is_number()) throw std::invalid_argument("manifest: loss curves must be numeric");
        values.push_back(v.get<double>());
      }
      m.loss_curves[it.key()] = std::move(values);
    }
  }
  if (j.contains("summary")) {
    const json& s = j.at("summary");
    detail::check_keys(s, {"runs", "failed", "subject_fidelity", "scene_consistency",
                           "salience_localization_ratio", "scene_salience_ratio"},
                       "manifest summary");
    ManifestSummary sum;
    sum.runs = static_cast<int>(detail::get_integer(s, "runs", 0));
    sum.failed = static_cast<int>(detail::get_integer(s, "failed", 0));
    sum.subject_fidelity = take(s, "subject_fidelity");
    sum.scene_consistency = take(s, "scene_consistency");
    sum.salience_localization_ratio = take(s, "salience_localization_ratio");
    sum.scene_salience_ratio = take(s, "scene_salience_ratio");
    m.summary = sum;
  }
  m.wall_clock_seconds = take(j, "wall_clock_seconds");
  return m;
}

void emit_manifest(const RunManifest& m, const std::string& path) {
  detail::write_text_file(path, manifest_to_text(m));
}

RunManifest read_manifest(const std::string& path) {
  return parse_manifest(detail::read_text_file(path));
}

}  // namespace fusionlab
