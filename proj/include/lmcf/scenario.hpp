#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace lmcf {

// Run configuration (JSON):
//   {"schema_version": 1, "scenario": name, "seed": uint, "refine": int >= 0,
//    "fixture": {"name": ..., "params": {...}}, "settings": {...}, "output": dir}
// "output" is a default bundle directory; it is left out of the hash and the summary.
// Missing keys take the scenario defaults; unknown keys are rejected with ConfigInvalid.
// `refine` halves the spatial step (and quarters dt) that many times where a scenario has a base
// resolution.
constexpr int scenario_schema_version = 1;

struct ScenarioInfo {
  std::string name;
  std::string summary;
  nlohmann::json defaults;  // full default configuration
};

const std::vector<ScenarioInfo>& scenario_catalog();
nlohmann::json default_config(const std::string& scenario);
// Fills defaults and validates; throws ConfigInvalid.
nlohmann::json normalize_config(const nlohmann::json& config);
// FNV-1a 64 of the canonical dump of the normalized configuration, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", "<=", ">", ">=", "==" between value and threshold
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScenarioReport {
  std::string scenario;
  nlohmann::json config;  // normalized
  std::string hash;
  std::map<std::string, double> metrics;
  // Declared agreement tolerance per metric for compare_runs (absent: exact).
  std::map<std::string, double> tolerances;
  std::vector<Check> checks;
  std::map<std::string, Table> tables;
  std::vector<std::string> errors;  // module errors that ended the run (also a failed check)
  double runtime_seconds = 0.0;  // not part of the summary

  bool pass() const;
  // Deterministic summary: no timestamps, runtimes or host data.
  nlohmann::json summary() const;
};

// Throws ConfigInvalid; module errors are recorded in the report.
ScenarioReport run_scenario(const nlohmann::json& config);

// Writes <dir>/summary.json and <dir>/<table>.csv; every CSV starts with "# config_hash=<hash>".
// Returns the files written.
std::vector<std::string> write_bundle(const ScenarioReport& report, const std::string& dir);
nlohmann::json load_summary(const std::string& path);

struct MetricDelta {
  std::string name;
  double a = 0.0;
  double b = 0.0;
  double tolerance = 0.0;
  bool flagged = false;  // |a - b| > tolerance
};

struct RunDiff {
  std::vector<MetricDelta> deltas;  // metrics whose values differ
  std::vector<std::string> check_changes;  // checks whose verdict differs
  bool drift = false;  // any flagged delta or verdict change
};

// Compares two summaries. Throws SchemaMismatch when the schema version, scenario, fixture name or
// metric set differ. Tolerance per metric is the larger of the two declared values.
RunDiff compare_runs(const nlohmann::json& a, const nlohmann::json& b);

}  // namespace lmcf
