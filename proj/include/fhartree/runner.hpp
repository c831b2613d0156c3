#ifndef FHARTREE_RUNNER_HPP
#define FHARTREE_RUNNER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fhartree/grid.hpp"
#include "fhartree/multipliers.hpp"

namespace fhartree {

// Configuration-driven experiment runner. A run consumes one JSON config
// document, executes the named experiment, and leaves a self-contained run
// directory: manifest.json (effective config, checks, verdict), CSV tables,
// and binary field files. Exit codes: 0 pass, 1 numerical failure, 2 config
// error. FHARTREE_WORKERS bounds the scan worker pool.

extern const std::vector<std::string> experiment_names;

struct RunConfig {
  std::string experiment;
  RadialGrid grid;
  ModelParams model;
  std::uint64_t seed = 1234;
  std::filesystem::path output_dir;
  nlohmann::json params;     // experiment-specific block, validated per experiment
  nlohmann::json effective;  // full config with defaults filled in
};

/// Parse + validate. Unknown keys are rejected; JSON syntax errors carry the
/// line number. `expected_experiment` pins the experiment to a CLI subcommand.
RunConfig parse_config_text(const std::string& text,
                            const std::optional<std::string>& expected_experiment,
                            const std::optional<std::string>& output_override);
RunConfig parse_config_file(const std::filesystem::path& path,
                            const std::optional<std::string>& expected_experiment,
                            const std::optional<std::string>& output_override);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string comparator;  // "abs_lt" |value| < tol, "lt" value < tol, "ge" value >= tol
  bool pass = false;
};

Check check_abs_lt(const std::string& name, double value, double tol);
Check check_lt(const std::string& name, double value, double tol);
Check check_ge(const std::string& name, double value, double tol);

struct RunManifest {
  std::string experiment;
  nlohmann::json config;
  std::string version;
  double wall_clock_sec = 0.0;
  std::vector<Check> checks;
  std::string status;  // "pass", "fail", or "error"
  std::string error;
  std::vector<std::string> tables;
  std::vector<std::string> fields;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Execute the experiment and write the run directory. Numerical guard
/// failures produce a manifest with status "error" rather than throwing.
RunManifest run(const RunConfig& config);

/// 0 for pass, 1 otherwise.
int exit_code(const RunManifest& manifest);

/// Field-by-field diff of two manifests of the same experiment. Entries are
/// emitted only for checks whose values differ, so identical manifests give
/// an empty "fields" list.
nlohmann::json compare_manifests(const std::filesystem::path& a,
                                 const std::filesystem::path& b);

}  // namespace fhartree

#endif
