#pragma once

// Experiment configuration, validation and orchestration.
//
// A config is a JSON object; see docs/config.schema.json. Fields:
//   kind        basis | kernel-scaling | jpd | measures-selftest | tian | supnorm | kodaira-probe
//   seed        unsigned 64-bit root seed (required)
//   model       {m, N (int or strictly increasing list), weight}
//   base        homogeneous chart base point, m+1 complex numbers
//   points      list of points, each m complex numbers
//   grid        {radius, step, angles} (kernel-scaling) or {constant} (supnorm)
//   ensemble    sphere | gaussian | ball
//   samples     Monte Carlo sample count
//   workers     worker count (0 = SZLAB_WORKERS or 1)
//   output      {dir}
//   probe       {v, t} (kodaira-probe)
//   max_order   0..2 (supnorm)
// Complex numbers are written as a number or a [re, im] pair.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "szlab/measures.hpp"
#include "szlab/model.hpp"
#include "szlab/parallel.hpp"

namespace szlab {

inline constexpr const char* kSoftwareName = "szlab";
inline constexpr const char* kSoftwareVersion = "0.1.0";

/// Cap on grid evaluations (pairs x angle pairs for kernel-scaling, grid
/// points x d_N x samples for supnorm).
inline constexpr double kMaxGridWork = 2e11;

enum class ExperimentKind { basis, kernel_scaling, jpd, measures_selftest, tian, supnorm, kodaira_probe };

std::string to_string(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::basis;
  std::uint64_t seed = 0;
  int m = 1;
  std::vector<int> N;
  std::string weight = "0";
  std::vector<cd> base;                 // m+1 entries
  std::vector<std::vector<cd>> points;  // each m entries
  double grid_radius = 2.0;
  double grid_step = 0.25;
  std::vector<double> grid_angles{0.0, 0.7853981633974483};
  double grid_constant = 0.15;
  Ensemble ensemble = Ensemble::sphere;
  std::size_t samples = 0;
  int workers = 0;
  std::string out_dir = "out";
  std::vector<cd> probe_v;
  std::vector<double> probe_t;
  int max_order = 1;
  nlohmann::json source;  // the config as given (after --seed override)
};

struct SchemaIssue {
  std::string path;
  std::string message;
  std::optional<std::size_t> position;  // weight parse position
};

struct ValidationResult {
  std::vector<SchemaIssue> issues;
  std::optional<ExperimentConfig> config;  // set when issues is empty
  bool ok() const { return issues.empty(); }
  nlohmann::json to_json() const;
};

/// Lists every schema violation; never throws.
ValidationResult validate_config(const nlohmann::json& j);

struct CapIssue {
  std::string what;
  double requested = 0.0;
  double limit = 0.0;
};

/// Resource caps (d_N, jet components, samples, grid work), checked from the
/// config alone before any basis is built.
std::vector<CapIssue> check_caps(const ExperimentConfig& c);

enum ExitCode : int { kExitOk = 0, kExitSchema = 2, kExitCap = 3, kExitNumerical = 4 };

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json manifest;
  std::vector<std::filesystem::path> files;  // reports written, manifest excluded
};

/// Validates, checks caps and runs the experiment, writing reports,
/// manifest.json and (on failure) error.json into `out_dir`. `seed_override`
/// replaces the config seed; `workers` > 0 overrides the config. An empty
/// `out_dir` selects output.dir from the config.
RunOutcome run_experiment(const nlohmann::json& config, const std::filesystem::path& out_dir = {},
                          std::optional<std::uint64_t> seed_override = std::nullopt, int workers = 0);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& p);

}  // namespace szlab
