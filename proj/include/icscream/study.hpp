#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "icscream/dataset.hpp"
#include "icscream/gp.hpp"
#include "icscream/hsic.hpp"

namespace icscream {

struct BootstrapConfig {
  int resamples = 50;
  std::vector<std::size_t> sizes;  // empty: 5 evenly spaced sizes up to n
};

/// Every tunable of a study. Defaults follow the reference workflow
/// (90% quantile, alpha = 10%, 10-fold cross-validation).
struct StudyConfig {
  std::filesystem::path sample_path;
  std::string output_column = "y";
  std::vector<VariableSpec> variables;
  std::uint64_t seed = 0;

  // screening
  double quantile_level = 0.9;
  double alpha = 0.1;
  int permutations = 999;
  KernelConfig kernel;
  Relaxation relaxation = Relaxation::hard;
  std::optional<double> relaxation_scale;  // default std(y) / 5

  // metamodel
  MaternNu nu = MaternNu::five_halves;
  std::size_t folds = 10;
  int starts = 10;
  int max_evaluations = 200;
  int cv_evaluations = 50;
  bool estimate_nugget = true;
  double tie_tolerance = 1e-3;

  // validation
  std::vector<double> calibration_levels;  // empty: 0.05 .. 0.95
  std::optional<BootstrapConfig> bootstrap;

  // exceedance map
  std::size_t grid1 = 50;
  std::size_t grid2 = 50;
  std::size_t mc_samples = 10000;
};

/// Parses a study config. Relative sample paths resolve against `base_dir`.
/// Unknown keys anywhere are rejected with Error(config).
StudyConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
StudyConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const StudyConfig& config);

nlohmann::json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);

/// Hex SHA-256 of a file's bytes / of a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_string(const std::string& content);

/// Model document: hyperparameters, standardization constants, input
/// columns and a reference (path + content hash) to the training data.
nlohmann::json model_to_json(const GpModel& model, const LearningSample& sample,
                             const std::filesystem::path& sample_path, const std::string& sample_hash);

/// Rebuilds the conditioned model from its document and the learning
/// sample; throws Error(config) when the sample hash does not match.
GpModel model_from_json(const nlohmann::json& j, const LearningSample& sample, const std::string& sample_hash);

/// Shortest round-trip decimal form used in CSV reports.
std::string format_number(double v);

}  // namespace icscream
