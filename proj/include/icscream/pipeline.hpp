#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "icscream/synthetic.hpp"

namespace icscream {

/// Shared arguments of the study verbs. Reports go to `out`; later stages
/// read the reports of earlier ones from the same directory.
struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

// Each stage draws its randomness from derive_seed(seed, "<stage>") and
// appends an entry (config hash, input and output file hashes) to
// <out>/manifest.json.

/// screening.json, screening_pvalues.csv
void cmd_screen(const RunOptions& options);

/// model.json, fit_steps.csv. Needs screening.json.
void cmd_fit(const RunOptions& options);

/// validation.json, cv_predictions.csv, calibration.csv. Needs model.json.
void cmd_validate(const RunOptions& options);

/// exceedance.csv, exceedance_plugin.csv, exceedance.json. Needs model.json
/// and exactly two penalize variables.
void cmd_map(const RunOptions& options);

void run_all(const RunOptions& options);

/// Writes sample.csv, truth.json and a ready-to-run study.json into `out`.
void cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& out);

}  // namespace icscream
