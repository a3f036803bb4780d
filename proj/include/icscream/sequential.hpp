#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icscream/dataset.hpp"
#include "icscream/gp.hpp"

namespace icscream {

struct SequentialOptions {
  MaternNu nu = MaternNu::five_halves;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  int starts = 10;
  int max_evaluations = 200;
  int cv_evaluations = 50;
  bool estimate_nugget = true;
  /// Steps whose Q2 is within this distance of the best count as tied; the
  /// tie goes to the step with fewer inputs.
  double tie_tolerance = 1e-3;
};

struct SequentialStep {
  std::size_t step = 0;               // 1-based
  std::vector<std::size_t> inputs;    // sample column indices, model order
  double q2 = 0.0;                    // NaN when the step failed
  bool failed = false;
  std::string message;
  GpHyperparams hyperparams;
};

struct SequentialResult {
  GpModel model;
  std::vector<SequentialStep> steps;
  std::size_t selected_step = 0;  // index into steps
};

/// Input set of step k: the first k ranked inputs, followed by any
/// penalizing input not among them.
std::vector<std::size_t> step_inputs(std::span<const std::size_t> ranking, std::size_t k,
                                     std::span<const std::size_t> penalize);

/// Fits the process on growing prefixes of `ranking`, warm-starting each
/// step from the previous one (new lengths start at 1), scores every step by
/// K-fold Q2 and keeps the best. Steps whose input set repeats the previous
/// one are skipped. Step k fits with seed derive_seed(seed, k); cross-
/// validation uses derive_seed(seed, "cv") for every step so that all steps
/// share the same folds.
SequentialResult build_sequential(const LearningSample& sample, std::span<const std::size_t> ranking,
                                  const SequentialOptions& options);

}  // namespace icscream
