#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icscream/dataset.hpp"
#include "icscream/hsic.hpp"

namespace icscream {

struct HsicTestResult {
  std::size_t input_index = 0;
  double statistic = 0.0;
  double pvalue_permutation = 1.0;
  double pvalue_gamma = 1.0;  // NaN when n < 20
  int permutations = 0;
};

struct ScreeningOptions {
  KernelConfig kernel;        // applied to each input and, for global HSIC, to the output
  TargetConfig target;
  double alpha = 0.1;
  int permutations = 999;
  std::uint64_t seed = 0;
};

/// Outcome of global and target independence tests on every tested input.
/// `selected` lists the primary influential inputs, most influential first,
/// followed by any penalizing inputs that no test rejected.
struct ScreeningResult {
  std::vector<HsicTestResult> global;
  std::vector<HsicTestResult> target;
  double alpha = 0.1;
  std::vector<std::size_t> selected;
  std::vector<std::size_t> forced;  // penalizing inputs appended without rejection
};

/// Aggregated ranking with priority to the target tests:
///   1. inputs with target p < alpha, ascending target p;
///   2. other inputs with global p < alpha, ascending global p;
///   3. `forced` inputs not already listed, in the given order.
/// Ties are broken by ascending input index. `global` and `target` must
/// list the same inputs in the same order.
std::vector<std::size_t> rank_inputs(std::span<const HsicTestResult> global,
                                     std::span<const HsicTestResult> target, double alpha,
                                     std::span<const std::size_t> forced);

/// Runs both tests on every input whose role is not `fixed`. Per-input
/// permutation streams are derived from (seed, input index), so results do
/// not depend on evaluation order.
ScreeningResult screen(const LearningSample& sample, const ScreeningOptions& options);

}  // namespace icscream
