#include "icscream/screening.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "icscream/error.hpp"

namespace icscream {

namespace {

HsicTestResult run_test(const HsicPair& pair, std::size_t input, int permutations, std::uint64_t seed) {
  HsicTestResult r;
  r.input_index = input;
  r.permutations = permutations;
  r.statistic = pair.statistic();
  r.pvalue_permutation = permutation_pvalue(
      [&pair](std::span<const std::size_t> perm) { return pair.permuted(perm); }, pair.size(),
      r.statistic, permutations, seed);
  // The asymptotic test is undefined on very small samples; reported as missing.
  r.pvalue_gamma = pair.size() >= 20 ? pair.gamma_pvalue() : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace

std::vector<std::size_t> rank_inputs(std::span<const HsicTestResult> global,
                                     std::span<const HsicTestResult> target, double alpha,
                                     std::span<const std::size_t> forced) {
  if (global.size() != target.size()) {
    throw Error(ErrorKind::invalid_argument, "global and target results differ in length");
  }
  struct Entry {
    std::size_t index;
    double p;
  };
  std::vector<Entry> by_target;
  std::vector<Entry> by_global;
  for (std::size_t k = 0; k < global.size(); ++k) {
    if (global[k].input_index != target[k].input_index) {
      throw Error(ErrorKind::invalid_argument, "global and target results list different inputs");
    }
    if (target[k].pvalue_permutation < alpha) {
      by_target.push_back({target[k].input_index, target[k].pvalue_permutation});
    } else if (global[k].pvalue_permutation < alpha) {
      by_global.push_back({global[k].input_index, global[k].pvalue_permutation});
    }
  }
  const auto order = [](const Entry& a, const Entry& b) {
    return a.p != b.p ? a.p < b.p : a.index < b.index;
  };
  std::sort(by_target.begin(), by_target.end(), order);
  std::sort(by_global.begin(), by_global.end(), order);

  std::vector<std::size_t> ranked;
  for (const auto& e : by_target) ranked.push_back(e.index);
  for (const auto& e : by_global) ranked.push_back(e.index);
  for (std::size_t f : forced) {
    if (std::find(ranked.begin(), ranked.end(), f) == ranked.end()) ranked.push_back(f);
  }
  return ranked;
}

ScreeningResult screen(const LearningSample& sample, const ScreeningOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "alpha must lie in (0, 1)");
  }
  if (options.permutations < 1) {
    throw Error(ErrorKind::invalid_argument, "need at least one permutation");
  }
  const auto& y = sample.output();
  const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));

  const Eigen::VectorXd weights = target_weights(ys, options.target);
  if (weights.maxCoeff() == 0.0) {
    throw Error(ErrorKind::degenerate_target, "no output exceeds the target threshold");
  }
  const Eigen::MatrixXd output_gram = gram_matrix(ys, options.kernel);

  ScreeningResult result;
  result.alpha = options.alpha;
  for (const auto& var : sample.variables()) {
    if (var.role == Role::fixed) continue;
    const Eigen::VectorXd x = sample.design().col(static_cast<Eigen::Index>(var.index));
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    Eigen::MatrixXd input_gram;
    try {
      input_gram = gram_matrix(xs, options.kernel);
    } catch (const Error& e) {
      throw Error(e.kind(), "input '" + var.name + "': " + e.what());
    }
    const HsicPair global_pair(input_gram, output_gram);
    const auto global_pair_result = [&] {
      try {
        return run_test(global_pair, var.index, options.permutations,
                        derive_seed(options.seed, 2 * static_cast<std::uint64_t>(var.index)));
      } catch (const Error& e) {
        throw Error(e.kind(), "input '" + var.name + "', global test: " + e.what());
      }
    }();
    result.global.push_back(global_pair_result);

    const HsicPair target_pair = HsicPair::with_weights(input_gram, weights);
    try {
      result.target.push_back(run_test(target_pair, var.index, options.permutations,
                                       derive_seed(options.seed, 2 * static_cast<std::uint64_t>(var.index) + 1)));
    } catch (const Error& e) {
      throw Error(e.kind(), "input '" + var.name + "', target test: " + e.what());
    }
  }

  const auto penalize = indices_with_role(sample.variables(), Role::penalize);
  result.selected = rank_inputs(result.global, result.target, options.alpha, penalize);
  const auto unforced = rank_inputs(result.global, result.target, options.alpha, {});
  for (std::size_t p : penalize) {
    if (std::find(unforced.begin(), unforced.end(), p) == unforced.end()) result.forced.push_back(p);
  }
  return result;
}

}  // namespace icscream
