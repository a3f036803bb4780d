#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "icscream/dataset.hpp"
#include "icscream/gp.hpp"

namespace icscream {

/// Grid over the two penalizing inputs, in raw units.
struct PenGrid {
  std::vector<double> axis1;
  std::vector<double> axis2;

  /// Evenly spaced over each support; unbounded sides use the 0.001 / 0.999
  /// quantiles.
  static PenGrid over_support(const Distribution& first, const Distribution& second, std::size_t n1,
                              std::size_t n2);

  /// Strictly increasing, nonempty axes inside the supports.
  void validate(const Distribution& first, const Distribution& second) const;
};

struct ExceedanceEstimate {
  double probability = 0.0;  // full-process estimate
  double std_error = 0.0;    // Monte Carlo standard error
  double plugin = 0.0;       // mean-only estimate, P(mean > q)
};

/// Monte Carlo estimator of P(Y > q | X_pen = x_pen) under the conditioned
/// process:
///   1 - (1/M) sum_m Phi((q - mean(x~_m, x_pen)) / sqrt(mse(x~_m, x_pen)))
/// with x~_m drawn from the marginals of the model inputs other than the
/// penalizing pair. The draw is made once at construction and reused for
/// every cell (common random numbers).
class ExceedanceEstimator {
 public:
  ExceedanceEstimator(const GpModel& model, std::array<std::size_t, 2> penalize,
                      std::span<const VariableSpec> variables, std::size_t samples, std::uint64_t seed);

  std::size_t samples() const noexcept { return static_cast<std::size_t>(base_.rows()); }

  /// Predictions at the M conditioning points for one penalizing pair.
  BatchPrediction predictions(double x1, double x2) const;

  ExceedanceEstimate estimate(double x1, double x2, double threshold) const;

  /// Reduces precomputed predictions for one threshold. Terms with zero mse
  /// become the indicator of mean > threshold.
  static ExceedanceEstimate reduce(const BatchPrediction& prediction, double threshold);

 private:
  const GpModel* model_;
  std::array<Eigen::Index, 2> columns_;  // positions of the pair among model inputs
  std::array<Distribution, 2> supports_;
  Eigen::MatrixXd base_;                 // M x p raw inputs, penalizing columns filled per cell
};

ExceedanceEstimate conditional_exceedance(const GpModel& model, std::array<double, 2> x_pen,
                                          std::array<std::size_t, 2> penalize,
                                          std::span<const VariableSpec> variables, double threshold,
                                          std::size_t samples, std::uint64_t seed);

struct ExceedanceMap {
  PenGrid grid;
  Eigen::MatrixXd probability;  // |axis1| x |axis2|
  Eigen::MatrixXd std_error;
  Eigen::MatrixXd plugin;
  std::size_t mc_samples = 0;
  Threshold threshold;
  std::uint64_t seed = 0;
  std::size_t out_of_range = 0;  // cells whose estimate left [0, 1]; expected 0
};

ExceedanceMap exceedance_map(const GpModel& model, const PenGrid& grid,
                             std::array<std::size_t, 2> penalize, std::span<const VariableSpec> variables,
                             const Threshold& threshold, std::size_t samples, std::uint64_t seed);

/// One prediction pass, one map per threshold (all share the same draws).
std::vector<ExceedanceMap> exceedance_maps(const GpModel& model, const PenGrid& grid,
                                           std::array<std::size_t, 2> penalize,
                                           std::span<const VariableSpec> variables,
                                           std::span<const Threshold> thresholds, std::size_t samples,
                                           std::uint64_t seed);

struct WorstCase {
  std::size_t row = 0;
  std::size_t col = 0;
  std::array<double, 2> location{};
  double probability = 0.0;
};

/// Arg-max cell; ties resolve to the lexicographically smallest (row, col).
WorstCase worst_case(const ExceedanceMap& map);

}  // namespace icscream
