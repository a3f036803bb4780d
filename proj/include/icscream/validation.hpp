#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "icscream/dataset.hpp"
#include "icscream/gp.hpp"

namespace icscream {

struct CvPrediction {
  std::size_t index = 0;
  double observed = 0.0;
  double predicted_mean = 0.0;
  double predicted_mse = 0.0;
  std::size_t fold = 0;
};

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  int max_evaluations = 50;  // per-fold re-optimization budget
  bool estimate_nugget = true;
};

/// Fold id of each observation: a seeded shuffle dealt round-robin, so fold
/// sizes differ by at most one.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed);

/// K-fold cross-validation. Each fold re-fits the process on its complement
/// with a single start warm-started at `warm`, then predicts the held-out
/// points. Returned in observation order.
std::vector<CvPrediction> kfold_predict(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y,
                                        const GpHyperparams& warm, const CvOptions& options);

/// Convenience overload using the model's input columns and hyperparameters.
std::vector<CvPrediction> kfold_predict(const LearningSample& sample, const GpModel& model,
                                        const CvOptions& options);

/// Predictivity coefficient 1 - sum (y - yhat)^2 / sum (y - mean y)^2.
double q2(std::span<const double> observed, std::span<const double> predicted);
double q2(std::span<const CvPrediction> cv);

/// Fraction of points where observed and predicted fall on the same side
/// of the threshold (strict exceedance).
double exceedance_classification_rate(std::span<const double> observed,
                                      std::span<const double> predicted, double threshold);

struct CalibrationCurve {
  std::vector<double> levels;
  std::vector<double> observed;
};

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_calibration_levels();

/// Share of observations inside mean +/- z_{(1+level)/2} sqrt(mse), bounds inclusive.
CalibrationCurve calibration_curve(std::span<const CvPrediction> cv, std::span<const double> levels);

struct BootstrapPoint {
  std::size_t sample_size = 0;
  int resamples = 0;
  double q2_mean = 0.0;
  double q2_std = 0.0;
};

/// Q2 over repeated random subsamples (drawn without replacement) of each
/// requested size, each scored by K-fold cross-validation warm-started from
/// the model's hyperparameters.
std::vector<BootstrapPoint> bootstrap_convergence(const LearningSample& sample, const GpModel& model,
                                                  std::span<const std::size_t> sizes, int resamples,
                                                  const CvOptions& options);

}  // namespace icscream
