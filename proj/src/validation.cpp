#include "icscream/validation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "icscream/error.hpp"
#include "icscream/random.hpp"

namespace icscream {

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) {
    throw Error(ErrorKind::invalid_argument, "fold count must lie in [2, n] (K = " +
                                                 std::to_string(folds) + ", n = " + std::to_string(n) + ")");
  }
  Rng rng(seed);
  const auto order = random_permutation(rng, n);
  std::vector<std::size_t> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

std::vector<CvPrediction> kfold_predict(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y,
                                        const GpHyperparams& warm, const CvOptions& options) {
  const auto n = static_cast<std::size_t>(x_raw.rows());
  if (static_cast<std::size_t>(y.size()) != n) {
    throw Error(ErrorKind::invalid_argument, "inputs and outputs differ in length");
  }
  const auto fold = fold_assignment(n, options.folds, options.seed);
  std::vector<CvPrediction> out(n);

  for (std::size_t k = 0; k < options.folds; ++k) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == k ? test : train).push_back(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd x_train = x_raw(train, Eigen::all);
    const Eigen::VectorXd y_train = y(train);

    FitOptions fo;
    fo.nu = warm.nu;
    fo.starts = 1;
    fo.max_evaluations = options.max_evaluations;
    fo.estimate_nugget = options.estimate_nugget;
    fo.init = warm;
    fo.seed = derive_seed(options.seed, static_cast<std::uint64_t>(k));
    BatchPrediction pred;
    try {
      const GpModel m = fit(x_train, y_train, fo);
      pred = m.predict_batch(x_raw(test, Eigen::all));
    } catch (const Error& e) {
      throw Error(e.kind(), "cross-validation fold " + std::to_string(k) + ": " + e.what());
    }
    for (std::size_t t = 0; t < test.size(); ++t) {
      const auto i = static_cast<std::size_t>(test[t]);
      out[i] = {i, y[test[t]], pred.mean[static_cast<Eigen::Index>(t)], pred.mse[static_cast<Eigen::Index>(t)], k};
    }
  }
  return out;
}

std::vector<CvPrediction> kfold_predict(const LearningSample& sample, const GpModel& model,
                                        const CvOptions& options) {
  return kfold_predict(sample.columns(model.input_indices()), sample.output(), model.hyperparams(), options);
}

double q2(std::span<const double> observed, std::span<const double> predicted) {
  if (observed.size() != predicted.size()) {
    throw Error(ErrorKind::invalid_argument, "observed and predicted differ in length");
  }
  if (observed.size() < 2) throw Error(ErrorKind::invalid_argument, "Q2 needs n >= 2");
  double mean = 0.0;
  for (double v : observed) mean += v;
  mean /= static_cast<double>(observed.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    sse += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    sst += (observed[i] - mean) * (observed[i] - mean);
  }
  if (sst == 0.0) throw Error(ErrorKind::undefined_statistic, "Q2 undefined for a constant observed vector");
  return 1.0 - sse / sst;
}

double q2(std::span<const CvPrediction> cv) {
  std::vector<double> obs;
  std::vector<double> pred;
  for (const auto& c : cv) {
    obs.push_back(c.observed);
    pred.push_back(c.predicted_mean);
  }
  return q2(obs, pred);
}

double exceedance_classification_rate(std::span<const double> observed,
                                      std::span<const double> predicted, double threshold) {
  if (observed.size() != predicted.size() || observed.empty()) {
    throw Error(ErrorKind::invalid_argument, "classification rate needs equal, nonempty vectors");
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if ((observed[i] > threshold) == (predicted[i] > threshold)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(observed.size());
}

std::vector<double> default_calibration_levels() {
  std::vector<double> levels;
  for (int k = 1; k <= 19; ++k) levels.push_back(0.05 * k);
  return levels;
}

CalibrationCurve calibration_curve(std::span<const CvPrediction> cv, std::span<const double> levels) {
  if (cv.empty()) throw Error(ErrorKind::invalid_argument, "calibration curve needs predictions");
  const boost::math::normal_distribution<double> normal;
  CalibrationCurve curve;
  for (double level : levels) {
    if (!(level >= 0.0 && level < 1.0)) {
      throw Error(ErrorKind::invalid_argument, "calibration level must lie in [0, 1)");
    }
    const double z = level == 0.0 ? 0.0 : boost::math::quantile(normal, 0.5 * (1.0 + level));
    std::size_t inside = 0;
    for (const auto& c : cv) {
      if (!(c.predicted_mse >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "negative prediction variance in calibration input");
      }
      if (std::abs(c.observed - c.predicted_mean) <= z * std::sqrt(c.predicted_mse)) ++inside;
    }
    curve.levels.push_back(level);
    curve.observed.push_back(static_cast<double>(inside) / static_cast<double>(cv.size()));
  }
  return curve;
}

std::vector<BootstrapPoint> bootstrap_convergence(const LearningSample& sample, const GpModel& model,
                                                  std::span<const std::size_t> sizes, int resamples,
                                                  const CvOptions& options) {
  if (resamples < 1) throw Error(ErrorKind::invalid_argument, "need at least one resample");
  std::vector<BootstrapPoint> out;
  Rng rng(derive_seed(options.seed, std::string_view("bootstrap")));
  for (std::size_t size : sizes) {
    if (size < options.folds || size > sample.size()) {
      throw Error(ErrorKind::invalid_argument, "bootstrap size " + std::to_string(size) + " out of range");
    }
    std::vector<double> values;
    for (int r = 0; r < resamples; ++r) {
      auto perm = random_permutation(rng, sample.size());
      perm.resize(size);
      const LearningSample sub = sample.subset(perm);
      CvOptions o = options;
      o.seed = derive_seed(options.seed, static_cast<std::uint64_t>(size * 1000 + static_cast<std::size_t>(r)));
      values.push_back(q2(kfold_predict(sub, model, o)));
    }
    BootstrapPoint pt;
    pt.sample_size = size;
    pt.resamples = resamples;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    pt.q2_mean = mean;
    pt.q2_std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    out.push_back(pt);
  }
  return out;
}

}  // namespace icscream
