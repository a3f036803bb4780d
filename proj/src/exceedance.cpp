#include "icscream/exceedance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "icscream/error.hpp"

namespace icscream {

namespace {

std::vector<double> axis_over(const Distribution& d, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "grid axis needs at least one point");
  const double lo = std::isfinite(d.lower()) ? d.lower() : d.quantile(0.001);
  const double hi = std::isfinite(d.upper()) ? d.upper() : d.quantile(0.999);
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) {
    axis[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  axis.back() = hi;
  return axis;
}

void check_axis(const std::vector<double>& axis, const Distribution& d, const char* name) {
  if (axis.empty()) throw Error(ErrorKind::invalid_argument, std::string(name) + " is empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!d.in_support(axis[i])) {
      throw Error(ErrorKind::out_of_support, std::string(name) + " value outside the input support");
    }
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw Error(ErrorKind::invalid_argument, std::string(name) + " is not strictly increasing");
    }
  }
}

}  // namespace

PenGrid PenGrid::over_support(const Distribution& first, const Distribution& second, std::size_t n1,
                              std::size_t n2) {
  return {axis_over(first, n1), axis_over(second, n2)};
}

void PenGrid::validate(const Distribution& first, const Distribution& second) const {
  check_axis(axis1, first, "axis1");
  check_axis(axis2, second, "axis2");
}

ExceedanceEstimator::ExceedanceEstimator(const GpModel& model, std::array<std::size_t, 2> penalize,
                                         std::span<const VariableSpec> variables, std::size_t samples,
                                         std::uint64_t seed)
    : model_(&model),
      columns_{0, 0},
      supports_{Distribution::uniform(0.0, 1.0), Distribution::uniform(0.0, 1.0)} {
  if (samples < 1) throw Error(ErrorKind::invalid_argument, "Monte Carlo sample count must be positive");
  if (penalize[0] == penalize[1]) throw Error(ErrorKind::invalid_argument, "penalizing inputs must differ");
  const auto& inputs = model.input_indices();
  std::vector<VariableSpec> tilde;
  std::vector<Eigen::Index> tilde_columns;
  std::array<bool, 2> found{false, false};
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const auto it = std::find_if(variables.begin(), variables.end(),
                                 [&](const VariableSpec& v) { return v.index == inputs[j]; });
    if (it == variables.end()) {
      throw Error(ErrorKind::invalid_argument, "no variable spec for model input " + std::to_string(inputs[j]));
    }
    bool is_pen = false;
    for (int a = 0; a < 2; ++a) {
      if (inputs[j] == penalize[static_cast<std::size_t>(a)]) {
        columns_[static_cast<std::size_t>(a)] = static_cast<Eigen::Index>(j);
        supports_[static_cast<std::size_t>(a)] = it->distribution;
        found[static_cast<std::size_t>(a)] = true;
        is_pen = true;
      }
    }
    if (!is_pen) {
      tilde.push_back(*it);
      tilde_columns.push_back(static_cast<Eigen::Index>(j));
    }
  }
  if (!found[0] || !found[1]) {
    throw Error(ErrorKind::invalid_argument, "both penalizing inputs must be explanatory inputs of the model");
  }
  base_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(inputs.size()));
  if (!tilde.empty()) {
    const Eigen::MatrixXd draws = sample_inputs(tilde, samples, seed);
    for (std::size_t t = 0; t < tilde_columns.size(); ++t) {
      base_.col(tilde_columns[t]) = draws.col(static_cast<Eigen::Index>(t));
    }
  }
}

BatchPrediction ExceedanceEstimator::predictions(double x1, double x2) const {
  if (!supports_[0].in_support(x1) || !supports_[1].in_support(x2)) {
    throw Error(ErrorKind::out_of_support, "penalizing values outside their supports");
  }
  Eigen::MatrixXd x = base_;
  x.col(columns_[0]).setConstant(x1);
  x.col(columns_[1]).setConstant(x2);
  BatchPrediction p = model_->predict_batch(x);
  if (!p.mean.allFinite() || !p.mse.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "non-finite process prediction");
  }
  return p;
}

ExceedanceEstimate ExceedanceEstimator::reduce(const BatchPrediction& prediction, double threshold) {
  const auto m = prediction.mean.size();
  Eigen::VectorXd terms(m);
  double plugin = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mu = prediction.mean[i];
    const double var = prediction.mse[i];
    // Upper tail 1 - Phi((q - mu)/sd); the sd = 0 limit is the indicator of mu > q.
    terms[i] = var > 0.0 ? 0.5 * std::erfc((threshold - mu) / std::sqrt(2.0 * var)) : (mu > threshold ? 1.0 : 0.0);
    if (mu > threshold) plugin += 1.0;
  }
  ExceedanceEstimate e;
  const double dm = static_cast<double>(m);
  e.probability = terms.sum() / dm;
  e.plugin = plugin / dm;
  e.std_error = std::sqrt((terms.array() - e.probability).square().sum() / dm) / std::sqrt(dm);
  return e;
}

ExceedanceEstimate ExceedanceEstimator::estimate(double x1, double x2, double threshold) const {
  return reduce(predictions(x1, x2), threshold);
}

ExceedanceEstimate conditional_exceedance(const GpModel& model, std::array<double, 2> x_pen,
                                          std::array<std::size_t, 2> penalize,
                                          std::span<const VariableSpec> variables, double threshold,
                                          std::size_t samples, std::uint64_t seed) {
  return ExceedanceEstimator(model, penalize, variables, samples, seed).estimate(x_pen[0], x_pen[1], threshold);
}

std::vector<ExceedanceMap> exceedance_maps(const GpModel& model, const PenGrid& grid,
                                           std::array<std::size_t, 2> penalize,
                                           std::span<const VariableSpec> variables,
                                           std::span<const Threshold> thresholds, std::size_t samples,
                                           std::uint64_t seed) {
  const ExceedanceEstimator estimator(model, penalize, variables, samples, seed);
  const auto spec_of = [&](std::size_t index) {
    for (const auto& v : variables) {
      if (v.index == index) return v.distribution;
    }
    throw Error(ErrorKind::invalid_argument, "no variable spec for penalizing input");
  };
  grid.validate(spec_of(penalize[0]), spec_of(penalize[1]));

  const auto n1 = static_cast<Eigen::Index>(grid.axis1.size());
  const auto n2 = static_cast<Eigen::Index>(grid.axis2.size());
  std::vector<ExceedanceMap> maps;
  for (const auto& t : thresholds) {
    ExceedanceMap m;
    m.grid = grid;
    m.probability.resize(n1, n2);
    m.std_error.resize(n1, n2);
    m.plugin.resize(n1, n2);
    m.mc_samples = samples;
    m.threshold = t;
    m.seed = seed;
    maps.push_back(std::move(m));
  }
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) {
      const BatchPrediction pred =
          estimator.predictions(grid.axis1[static_cast<std::size_t>(i)], grid.axis2[static_cast<std::size_t>(j)]);
      for (auto& m : maps) {
        const ExceedanceEstimate e = ExceedanceEstimator::reduce(pred, m.threshold.value);
        if (!(e.probability >= 0.0 && e.probability <= 1.0)) ++m.out_of_range;
        m.probability(i, j) = e.probability;
        m.std_error(i, j) = e.std_error;
        m.plugin(i, j) = e.plugin;
      }
    }
  }
  return maps;
}

ExceedanceMap exceedance_map(const GpModel& model, const PenGrid& grid,
                             std::array<std::size_t, 2> penalize, std::span<const VariableSpec> variables,
                             const Threshold& threshold, std::size_t samples, std::uint64_t seed) {
  const std::array<Threshold, 1> one{threshold};
  return std::move(exceedance_maps(model, grid, penalize, variables, one, samples, seed).front());
}

WorstCase worst_case(const ExceedanceMap& map) {
  if (map.probability.size() == 0) throw Error(ErrorKind::invalid_argument, "empty exceedance map");
  WorstCase w;
  w.probability = map.probability(0, 0);
  for (Eigen::Index i = 0; i < map.probability.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.probability.cols(); ++j) {
      if (map.probability(i, j) > w.probability) {
        w.probability = map.probability(i, j);
        w.row = static_cast<std::size_t>(i);
        w.col = static_cast<std::size_t>(j);
      }
    }
  }
  w.location = {map.grid.axis1[w.row], map.grid.axis2[w.col]};
  return w;
}

}  // namespace icscream
