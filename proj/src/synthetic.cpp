#include "icscream/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "icscream/error.hpp"
#include "icscream/random.hpp"

namespace icscream {

std::string_view to_string(SyntheticFunction f) {
  switch (f) {
    case SyntheticFunction::additive_linear: return "additive-linear";
    case SyntheticFunction::ishigami_extended: return "ishigami-extended";
    case SyntheticFunction::bell_interaction: return "bell-interaction";
  }
  return "unknown";
}

SyntheticFunction parse_synthetic_function(std::string_view name) {
  if (name == "additive-linear") return SyntheticFunction::additive_linear;
  if (name == "ishigami-extended") return SyntheticFunction::ishigami_extended;
  if (name == "bell-interaction") return SyntheticFunction::bell_interaction;
  throw Error(ErrorKind::config, "unknown synthetic function '" + std::string(name) + "'");
}

SyntheticSpec SyntheticSpec::additive_linear_default(std::size_t d_total, std::size_t n, std::uint64_t seed) {
  SyntheticSpec s;
  s.function = SyntheticFunction::additive_linear;
  s.d_total = d_total;
  s.active = {0, 1, 2, 3, 4};
  s.coefficients = {1.0, 0.9, 0.8, 0.7, 0.6};
  s.n = n;
  s.seed = seed;
  return s;
}

SyntheticSpec SyntheticSpec::ishigami_default(std::size_t d_total, std::size_t n, std::uint64_t seed) {
  SyntheticSpec s;
  s.function = SyntheticFunction::ishigami_extended;
  s.d_total = d_total;
  s.active = {0, 1, 2};
  s.coefficients = {1.0, 7.0, 0.1};
  s.n = n;
  s.seed = seed;
  return s;
}

SyntheticSpec SyntheticSpec::bell_default(std::size_t d_total, std::size_t n, std::uint64_t seed) {
  SyntheticSpec s;
  s.function = SyntheticFunction::bell_interaction;
  s.d_total = d_total;
  s.active = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  s.coefficients = std::vector<double>(8, 0.5);
  s.noise_coefficient = 0.02;
  s.bell.amplitude = 1.5;
  s.bell.gamma = 1.0;
  s.n = n;
  s.seed = seed;
  return s;
}

void SyntheticSpec::validate() const {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "synthetic sample size must be positive");
  if (d_total == 0) throw Error(ErrorKind::invalid_argument, "synthetic dimension must be positive");
  const std::set<std::size_t> unique(active.begin(), active.end());
  if (unique.size() != active.size()) throw Error(ErrorKind::invalid_argument, "duplicate active index");
  for (std::size_t a : active) {
    if (a >= d_total) {
      throw Error(ErrorKind::invalid_argument, "active index " + std::to_string(a) + " outside 0.." +
                                                   std::to_string(d_total - 1));
    }
  }
  switch (function) {
    case SyntheticFunction::additive_linear:
      if (active.size() < 2) throw Error(ErrorKind::invalid_argument, "additive-linear needs >= 2 active inputs");
      if (coefficients.size() != active.size()) {
        throw Error(ErrorKind::invalid_argument, "additive-linear needs one coefficient per active input");
      }
      break;
    case SyntheticFunction::ishigami_extended:
      if (active.size() != 3 || coefficients.size() != 3) {
        throw Error(ErrorKind::invalid_argument, "ishigami-extended needs 3 active inputs and 3 coefficients");
      }
      break;
    case SyntheticFunction::bell_interaction:
      if (active.size() < 2) throw Error(ErrorKind::invalid_argument, "bell-interaction needs >= 2 active inputs");
      if (coefficients.size() != active.size() - 2) {
        throw Error(ErrorKind::invalid_argument,
                    "bell-interaction needs one coefficient per active input beyond the first two");
      }
      if (!(bell.s1 > 0.0) || !(bell.s2 > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "bell widths must be positive");
      }
      break;
  }
}

SyntheticModel::SyntheticModel(SyntheticSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const bool ishigami = spec_.function == SyntheticFunction::ishigami_extended;
  for (std::size_t k = 0; k < spec_.d_total; ++k) {
    VariableSpec v;
    v.name = "x" + std::to_string(k + 1);
    v.index = k;
    v.role = (k == spec_.active[0] || k == spec_.active[1]) ? Role::penalize : Role::candidate;
    v.distribution = ishigami ? Distribution::uniform(-std::numbers::pi, std::numbers::pi)
                              : Distribution::uniform(0.0, 1.0);
    variables_.push_back(std::move(v));
  }
}

double SyntheticModel::evaluate(std::span<const double> x) const {
  if (x.size() != spec_.d_total) throw Error(ErrorKind::invalid_argument, "synthetic input has wrong dimension");
  const auto& a = spec_.active;
  const auto& c = spec_.coefficients;
  switch (spec_.function) {
    case SyntheticFunction::additive_linear: {
      double y = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) y += c[k] * x[a[k]];
      return y;
    }
    case SyntheticFunction::ishigami_extended: {
      const double s1 = std::sin(x[a[0]]);
      const double s2 = std::sin(x[a[1]]);
      const double x3 = x[a[2]];
      return c[0] * s1 + c[1] * s2 * s2 + c[2] * x3 * x3 * x3 * x3 * s1;
    }
    case SyntheticFunction::bell_interaction: {
      const auto& b = spec_.bell;
      const double u = x[a[0]];
      const double v = x[a[1]];
      double y = b.amplitude * std::exp(-(u - b.c1) * (u - b.c1) / (b.s1 * b.s1) -
                                        (v - b.c2) * (v - b.c2) / (b.s2 * b.s2) * (1.0 + b.gamma * u));
      for (std::size_t k = 2; k < a.size(); ++k) y += c[k - 2] * x[a[k]];
      if (spec_.noise_coefficient != 0.0) {
        for (std::size_t j = 0; j < x.size(); ++j) {
          if (std::find(a.begin(), a.end(), j) == a.end()) y += spec_.noise_coefficient * x[j];
        }
      }
      return y;
    }
  }
  return 0.0;
}

Eigen::VectorXd SyntheticModel::evaluate(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd y(x.rows());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) row[static_cast<std::size_t>(k)] = x(i, k);
    y[i] = evaluate(row);
  }
  return y;
}

LearningSample SyntheticModel::generate() const {
  Eigen::MatrixXd x = sample_inputs(variables_, spec_.n, spec_.seed);
  Eigen::VectorXd y = evaluate(x);
  return LearningSample(std::move(x), std::move(y), variables_, "y");
}

double SyntheticModel::conditional_exceedance(double x1, double x2, double threshold, std::size_t draws,
                                              std::uint64_t seed) const {
  Eigen::MatrixXd x = sample_inputs(variables_, draws, seed);
  x.col(static_cast<Eigen::Index>(spec_.active[0])).setConstant(x1);
  x.col(static_cast<Eigen::Index>(spec_.active[1])).setConstant(x2);
  const Eigen::VectorXd y = evaluate(x);
  return static_cast<double>((y.array() > threshold).count()) / static_cast<double>(draws);
}

nlohmann::json SyntheticModel::ground_truth() const {
  nlohmann::json j;
  j["function"] = std::string(to_string(spec_.function));
  j["d_total"] = spec_.d_total;
  j["n"] = spec_.n;
  j["seed"] = spec_.seed;
  j["active_indices"] = spec_.active;
  std::vector<std::string> names;
  for (std::size_t a : spec_.active) names.push_back(variables_[a].name);
  j["active_names"] = names;
  j["penalize"] = {variables_[spec_.active[0]].name, variables_[spec_.active[1]].name};
  j["coefficients"] = spec_.coefficients;
  if (spec_.function == SyntheticFunction::bell_interaction) {
    const auto& b = spec_.bell;
    j["bell"] = {{"amplitude", b.amplitude}, {"c1", b.c1}, {"c2", b.c2},
                 {"s1", b.s1}, {"s2", b.s2}, {"gamma", b.gamma}};
    j["noise_coefficient"] = spec_.noise_coefficient;
  }
  return j;
}

}  // namespace icscream
