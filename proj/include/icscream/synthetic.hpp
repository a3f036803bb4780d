#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "icscream/dataset.hpp"

namespace icscream {

enum class SyntheticFunction { additive_linear, ishigami_extended, bell_interaction };

std::string_view to_string(SyntheticFunction f);
SyntheticFunction parse_synthetic_function(std::string_view name);

/// Two-input bell with interaction on the penalizing inputs x_p1, x_p2:
///   A exp(-(x_p1 - c1)^2 / s1^2 - (x_p2 - c2)^2 / s2^2 * (1 + gamma x_p1))
struct BellParameters {
  double amplitude = 3.0;
  double c1 = 0.5;
  double c2 = 0.5;
  double s1 = 0.3;
  double s2 = 0.3;
  double gamma = 0.0;
};

/// Analytic test problem with known ground truth. Indices are 0-based
/// column positions.
///
///   additive-linear     y = sum_k a_k x_k over `active`, x ~ U(0, 1)
///   ishigami-extended   y = sin x1 + 7 sin^2 x2 + 0.1 x3^4 sin x1 on the
///                       first three active inputs, x ~ U(-pi, pi)
///   bell-interaction    y = bell(x_p1, x_p2) + sum_k b_k x_k over the other
///                       active inputs + sum eps x_e over the noise inputs,
///                       x ~ U(0, 1); p1, p2 are the first two active inputs
///
/// The first two active inputs carry the penalize role; every other column
/// is a candidate.
struct SyntheticSpec {
  SyntheticFunction function = SyntheticFunction::additive_linear;
  std::size_t d_total = 50;
  std::vector<std::size_t> active;
  std::vector<double> coefficients;  // per active input, function-specific use
  double noise_coefficient = 0.0;    // bell-interaction: weight of non-active inputs
  BellParameters bell;
  std::size_t n = 300;
  std::uint64_t seed = 0;

  /// Built-in configurations used by the CLI and the acceptance suite.
  static SyntheticSpec additive_linear_default(std::size_t d_total = 50, std::size_t n = 300,
                                               std::uint64_t seed = 0);
  static SyntheticSpec ishigami_default(std::size_t d_total = 10, std::size_t n = 300, std::uint64_t seed = 0);
  static SyntheticSpec bell_default(std::size_t d_total = 20, std::size_t n = 300, std::uint64_t seed = 0);

  void validate() const;
};

class SyntheticModel {
 public:
  explicit SyntheticModel(SyntheticSpec spec);

  const SyntheticSpec& spec() const noexcept { return spec_; }
  const std::vector<VariableSpec>& variables() const noexcept { return variables_; }
  std::array<std::size_t, 2> penalize() const { return {spec_.active[0], spec_.active[1]}; }

  double evaluate(std::span<const double> x) const;
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& x) const;

  /// n draws from the input marginals with their outputs.
  LearningSample generate() const;

  /// Monte Carlo estimate of P(g(X) > threshold | x_p1, x_p2) on the true
  /// function, all other inputs drawn from their marginals.
  double conditional_exceedance(double x1, double x2, double threshold, std::size_t draws,
                                std::uint64_t seed) const;

  nlohmann::json ground_truth() const;

 private:
  SyntheticSpec spec_;
  std::vector<VariableSpec> variables_;
};

}  // namespace icscream
