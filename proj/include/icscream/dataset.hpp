#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "icscream/distribution.hpp"

namespace icscream {

/// How a variable takes part in a study. Penalizing inputs are the scenario
/// inputs whose critical values are mapped; fixed inputs are carried in the
/// data but excluded from screening.
enum class Role { penalize, candidate, fixed };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct VariableSpec {
  std::string name;
  std::size_t index = 0;
  Role role = Role::candidate;
  Distribution distribution = Distribution::uniform(0.0, 1.0);
};

/// Checks unique names and contiguous indices 0..d-1 in order.
void validate_schema(std::span<const VariableSpec> schema);

/// Indices of the variables carrying `role`, ascending.
std::vector<std::size_t> indices_with_role(std::span<const VariableSpec> schema, Role role);

/// n simulator runs: design (n x d, raw input units) and scalar output.
/// Immutable once constructed; the constructor enforces n >= 2, d >= 1,
/// finite entries and declared supports.
class LearningSample {
 public:
  LearningSample(Eigen::MatrixXd design, Eigen::VectorXd output, std::vector<VariableSpec> variables,
                 std::string output_name = "y");

  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const Eigen::VectorXd& output() const noexcept { return output_; }
  const std::vector<VariableSpec>& variables() const noexcept { return variables_; }
  const std::string& output_name() const noexcept { return output_name_; }

  std::size_t size() const noexcept { return static_cast<std::size_t>(design_.rows()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(design_.cols()); }

  /// Design restricted to the given columns, in that order.
  Eigen::MatrixXd columns(std::span<const std::size_t> indices) const;

  /// Rows selected by index (duplicates allowed).
  LearningSample subset(std::span<const std::size_t> rows) const;

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd output_;
  std::vector<VariableSpec> variables_;
  std::string output_name_;
};

/// Reads a comma-separated file whose header holds every schema name plus
/// `output_column`, in any order. Row order is preserved.
LearningSample load_sample(const std::filesystem::path& path, std::vector<VariableSpec> schema,
                           const std::string& output_column = "y");

/// Writes inputs in schema order then the output column, 17 significant digits.
void write_sample(const std::filesystem::path& path, const LearningSample& sample);

/// Upper empirical quantile: the ceil(level * n)-th order statistic (1-based).
double empirical_quantile(std::span<const double> values, double level);

struct Threshold {
  double level = 0.9;
  double value = 0.0;
};

Threshold critical_threshold(const LearningSample& sample, double level);

/// count x |specs| matrix of independent draws, one column per marginal.
Eigen::MatrixXd sample_inputs(std::span<const VariableSpec> specs, std::size_t count,
                              std::uint64_t seed);

}  // namespace icscream
