#pragma once

#include <string_view>

#include "icscream/random.hpp"

namespace icscream {

enum class Family { uniform, log_uniform, normal, log_normal, truncated_normal };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Marginal law of one uncertain input. Instances are built through the
/// named factories, which validate the parameters and throw
/// Error(invalid_argument) on violation.
///
/// Parameter meaning by family:
///   uniform, log_uniform  first = a, second = b (bounds of the variable)
///   normal                first = mean, second = standard deviation
///   log_normal            first, second = mean and sd of log(X)
///   truncated_normal      mean, sd of the parent normal; lower/upper cut
class Distribution {
 public:
  static Distribution uniform(double a, double b);
  static Distribution log_uniform(double a, double b);
  static Distribution normal(double mean, double sd);
  static Distribution log_normal(double log_mean, double log_sd);
  static Distribution truncated_normal(double mean, double sd, double lower, double upper);

  Family family() const noexcept { return family_; }
  double first() const noexcept { return first_; }
  double second() const noexcept { return second_; }

  /// Support bounds; infinite for unbounded sides.
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  bool bounded() const noexcept;
  bool in_support(double x) const noexcept;

  double cdf(double x) const;
  /// Inverse CDF for u in (0, 1).
  double quantile(double u) const;
  /// Inverse-CDF draw.
  double sample(Rng& rng) const;

 private:
  Distribution(Family family, double first, double second, double lower, double upper)
      : family_(family), first_(first), second_(second), lower_(lower), upper_(upper) {}

  Family family_;
  double first_;
  double second_;
  double lower_;
  double upper_;
};

}  // namespace icscream
