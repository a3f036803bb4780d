#include "icscream/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "icscream/error.hpp"

namespace icscream {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double std_normal_quantile(double u) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_argument, "invalid distribution parameters: " + what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::uniform: return "uniform";
    case Family::log_uniform: return "log-uniform";
    case Family::normal: return "normal";
    case Family::log_normal: return "log-normal";
    case Family::truncated_normal: return "truncated-normal";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "uniform") return Family::uniform;
  if (name == "log-uniform") return Family::log_uniform;
  if (name == "normal") return Family::normal;
  if (name == "log-normal") return Family::log_normal;
  if (name == "truncated-normal") return Family::truncated_normal;
  throw Error(ErrorKind::config, "unknown distribution family '" + std::string(name) + "'");
}

Distribution Distribution::uniform(double a, double b) {
  require(finite(a) && finite(b) && a < b, "uniform requires a < b");
  return {Family::uniform, a, b, a, b};
}

Distribution Distribution::log_uniform(double a, double b) {
  require(finite(a) && finite(b) && a < b, "log-uniform requires a < b");
  require(a > 0.0, "log-uniform requires a > 0");
  return {Family::log_uniform, a, b, a, b};
}

Distribution Distribution::normal(double mean, double sd) {
  require(finite(mean) && finite(sd) && sd > 0.0, "normal requires sd > 0");
  return {Family::normal, mean, sd, -kInf, kInf};
}

Distribution Distribution::log_normal(double log_mean, double log_sd) {
  require(finite(log_mean) && finite(log_sd) && log_sd > 0.0, "log-normal requires sd > 0");
  return {Family::log_normal, log_mean, log_sd, 0.0, kInf};
}

Distribution Distribution::truncated_normal(double mean, double sd, double lower, double upper) {
  require(finite(mean) && finite(sd) && sd > 0.0, "truncated-normal requires sd > 0");
  require(!std::isnan(lower) && !std::isnan(upper) && lower < upper,
          "truncated-normal requires lower < upper");
  // The truncation window must carry probability mass in double precision.
  const double mass = std_normal_cdf((upper - mean) / sd) - std_normal_cdf((lower - mean) / sd);
  require(mass > 0.0, "truncated-normal window has no mass");
  return {Family::truncated_normal, mean, sd, lower, upper};
}

bool Distribution::bounded() const noexcept {
  return std::isfinite(lower_) && std::isfinite(upper_);
}

bool Distribution::in_support(double x) const noexcept {
  if (!std::isfinite(x)) return false;
  if (family_ == Family::log_normal) return x > 0.0;
  return x >= lower_ && x <= upper_;
}

double Distribution::cdf(double x) const {
  switch (family_) {
    case Family::uniform:
      if (x <= first_) return 0.0;
      if (x >= second_) return 1.0;
      return (x - first_) / (second_ - first_);
    case Family::log_uniform:
      if (x <= first_) return 0.0;
      if (x >= second_) return 1.0;
      return std::log(x / first_) / std::log(second_ / first_);
    case Family::normal:
      return std_normal_cdf((x - first_) / second_);
    case Family::log_normal:
      if (x <= 0.0) return 0.0;
      return std_normal_cdf((std::log(x) - first_) / second_);
    case Family::truncated_normal: {
      if (x <= lower_) return 0.0;
      if (x >= upper_) return 1.0;
      const double lo = std_normal_cdf((lower_ - first_) / second_);
      const double hi = std_normal_cdf((upper_ - first_) / second_);
      return (std_normal_cdf((x - first_) / second_) - lo) / (hi - lo);
    }
  }
  return 0.0;
}

double Distribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "quantile level must lie in (0, 1)");
  }
  switch (family_) {
    case Family::uniform:
      return first_ + u * (second_ - first_);
    case Family::log_uniform:
      return std::clamp(first_ * std::exp(u * std::log(second_ / first_)), first_, second_);
    case Family::normal:
      return first_ + second_ * std_normal_quantile(u);
    case Family::log_normal:
      return std::exp(first_ + second_ * std_normal_quantile(u));
    case Family::truncated_normal: {
      const double lo = std_normal_cdf((lower_ - first_) / second_);
      const double hi = std_normal_cdf((upper_ - first_) / second_);
      double p = lo + u * (hi - lo);
      // Guard the open-interval contract of the normal quantile at the edges.
      p = std::clamp(p, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
      const double x = first_ + second_ * std_normal_quantile(p);
      return std::clamp(x, lower_, upper_);
    }
  }
  return 0.0;
}

double Distribution::sample(Rng& rng) const { return quantile(uniform_open01(rng)); }

}  // namespace icscream
