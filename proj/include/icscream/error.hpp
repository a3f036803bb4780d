#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icscream {

/// Failure categories surfaced by the library. The CLI reports them as
/// machine-readable error codes.
enum class ErrorKind {
  invalid_argument,
  parse,
  header_mismatch,
  out_of_support,
  missing_value,
  zero_bandwidth,
  degenerate_target,
  degenerate_null,
  indefinite_covariance,
  fit_failure,
  undefined_statistic,
  io,
  config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace icscream
