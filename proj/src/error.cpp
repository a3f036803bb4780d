#include "icscream/error.hpp"

namespace icscream {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::parse: return "parse_error";
    case ErrorKind::header_mismatch: return "header_mismatch";
    case ErrorKind::out_of_support: return "out_of_support";
    case ErrorKind::missing_value: return "missing_value";
    case ErrorKind::zero_bandwidth: return "zero_bandwidth";
    case ErrorKind::degenerate_target: return "degenerate_target";
    case ErrorKind::degenerate_null: return "degenerate_null";
    case ErrorKind::indefinite_covariance: return "indefinite_covariance";
    case ErrorKind::fit_failure: return "fit_failure";
    case ErrorKind::undefined_statistic: return "undefined_statistic";
    case ErrorKind::io: return "io_error";
    case ErrorKind::config: return "config_error";
  }
  return "unknown";
}

}  // namespace icscream
