#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace icscream {

enum class MaternNu { three_halves, five_halves };

std::string_view to_string(MaternNu nu);
MaternNu parse_matern_nu(std::string_view name);

/// One-dimensional Matern correlation at distance h >= 0:
///   nu = 3/2: (1 + sqrt3 h/l) exp(-sqrt3 h/l)
///   nu = 5/2: (1 + sqrt5 h/l + 5 h^2/(3 l^2)) exp(-sqrt5 h/l)
double matern_correlation(double h, double length, MaternNu nu);

/// Covariance parameters. Lengths are expressed in standardized input units.
/// `nugget` is the estimated white-noise variance; the fixed numerical floor
/// is held separately by the model.
struct GpHyperparams {
  Eigen::VectorXd lengths;
  double process_variance = 1.0;
  double nugget = 0.0;
  double trend = 0.0;
  MaternNu nu = MaternNu::five_halves;
};

/// Column-wise affine map to zero mean and unit variance.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  /// Constant columns get scale 1.
  static Standardization fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

/// sigma^2 * prod_k matern(|a_k - b_k|, l_k) for standardized rows a, b.
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const GpHyperparams& hp);

struct LikelihoodValue {
  double value = 0.0;
  double trend = 0.0;           // generalized least-squares estimate
  Eigen::VectorXd gradient;     // d/d(log l_1..log l_p, log sigma^2[, log nugget])
};

/// Log marginal likelihood
///   -1/2 r' (K + tau I)^{-1} r - 1/2 log det(K + tau I) - n/2 log(2 pi),
/// r = y - m, with the constant trend m profiled out by generalized least
/// squares and tau = hp.nugget + nugget_floor. `x` must be standardized.
/// Throws indefinite_covariance when the Cholesky factorization fails.
double log_marginal_likelihood(const GpHyperparams& hp, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, double nugget_floor = 0.0);

/// Same value plus the analytic gradient. With `include_nugget` false the
/// gradient omits the log-nugget component.
LikelihoodValue log_marginal_likelihood_with_gradient(const GpHyperparams& hp,
                                                      const Eigen::MatrixXd& x,
                                                      const Eigen::VectorXd& y,
                                                      double nugget_floor, bool include_nugget);

struct Prediction {
  double mean = 0.0;
  double mse = 0.0;
};

struct BatchPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd mse;
};

struct JointPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// A Gaussian process conditioned on its learning data. Immutable; safe to
/// share across threads for prediction. Prediction inputs are given in raw
/// units, in the order of `input_indices()`.
class GpModel {
 public:
  /// Conditions a process with the given hyperparameters on (x_raw, y). The
  /// trend is re-estimated by generalized least squares.
  static GpModel condition(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y, GpHyperparams hp,
                           Standardization standardization, std::vector<std::size_t> input_indices,
                           double nugget_floor);

  const GpHyperparams& hyperparams() const noexcept { return hp_; }
  const Standardization& standardization() const noexcept { return standardization_; }
  const std::vector<std::size_t>& input_indices() const noexcept { return input_indices_; }
  double nugget_floor() const noexcept { return nugget_floor_; }
  const Eigen::MatrixXd& training_inputs() const noexcept { return x_std_; }
  const Eigen::VectorXd& training_outputs() const noexcept { return y_; }
  const Eigen::VectorXd& weights() const noexcept { return alpha_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(hp_.lengths.size()); }
  bool degenerate() const noexcept { return degenerate_; }

  /// Lower-triangular L with L L' = K + (nugget + floor) I.
  Eigen::MatrixXd cholesky_factor() const;
  Eigen::MatrixXd regularized_covariance() const;

  /// mean = trend + k(x)' alpha;
  /// mse  = sigma^2 + nugget - k(x)' (K + tau I)^{-1} k(x), clamped at 0.
  Prediction predict(std::span<const double> x_raw) const;
  BatchPrediction predict_batch(const Eigen::MatrixXd& x_raw) const;
  JointPrediction predict_joint(const Eigen::MatrixXd& x_raw) const;

 private:
  GpModel() = default;

  GpHyperparams hp_;
  Standardization standardization_;
  std::vector<std::size_t> input_indices_;
  double nugget_floor_ = 0.0;
  Eigen::MatrixXd x_std_;
  Eigen::VectorXd y_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  bool degenerate_ = false;  // zero total variance: constant predictor
};

struct FitOptions {
  MaternNu nu = MaternNu::five_halves;
  int starts = 10;
  int max_evaluations = 200;
  bool estimate_nugget = true;
  std::optional<GpHyperparams> init;
  std::uint64_t seed = 0;
};

/// Relative nugget floor: floor = kNuggetFloor * var(y).
inline constexpr double kNuggetFloor = 1e-8;

/// Maximum-likelihood fit over log-lengths, log-variance and log-nugget by
/// multi-start box-constrained L-BFGS. Start 0 is `init` (or unit lengths,
/// sigma^2 = var(y), nugget = var(y)/100); the remaining starts are a Latin
/// hypercube in log space. The best start wins, ties by start order.
GpModel fit(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y, const FitOptions& options,
            std::vector<std::size_t> input_indices = {});

}  // namespace icscream
