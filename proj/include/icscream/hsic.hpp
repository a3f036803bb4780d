#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace icscream {

enum class BandwidthRule { empirical_std, median_heuristic };

std::string_view to_string(BandwidthRule rule);
BandwidthRule parse_bandwidth_rule(std::string_view name);

/// Gaussian kernel k(u, v) = exp(-(u - v)^2 / (2 s^2)). The bandwidth s comes
/// from the override when set, otherwise from the rule applied to the data.
struct KernelConfig {
  BandwidthRule rule = BandwidthRule::empirical_std;
  std::optional<double> bandwidth_override;
};

enum class Relaxation { hard, exponential };

std::string_view to_string(Relaxation relaxation);
Relaxation parse_relaxation(std::string_view name);

/// Output transform for target (T-HSIC) analysis of the event {Y > threshold}.
struct TargetConfig {
  double threshold = 0.0;
  Relaxation relaxation = Relaxation::hard;
  double relaxation_scale = 1.0;  // only read for exponential relaxation
};

/// Bandwidth the kernel would use on `values`; throws zero_bandwidth if it is
/// not strictly positive.
double kernel_bandwidth(std::span<const double> values, const KernelConfig& kernel);

Eigen::MatrixXd gram_matrix(std::span<const double> values, const KernelConfig& kernel);

/// Weights in [0, 1]: indicator of y > threshold (hard), or
/// exp(-max(0, threshold - y) / scale) (exponential).
Eigen::VectorXd target_weights(std::span<const double> y, const TargetConfig& target);

/// H K H with H = I - 11'/n.
Eigen::MatrixXd center_gram(const Eigen::MatrixXd& gram);

/// Moments of the asymptotic null law of n * HSIC, moment-matched to a Gamma.
struct GammaNull {
  double mean = 0.0;      // of n * HSIC
  double variance = 0.0;  // of n * HSIC
  double shape = 0.0;
  double scale = 0.0;
};

/// Input Gram matrix (stored centered) paired with an output kernel, for
/// repeated evaluation of the biased HSIC V-statistic
///   (1/n^2) trace(HKH . HLH)
/// under permutations of the output. Since HKH is already centered the
/// output side is used uncentered, trace(HKH . L_perm); the observed value is
/// computed through the same path with the identity permutation, so a
/// permutation that leaves L unchanged reproduces it bit for bit.
class HsicPair {
 public:
  /// General output Gram matrix.
  HsicPair(const Eigen::MatrixXd& input_gram, Eigen::MatrixXd output_gram);

  /// Rank-one output kernel L = w w' (target analysis).
  static HsicPair with_weights(const Eigen::MatrixXd& input_gram, Eigen::VectorXd weights);

  std::size_t size() const noexcept { return static_cast<std::size_t>(centered_input_.rows()); }

  double statistic() const;
  double permuted(std::span<const std::size_t> perm) const;

  /// Null moments by the closed forms of the Gamma approximation test:
  ///   E[n HSIC]   = (mean diag K - mean offdiag K)(mean diag L - mean offdiag L)
  ///   Var[n HSIC] = n^2 * 2 (n-4)(n-5) / (n (n-1)(n-2)(n-3)) * mean_{i!=j} (K~_ij L~_ij)^2
  /// Requires n >= 20; throws degenerate_null when either moment is not positive.
  GammaNull gamma_null() const;
  double gamma_pvalue() const;

 private:
  HsicPair(const Eigen::MatrixXd& input_gram, Eigen::MatrixXd output_gram, Eigen::VectorXd weights,
           bool rank_one);

  Eigen::MatrixXd input_gram_;
  Eigen::MatrixXd centered_input_;
  Eigen::MatrixXd output_gram_;  // empty when rank_one_
  Eigen::VectorXd weights_;      // empty unless rank_one_
  bool rank_one_ = false;
};

/// Biased V-statistic HSIC between x and y with Gaussian kernels.
double estimate_hsic(std::span<const double> x, std::span<const double> y, const KernelConfig& kx,
                     const KernelConfig& ky);

/// HSIC between x and the target-weighted output, L~_ij = w_i w_j. Throws
/// degenerate_target when every weight is zero.
double estimate_target_hsic(std::span<const double> x, std::span<const double> y,
                            const KernelConfig& kx, const TargetConfig& target);

HsicPair make_global_pair(std::span<const double> x, std::span<const double> y,
                          const KernelConfig& kx, const KernelConfig& ky);
HsicPair make_target_pair(std::span<const double> x, std::span<const double> y,
                          const KernelConfig& kx, const TargetConfig& target);

/// p = (1 + #{b : stat(perm_b) >= observed}) / (B + 1), with B uniform random
/// permutations of 0..n-1 drawn from `seed`.
double permutation_pvalue(const std::function<double(std::span<const std::size_t>)>& statistic_fn,
                          std::size_t n, double observed, int permutations, std::uint64_t seed);

double gamma_pvalue(std::span<const double> x, std::span<const double> y, const KernelConfig& kx,
                    const KernelConfig& ky);
double gamma_target_pvalue(std::span<const double> x, std::span<const double> y,
                           const KernelConfig& kx, const TargetConfig& target);

}  // namespace icscream
