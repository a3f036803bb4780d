#include "icscream/hsic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "icscream/error.hpp"
#include "icscream/random.hpp"

namespace icscream {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::invalid_argument, "HSIC inputs differ in length (" +
                                                 std::to_string(x.size()) + " vs " +
                                                 std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(ErrorKind::invalid_argument, "HSIC needs at least 2 observations");
}

double sample_std(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

std::string_view to_string(BandwidthRule rule) {
  return rule == BandwidthRule::empirical_std ? "empirical-std" : "median-heuristic";
}

BandwidthRule parse_bandwidth_rule(std::string_view name) {
  if (name == "empirical-std") return BandwidthRule::empirical_std;
  if (name == "median-heuristic") return BandwidthRule::median_heuristic;
  throw Error(ErrorKind::config, "unknown bandwidth rule '" + std::string(name) + "'");
}

std::string_view to_string(Relaxation relaxation) {
  return relaxation == Relaxation::hard ? "hard" : "exponential";
}

Relaxation parse_relaxation(std::string_view name) {
  if (name == "hard") return Relaxation::hard;
  if (name == "exponential") return Relaxation::exponential;
  throw Error(ErrorKind::config, "unknown relaxation '" + std::string(name) + "'");
}

double kernel_bandwidth(std::span<const double> values, const KernelConfig& kernel) {
  double s = 0.0;
  if (kernel.bandwidth_override) {
    s = *kernel.bandwidth_override;
  } else if (values.size() >= 2) {
    if (kernel.rule == BandwidthRule::empirical_std) {
      s = sample_std(values);
    } else {
      std::vector<double> diffs;
      diffs.reserve(values.size() * (values.size() - 1) / 2);
      for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) diffs.push_back(std::abs(values[i] - values[j]));
      }
      const auto mid = diffs.size() / 2;
      std::nth_element(diffs.begin(), diffs.begin() + static_cast<long>(mid), diffs.end());
      double med = diffs[mid];
      if (diffs.size() % 2 == 0) {
        const double lower = *std::max_element(diffs.begin(), diffs.begin() + static_cast<long>(mid));
        med = 0.5 * (med + lower);
      }
      s = med / std::sqrt(2.0);
    }
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorKind::zero_bandwidth, "kernel bandwidth is not strictly positive (constant input?)");
  }
  return s;
}

Eigen::MatrixXd gram_matrix(std::span<const double> values, const KernelConfig& kernel) {
  if (values.size() < 2) throw Error(ErrorKind::invalid_argument, "Gram matrix needs n >= 2");
  const double s = kernel_bandwidth(values, kernel);
  const double inv = 1.0 / (2.0 * s * s);
  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    g(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d = values[static_cast<std::size_t>(i)] - values[static_cast<std::size_t>(j)];
      g(i, j) = g(j, i) = std::exp(-d * d * inv);
    }
  }
  return g;
}

Eigen::VectorXd target_weights(std::span<const double> y, const TargetConfig& target) {
  if (target.relaxation == Relaxation::exponential && !(target.relaxation_scale > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "relaxation scale must be positive");
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (target.relaxation == Relaxation::hard) {
      w[k] = y[i] > target.threshold ? 1.0 : 0.0;
    } else {
      w[k] = std::exp(-std::max(0.0, target.threshold - y[i]) / target.relaxation_scale);
    }
  }
  return w;
}

Eigen::MatrixXd center_gram(const Eigen::MatrixXd& gram) {
  const Eigen::VectorXd col_means = gram.colwise().mean().transpose();
  const Eigen::VectorXd row_means = gram.rowwise().mean();
  const double grand = gram.mean();
  Eigen::MatrixXd c(gram.rows(), gram.cols());
  for (Eigen::Index j = 0; j < gram.cols(); ++j) {
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
      c(i, j) = gram(i, j) - row_means[i] - col_means[j] + grand;
    }
  }
  return c;
}

HsicPair::HsicPair(const Eigen::MatrixXd& input_gram, Eigen::MatrixXd output_gram)
    : HsicPair(input_gram, std::move(output_gram), Eigen::VectorXd(), false) {}

HsicPair HsicPair::with_weights(const Eigen::MatrixXd& input_gram, Eigen::VectorXd weights) {
  return HsicPair(input_gram, Eigen::MatrixXd(), std::move(weights), true);
}

HsicPair::HsicPair(const Eigen::MatrixXd& input_gram, Eigen::MatrixXd output_gram,
                   Eigen::VectorXd weights, bool rank_one)
    : input_gram_(input_gram),
      centered_input_(center_gram(input_gram)),
      output_gram_(std::move(output_gram)),
      weights_(std::move(weights)),
      rank_one_(rank_one) {
  const auto n = input_gram_.rows();
  if (input_gram_.cols() != n) throw Error(ErrorKind::invalid_argument, "input Gram matrix not square");
  if (rank_one_) {
    if (weights_.size() != n) throw Error(ErrorKind::invalid_argument, "weight vector length mismatch");
  } else if (output_gram_.rows() != n || output_gram_.cols() != n) {
    throw Error(ErrorKind::invalid_argument, "output Gram matrix size mismatch");
  }
}

double HsicPair::statistic() const {
  std::vector<std::size_t> identity(size());
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  return permuted(identity);
}

double HsicPair::permuted(std::span<const std::size_t> perm) const {
  const auto n = static_cast<Eigen::Index>(size());
  if (static_cast<Eigen::Index>(perm.size()) != n) {
    throw Error(ErrorKind::invalid_argument, "permutation length mismatch");
  }
  double total = 0.0;
  if (rank_one_) {
    // Zero weights contribute exact zeros, so skipping them leaves the sum unchanged.
    std::vector<Eigen::Index> active;
    std::vector<double> w;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double wi = weights_[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])];
      if (wi != 0.0) {
        active.push_back(i);
        w.push_back(wi);
      }
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double* col = centered_input_.col(active[a]).data();
      double acc = 0.0;
      for (std::size_t b = 0; b < active.size(); ++b) acc += col[active[b]] * w[b];
      total += w[a] * acc;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double* kcol = centered_input_.col(i).data();
      const double* lcol = output_gram_.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])).data();
      double acc = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) acc += kcol[j] * lcol[perm[static_cast<std::size_t>(j)]];
      total += acc;
    }
  }
  const double dn = static_cast<double>(n);
  return total / (dn * dn);
}

GammaNull HsicPair::gamma_null() const {
  const auto n = input_gram_.rows();
  if (n < 20) {
    throw Error(ErrorKind::invalid_argument, "Gamma approximation requires n >= 20 (got " +
                                                 std::to_string(n) + ")");
  }
  const double dn = static_cast<double>(n);

  const Eigen::MatrixXd output = rank_one_ ? Eigen::MatrixXd(weights_ * weights_.transpose()) : output_gram_;
  const Eigen::MatrixXd centered_output = center_gram(output);

  const double diag_k = input_gram_.diagonal().mean();
  const double diag_l = output.diagonal().mean();
  const double off_k = (input_gram_.sum() - input_gram_.diagonal().sum()) / (dn * (dn - 1.0));
  const double off_l = (output.sum() - output.diagonal().sum()) / (dn * (dn - 1.0));

  GammaNull g;
  g.mean = (diag_k - off_k) * (diag_l - off_l);

  const Eigen::MatrixXd prod = centered_input_.cwiseProduct(centered_output).array().square().matrix();
  const double off_sum = prod.sum() - prod.diagonal().sum();
  const double var_hsic = 2.0 * (dn - 4.0) * (dn - 5.0) / (dn * (dn - 1.0) * (dn - 2.0) * (dn - 3.0)) *
                          off_sum / (dn * (dn - 1.0));
  g.variance = dn * dn * var_hsic;

  if (!(g.mean > 0.0) || !(g.variance > 0.0) || !std::isfinite(g.mean) || !std::isfinite(g.variance)) {
    throw Error(ErrorKind::degenerate_null, "estimated null mean/variance of HSIC is not positive");
  }
  g.shape = g.mean * g.mean / g.variance;
  g.scale = g.variance / g.mean;
  return g;
}

double HsicPair::gamma_pvalue() const {
  const GammaNull g = gamma_null();
  const double observed = static_cast<double>(size()) * statistic();
  if (observed <= 0.0) return 1.0;
  return boost::math::gamma_q(g.shape, observed / g.scale);
}

HsicPair make_global_pair(std::span<const double> x, std::span<const double> y,
                          const KernelConfig& kx, const KernelConfig& ky) {
  check_lengths(x, y);
  return HsicPair(gram_matrix(x, kx), gram_matrix(y, ky));
}

HsicPair make_target_pair(std::span<const double> x, std::span<const double> y,
                          const KernelConfig& kx, const TargetConfig& target) {
  check_lengths(x, y);
  Eigen::VectorXd w = target_weights(y, target);
  if (w.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::degenerate_target, "no observation in the target region (all weights are zero)");
  }
  return HsicPair::with_weights(gram_matrix(x, kx), std::move(w));
}

double estimate_hsic(std::span<const double> x, std::span<const double> y, const KernelConfig& kx,
                     const KernelConfig& ky) {
  return make_global_pair(x, y, kx, ky).statistic();
}

double estimate_target_hsic(std::span<const double> x, std::span<const double> y,
                            const KernelConfig& kx, const TargetConfig& target) {
  return make_target_pair(x, y, kx, target).statistic();
}

double permutation_pvalue(const std::function<double(std::span<const std::size_t>)>& statistic_fn,
                          std::size_t n, double observed, int permutations, std::uint64_t seed) {
  if (permutations < 1) throw Error(ErrorKind::invalid_argument, "need at least one permutation");
  Rng rng(seed);
  int at_least = 0;
  for (int b = 0; b < permutations; ++b) {
    const auto perm = random_permutation(rng, n);
    if (statistic_fn(perm) >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(permutations + 1);
}

double gamma_pvalue(std::span<const double> x, std::span<const double> y, const KernelConfig& kx,
                    const KernelConfig& ky) {
  return make_global_pair(x, y, kx, ky).gamma_pvalue();
}

double gamma_target_pvalue(std::span<const double> x, std::span<const double> y,
                           const KernelConfig& kx, const TargetConfig& target) {
  return make_target_pair(x, y, kx, target).gamma_pvalue();
}

}  // namespace icscream
