#include "icscream/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "icscream/error.hpp"
#include "icscream/optimizer.hpp"
#include "icscream/random.hpp"

namespace icscream {

namespace {

double root_factor(MaternNu nu) {
  return nu == MaternNu::five_halves ? std::sqrt(5.0) : std::sqrt(3.0);
}

double polynomial(double a, MaternNu nu) {
  return nu == MaternNu::five_halves ? 1.0 + a + a * a / 3.0 : 1.0 + a;
}

// (d corr / d log l) / corr for one dimension at scaled distance a.
double log_length_ratio(double a, MaternNu nu) {
  return nu == MaternNu::five_halves ? a * a * (1.0 + a) / (3.0 * (1.0 + a + a * a / 3.0))
                                     : a * a / (1.0 + a);
}

double correlation(const double* a, Eigen::Index stride_a, const double* b, Eigen::Index stride_b,
                   const Eigen::VectorXd& inv_lengths, double root, MaternNu nu) {
  double sum = 0.0;
  double prod = 1.0;
  for (Eigen::Index k = 0; k < inv_lengths.size(); ++k) {
    const double s = root * std::abs(a[k * stride_a] - b[k * stride_b]) * inv_lengths[k];
    sum += s;
    prod *= polynomial(s, nu);
  }
  return prod * std::exp(-sum);
}

void check_hyperparams(const GpHyperparams& hp, Eigen::Index p) {
  if (hp.lengths.size() != p) {
    throw Error(ErrorKind::invalid_argument, "expected " + std::to_string(p) + " length scales, got " +
                                                 std::to_string(hp.lengths.size()));
  }
  if (!(hp.lengths.array() > 0.0).all()) {
    throw Error(ErrorKind::invalid_argument, "length scales must be positive");
  }
  if (!(hp.process_variance >= 0.0) || !(hp.nugget >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "variance parameters must be nonnegative");
  }
}

struct Factorization {
  Eigen::MatrixXd covariance;  // K + tau I
  Eigen::LLT<Eigen::MatrixXd> llt;
};

Factorization factorize(const GpHyperparams& hp, const Eigen::MatrixXd& x, double nugget_floor) {
  check_hyperparams(hp, x.cols());
  Factorization f;
  f.covariance = cross_covariance(x, x, hp);
  f.covariance.diagonal().array() = hp.process_variance + hp.nugget + nugget_floor;
  f.llt.compute(f.covariance);
  if (f.llt.info() != Eigen::Success) {
    throw Error(ErrorKind::indefinite_covariance,
                "Cholesky factorization failed: covariance not positive definite (raise the nugget floor)");
  }
  return f;
}

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

std::string_view to_string(MaternNu nu) { return nu == MaternNu::five_halves ? "5/2" : "3/2"; }

MaternNu parse_matern_nu(std::string_view name) {
  if (name == "5/2" || name == "2.5") return MaternNu::five_halves;
  if (name == "3/2" || name == "1.5") return MaternNu::three_halves;
  throw Error(ErrorKind::config, "unknown Matern smoothness '" + std::string(name) + "'");
}

double matern_correlation(double h, double length, MaternNu nu) {
  const double a = root_factor(nu) * h / length;
  return polynomial(a, nu) * std::exp(-a);
}

Standardization Standardization::fit(const Eigen::MatrixXd& x) {
  Standardization s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double var = x.rows() > 1 ? (x.col(k).array() - s.mean[k]).square().sum() /
                                          static_cast<double>(x.rows() - 1)
                                    : 0.0;
    s.scale[k] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    throw Error(ErrorKind::invalid_argument, "input has " + std::to_string(x.cols()) +
                                                 " columns, model expects " + std::to_string(mean.size()));
  }
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const GpHyperparams& hp) {
  const Eigen::VectorXd inv = hp.lengths.cwiseInverse();
  const double root = root_factor(hp.nu);
  Eigen::MatrixXd out(a.rows(), b.rows());
  const bool same = &a == &b;
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    const double* bj = b.data() + j;
    for (Eigen::Index i = same ? j : 0; i < a.rows(); ++i) {
      const double c = hp.process_variance * correlation(a.data() + i, a.rows(), bj, b.rows(), inv, root, hp.nu);
      out(i, j) = c;
      if (same) out(j, i) = c;
    }
  }
  return out;
}

double log_marginal_likelihood(const GpHyperparams& hp, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, double nugget_floor) {
  const Factorization f = factorize(hp, x, nugget_floor);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
  const Eigen::VectorXd kinv_1 = f.llt.solve(ones);
  const Eigen::VectorXd kinv_y = f.llt.solve(y);
  const double trend = ones.dot(kinv_y) / ones.dot(kinv_1);
  const Eigen::VectorXd alpha = kinv_y - trend * kinv_1;
  const Eigen::VectorXd r = y.array() - trend;
  const double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(y.size());
  return -0.5 * r.dot(alpha) - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

LikelihoodValue log_marginal_likelihood_with_gradient(const GpHyperparams& hp,
                                                      const Eigen::MatrixXd& x,
                                                      const Eigen::VectorXd& y,
                                                      double nugget_floor, bool include_nugget) {
  const Factorization f = factorize(hp, x, nugget_floor);
  const auto n = y.size();
  const auto p = x.cols();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd kinv_1 = f.llt.solve(ones);
  const Eigen::VectorXd kinv_y = f.llt.solve(y);

  LikelihoodValue out;
  out.trend = ones.dot(kinv_y) / ones.dot(kinv_1);
  const Eigen::VectorXd alpha = kinv_y - out.trend * kinv_1;
  const Eigen::VectorXd r = y.array() - out.trend;
  const double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  out.value = -0.5 * r.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // d LML / d theta = 1/2 tr((alpha alpha' - K^{-1}) dK/dtheta); the trend is
  // at its optimum so its own variation does not contribute.
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
  f.llt.solveInPlace(w);
  w = alpha * alpha.transpose() - w;

  out.gradient = Eigen::VectorXd::Zero(p + 1 + (include_nugget ? 1 : 0));
  const Eigen::VectorXd inv = hp.lengths.cwiseInverse();
  const double root = root_factor(hp.nu);
  double g_variance = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double wk = w(i, j) * f.covariance(i, j);
      if (wk == 0.0) continue;
      g_variance += wk;
      for (Eigen::Index k = 0; k < p; ++k) {
        const double s = root * std::abs(x(i, k) - x(j, k)) * inv[k];
        out.gradient[k] += wk * log_length_ratio(s, hp.nu);
      }
    }
  }
  const double trace_w = w.diagonal().sum();
  out.gradient[p] = g_variance + 0.5 * hp.process_variance * trace_w;
  if (include_nugget) out.gradient[p + 1] = 0.5 * hp.nugget * trace_w;
  return out;
}

GpModel GpModel::condition(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y, GpHyperparams hp,
                           Standardization standardization, std::vector<std::size_t> input_indices,
                           double nugget_floor) {
  if (x_raw.rows() != y.size() || x_raw.rows() < 1) {
    throw Error(ErrorKind::invalid_argument, "training inputs and outputs differ in length");
  }
  if (!(nugget_floor >= 0.0)) throw Error(ErrorKind::invalid_argument, "nugget floor must be nonnegative");
  check_hyperparams(hp, x_raw.cols());
  if (input_indices.empty()) {
    for (Eigen::Index k = 0; k < x_raw.cols(); ++k) input_indices.push_back(static_cast<std::size_t>(k));
  }
  if (input_indices.size() != static_cast<std::size_t>(x_raw.cols())) {
    throw Error(ErrorKind::invalid_argument, "input index list does not match training columns");
  }

  GpModel m;
  m.standardization_ = std::move(standardization);
  m.x_std_ = m.standardization_.apply(x_raw);
  m.y_ = y;
  m.input_indices_ = std::move(input_indices);
  m.nugget_floor_ = nugget_floor;

  if (hp.process_variance + hp.nugget + nugget_floor == 0.0) {
    // Zero-variance process: the constant predictor is exact.
    m.degenerate_ = true;
    hp.trend = y[0];
    m.alpha_ = Eigen::VectorXd::Zero(y.size());
    m.hp_ = std::move(hp);
    return m;
  }

  // Trend estimated on centered outputs so a constant shift of y moves only the trend.
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  Factorization f = factorize(hp, m.x_std_, nugget_floor);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
  const Eigen::VectorXd kinv_1 = f.llt.solve(ones);
  const Eigen::VectorXd kinv_y = f.llt.solve(yc);
  const double trend_c = ones.dot(kinv_y) / ones.dot(kinv_1);
  m.alpha_ = kinv_y - trend_c * kinv_1;
  hp.trend = y_mean + trend_c;
  m.hp_ = std::move(hp);
  m.chol_ = std::move(f.llt);
  return m;
}

Eigen::MatrixXd GpModel::cholesky_factor() const {
  if (degenerate_) return Eigen::MatrixXd::Zero(x_std_.rows(), x_std_.rows());
  return chol_.matrixL();
}

Eigen::MatrixXd GpModel::regularized_covariance() const {
  Eigen::MatrixXd k = cross_covariance(x_std_, x_std_, hp_);
  k.diagonal().array() = hp_.process_variance + hp_.nugget + nugget_floor_;
  return k;
}

Prediction GpModel::predict(std::span<const double> x_raw) const {
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x_raw.size()));
  for (std::size_t k = 0; k < x_raw.size(); ++k) row(0, static_cast<Eigen::Index>(k)) = x_raw[k];
  const BatchPrediction b = predict_batch(row);
  return {b.mean[0], b.mse[0]};
}

BatchPrediction GpModel::predict_batch(const Eigen::MatrixXd& x_raw) const {
  BatchPrediction out;
  const Eigen::MatrixXd xs = standardization_.apply(x_raw);
  if (degenerate_) {
    out.mean = Eigen::VectorXd::Constant(xs.rows(), hp_.trend);
    out.mse = Eigen::VectorXd::Zero(xs.rows());
    return out;
  }
  const Eigen::MatrixXd kstar = cross_covariance(xs, x_std_, hp_);
  out.mean = (kstar * alpha_).array() + hp_.trend;
  const Eigen::MatrixXd v = chol_.matrixL().solve(kstar.transpose());
  out.mse = (hp_.process_variance + hp_.nugget - v.colwise().squaredNorm().transpose().array()).cwiseMax(0.0);
  return out;
}

JointPrediction GpModel::predict_joint(const Eigen::MatrixXd& x_raw) const {
  JointPrediction out;
  const Eigen::MatrixXd xs = standardization_.apply(x_raw);
  if (degenerate_) {
    out.mean = Eigen::VectorXd::Constant(xs.rows(), hp_.trend);
    out.covariance = Eigen::MatrixXd::Zero(xs.rows(), xs.rows());
    return out;
  }
  const Eigen::MatrixXd kstar = cross_covariance(xs, x_std_, hp_);
  out.mean = (kstar * alpha_).array() + hp_.trend;
  const Eigen::MatrixXd v = chol_.matrixL().solve(kstar.transpose());
  out.covariance = cross_covariance(xs, xs, hp_) - v.transpose() * v;
  out.covariance.diagonal().array() += hp_.nugget;
  return out;
}

GpModel fit(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y, const FitOptions& options,
            std::vector<std::size_t> input_indices) {
  const auto n = x_raw.rows();
  const auto p = x_raw.cols();
  if (p < 1 || n <= p) {
    throw Error(ErrorKind::invalid_argument, "fit requires n > p >= 1 (n = " + std::to_string(n) +
                                                 ", p = " + std::to_string(p) + ")");
  }
  if (y.size() != n || !y.allFinite() || !x_raw.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "fit requires finite data of matching length");
  }
  if (options.starts < 1 || options.max_evaluations < 1) {
    throw Error(ErrorKind::invalid_argument, "fit requires at least one start and one evaluation");
  }
  Standardization st = Standardization::fit(x_raw);
  const Eigen::MatrixXd xs = st.apply(x_raw);
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double var_y = sample_variance(y);
  const double floor = kNuggetFloor * var_y;

  GpHyperparams hp;
  hp.nu = options.nu;
  if (var_y == 0.0) {
    hp.lengths = options.init && options.init->lengths.size() == p ? options.init->lengths
                                                                     : Eigen::VectorXd::Ones(p);
    hp.process_variance = 0.0;
    hp.nugget = 0.0;
    return GpModel::condition(x_raw, y, hp, std::move(st), std::move(input_indices), 0.0);
  }

  const bool with_nugget = options.estimate_nugget;
  const Eigen::Index dims = p + 1 + (with_nugget ? 1 : 0);
  BoxBounds bounds{Eigen::VectorXd(dims), Eigen::VectorXd(dims)};
  bounds.lower.head(p).setConstant(std::log(0.01));
  bounds.upper.head(p).setConstant(std::log(100.0));
  bounds.lower[p] = std::log(1e-4 * var_y);
  bounds.upper[p] = std::log(1e4 * var_y);
  if (with_nugget) {
    bounds.lower[p + 1] = std::log(1e-10 * var_y);
    bounds.upper[p + 1] = std::log(10.0 * var_y);
  }

  const auto unpack = [&](const Eigen::VectorXd& theta) {
    GpHyperparams h;
    h.nu = options.nu;
    h.lengths = theta.head(p).array().exp();
    h.process_variance = std::exp(theta[p]);
    h.nugget = with_nugget ? std::exp(theta[p + 1]) : 0.0;
    return h;
  };
  const Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    try {
      const LikelihoodValue lv = log_marginal_likelihood_with_gradient(unpack(theta), xs, yc, floor, with_nugget);
      if (grad) *grad = -lv.gradient;
      return -lv.value;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // Start 0: warm start (or a neutral default); others: Latin hypercube in log space.
  std::vector<Eigen::VectorXd> starts;
  Eigen::VectorXd first(dims);
  if (options.init && options.init->lengths.size() == p) {
    first.head(p) = options.init->lengths.array().log();
    first[p] = std::log(options.init->process_variance > 0.0 ? options.init->process_variance : var_y);
    if (with_nugget) first[p + 1] = std::log(std::max(options.init->nugget, 1e-10 * var_y));
  } else {
    first.head(p).setZero();
    first[p] = std::log(var_y);
    if (with_nugget) first[p + 1] = std::log(0.01 * var_y);
  }
  starts.push_back(first);
  const int extra = options.starts - 1;
  if (extra > 0) {
    Rng rng(options.seed);
    Eigen::VectorXd lo(dims);
    Eigen::VectorXd hi(dims);
    lo.head(p).setConstant(std::log(0.05));
    hi.head(p).setConstant(std::log(10.0));
    lo[p] = std::log(0.2 * var_y);
    hi[p] = std::log(5.0 * var_y);
    if (with_nugget) {
      lo[p + 1] = std::log(1e-4 * var_y);
      hi[p + 1] = std::log(0.5 * var_y);
    }
    std::vector<Eigen::VectorXd> lhs(static_cast<std::size_t>(extra), Eigen::VectorXd(dims));
    for (Eigen::Index d = 0; d < dims; ++d) {
      const auto strata = random_permutation(rng, static_cast<std::size_t>(extra));
      for (int s = 0; s < extra; ++s) {
        const double u = (static_cast<double>(strata[static_cast<std::size_t>(s)]) + uniform_open01(rng)) /
                         static_cast<double>(extra);
        lhs[static_cast<std::size_t>(s)][d] = lo[d] + u * (hi[d] - lo[d]);
      }
    }
    starts.insert(starts.end(), lhs.begin(), lhs.end());
  }

  OptimizeOptions opt;
  opt.max_evaluations = options.max_evaluations;
  OptimizeResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    OptimizeResult r = minimize_box_lbfgs(objective, s, bounds, opt);
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) {
    throw Error(ErrorKind::fit_failure, "every optimizer start failed the Cholesky factorization");
  }
  return GpModel::condition(x_raw, y, unpack(best.x), std::move(st), std::move(input_indices), floor);
}

}  // namespace icscream
