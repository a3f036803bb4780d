#pragma once

#include <functional>

#include <Eigen/Dense>

namespace icscream {

/// Objective returning f(x) and, when `gradient` is non-null, filling df/dx.
/// A non-finite return marks x as infeasible; the line search backs off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* gradient)>;

struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct OptimizeOptions {
  int max_evaluations = 200;
  int memory = 8;
  double gradient_tolerance = 1e-6;
  double relative_tolerance = 1e-10;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with projection onto a box. Variables sitting on a
/// bound with the gradient pointing outward are frozen for the step.
OptimizeResult minimize_box_lbfgs(const Objective& objective, Eigen::VectorXd start,
                                  const BoxBounds& bounds, const OptimizeOptions& options = {});

}  // namespace icscream
