#include "icscream/optimizer.hpp"

#include <cmath>
#include <algorithm>
#include <deque>
#include <limits>
#include <vector>

namespace icscream {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const BoxBounds& b) {
  return x.cwiseMax(b.lower).cwiseMin(b.upper);
}

// Gradient components that could move the point inside the box.
Eigen::VectorXd free_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const BoxBounds& b) {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= b.lower[i] && g[i] > 0.0) || (x[i] >= b.upper[i] && g[i] < 0.0)) m[i] = 0.0;
  }
  return m;
}

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

}  // namespace

OptimizeResult minimize_box_lbfgs(const Objective& objective, Eigen::VectorXd start,
                                  const BoxBounds& bounds, const OptimizeOptions& options) {
  OptimizeResult result;
  Eigen::VectorXd x = project(start, bounds);
  Eigen::VectorXd g(x.size());
  double f = objective(x, &g);
  result.evaluations = 1;
  result.x = x;
  result.value = f;
  if (!std::isfinite(f) || !g.allFinite()) {
    result.value = std::numeric_limits<double>::infinity();
    return result;
  }

  std::deque<Pair> memory;
  while (result.evaluations < options.max_evaluations) {
    const Eigen::VectorXd mask = free_mask(x, g, bounds);
    const Eigen::VectorXd pg = g.cwiseProduct(mask);
    if (pg.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    // Two-loop recursion restricted to the free variables.
    Eigen::VectorXd q = pg;
    std::vector<double> alphas(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      alphas[k] = memory[k].rho * memory[k].s.cwiseProduct(mask).dot(q);
      q -= alphas[k] * memory[k].y.cwiseProduct(mask);
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    } else {
      q *= std::min(1.0, 1.0 / pg.norm());
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * memory[k].y.cwiseProduct(mask).dot(q);
      q += (alphas[k] - beta) * memory[k].s.cwiseProduct(mask);
    }
    Eigen::VectorXd direction = -q.cwiseProduct(mask);
    if (!(direction.dot(g) < 0.0)) {
      memory.clear();
      direction = -pg * std::min(1.0, 1.0 / pg.norm());
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    Eigen::VectorXd g_new(x.size());
    double f_new = f;
    while (result.evaluations < options.max_evaluations) {
      x_new = project(x + step * direction, bounds);
      if ((x_new - x).lpNorm<Eigen::Infinity>() == 0.0) break;
      f_new = objective(x_new, &g_new);
      ++result.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= f + 1e-4 * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-12) break;
    }
    if (!accepted) {
      if (memory.empty()) break;
      memory.clear();
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      memory.push_back({s, yv, 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    const double decrease = f - f_new;
    x = x_new;
    f = f_new;
    g = g_new;
    if (decrease <= options.relative_tolerance * std::max(1.0, std::abs(f))) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.value = f;
  return result;
}

}  // namespace icscream
