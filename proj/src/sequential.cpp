#include "icscream/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "icscream/error.hpp"
#include "icscream/random.hpp"
#include "icscream/validation.hpp"

namespace icscream {

std::vector<std::size_t> step_inputs(std::span<const std::size_t> ranking, std::size_t k,
                                     std::span<const std::size_t> penalize) {
  std::vector<std::size_t> inputs(ranking.begin(), ranking.begin() + static_cast<long>(std::min(k, ranking.size())));
  for (std::size_t p : penalize) {
    if (std::find(inputs.begin(), inputs.end(), p) == inputs.end()) inputs.push_back(p);
  }
  return inputs;
}

SequentialResult build_sequential(const LearningSample& sample, std::span<const std::size_t> ranking,
                                  const SequentialOptions& options) {
  if (ranking.empty()) throw Error(ErrorKind::invalid_argument, "sequential build needs a nonempty ranking");
  if (options.folds < 2) throw Error(ErrorKind::invalid_argument, "sequential build needs K >= 2");
  for (std::size_t r : ranking) {
    if (r >= sample.dimension()) throw Error(ErrorKind::invalid_argument, "ranking refers to a missing column");
  }
  const auto penalize = indices_with_role(sample.variables(), Role::penalize);

  std::vector<SequentialStep> steps;
  std::vector<std::optional<GpModel>> models;
  std::optional<GpHyperparams> previous;
  std::vector<std::size_t> previous_inputs;
  const std::uint64_t cv_seed = derive_seed(options.seed, std::string_view("cv"));

  for (std::size_t k = 1; k <= ranking.size(); ++k) {
    auto inputs = step_inputs(ranking, k, penalize);
    if (!previous_inputs.empty()) {
      auto a = inputs;
      auto b = previous_inputs;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a == b) continue;
    }

    FitOptions fo;
    fo.nu = options.nu;
    fo.starts = options.starts;
    fo.max_evaluations = options.max_evaluations;
    fo.estimate_nugget = options.estimate_nugget;
    fo.seed = derive_seed(options.seed, static_cast<std::uint64_t>(k));
    if (previous) {
      GpHyperparams init = *previous;
      init.lengths = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(inputs.size()));
      for (std::size_t j = 0; j < inputs.size(); ++j) {
        const auto it = std::find(previous_inputs.begin(), previous_inputs.end(), inputs[j]);
        if (it != previous_inputs.end()) {
          init.lengths[static_cast<Eigen::Index>(j)] = previous->lengths[it - previous_inputs.begin()];
        }
      }
      fo.init = init;
    }

    SequentialStep step;
    step.step = k;
    step.inputs = inputs;
    try {
      GpModel model = fit(sample.columns(inputs), sample.output(), fo, inputs);
      CvOptions cv;
      cv.folds = options.folds;
      cv.seed = cv_seed;
      cv.max_evaluations = options.cv_evaluations;
      cv.estimate_nugget = options.estimate_nugget;
      step.q2 = q2(kfold_predict(sample, model, cv));
      step.hyperparams = model.hyperparams();
      previous = model.hyperparams();
      previous_inputs = inputs;
      models.emplace_back(std::move(model));
    } catch (const Error& e) {
      step.failed = true;
      step.q2 = std::numeric_limits<double>::quiet_NaN();
      step.message = e.what();
      if (previous) step.hyperparams = *previous;
      std::cerr << "warning: sequential step " << k << " skipped: " << e.what() << '\n';
      models.emplace_back(std::nullopt);
    }
    steps.push_back(std::move(step));
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : steps) {
    if (!s.failed && s.q2 > best) best = s.q2;
  }
  if (!std::isfinite(best)) {
    throw Error(ErrorKind::fit_failure, "every sequential step failed");
  }
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!steps[i].failed && steps[i].q2 >= best - options.tie_tolerance) {
      chosen = i;
      break;
    }
  }
  return SequentialResult{std::move(*models[chosen]), std::move(steps), chosen};
}

}  // namespace icscream
