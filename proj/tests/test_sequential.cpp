#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "icscream/random.hpp"
#include "icscream/sequential.hpp"
#include "icscream/validation.hpp"

using namespace icscream;

namespace {

std::vector<VariableSpec> unit_specs(std::size_t d) {
  std::vector<VariableSpec> v;
  for (std::size_t k = 0; k < d; ++k) {
    v.push_back({"x" + std::to_string(k + 1), k, Role::candidate, Distribution::uniform(0.0, 1.0)});
  }
  return v;
}

}  // namespace

TEST_SUITE("sequential") {
  TEST_CASE("step inputs append penalizing inputs") {
    const std::vector<std::size_t> ranking{4, 0, 2, 7};
    const std::vector<std::size_t> pen{7, 1};
    CHECK(step_inputs(ranking, 1, pen) == std::vector<std::size_t>{4, 7, 1});
    CHECK(step_inputs(ranking, 2, pen) == std::vector<std::size_t>{4, 0, 7, 1});
    CHECK(step_inputs(ranking, 4, pen) == std::vector<std::size_t>{4, 0, 2, 7, 1});
  }

  TEST_CASE("ranking of length one equals a single fit") {
    const auto specs = unit_specs(2);
    const Eigen::MatrixXd x = sample_inputs(specs, 60, 1);
    const Eigen::VectorXd y = (4.0 * x.col(1)).array().sin();
    const LearningSample s(x, y, specs);
    SequentialOptions o;
    o.seed = 12;
    o.starts = 3;
    const std::vector<std::size_t> ranking{1};
    const auto r = build_sequential(s, ranking, o);
    REQUIRE(r.steps.size() == 1);
    FitOptions fo;
    fo.starts = 3;
    fo.seed = derive_seed(12, std::uint64_t{1});
    const std::vector<std::size_t> cols{1};
    const auto direct = fit(s.columns(cols), y, fo, {1});
    CHECK(r.model.hyperparams().lengths == direct.hyperparams().lengths);
    CHECK(r.model.hyperparams().nugget == direct.hyperparams().nugget);
    CHECK(r.model.input_indices() == std::vector<std::size_t>{1});
  }

  TEST_CASE("Q2 plateaus once the only active input is in") {
    auto specs = unit_specs(4);
    const Eigen::MatrixXd x = sample_inputs(specs, 120, 2);
    const Eigen::VectorXd y = (5.0 * x.col(2)).array().sin() + x.col(2).array();
    const LearningSample s(x, y, specs);
    SequentialOptions o;
    o.seed = 3;
    o.starts = 3;
    const std::vector<std::size_t> ranking{2, 0, 3};
    const auto r = build_sequential(s, ranking, o);
    REQUIRE(r.steps.size() == 3);
    CHECK(r.steps[0].q2 > 0.99);
    CHECK(r.model.input_indices() == std::vector<std::size_t>{2});
  }

  TEST_CASE("additive function with five active inputs") {
    const auto specs = unit_specs(8);
    const Eigen::MatrixXd x = sample_inputs(specs, 300, 4);
    const double a[5] = {1.0, 0.9, 0.8, 0.7, 0.6};
    Eigen::VectorXd y = Eigen::VectorXd::Zero(300);
    for (int k = 0; k < 5; ++k) y += a[k] * x.col(k);
    const LearningSample s(x, y, specs);
    SequentialOptions o;
    o.seed = 5;
    o.starts = 3;
    const std::vector<std::size_t> ranking{0, 1, 2, 3, 4, 5, 6};
    const auto r = build_sequential(s, ranking, o);
    CHECK(r.steps[r.selected_step].q2 >= 0.9);
    const auto& in = r.model.input_indices();
    int active = 0;
    for (std::size_t k = 0; k < 5; ++k) active += std::count(in.begin(), in.end(), k) > 0 ? 1 : 0;
    CHECK(active >= 4);
  }

  TEST_CASE("repeated input sets are skipped") {
    auto specs = unit_specs(3);
    specs[0].role = Role::penalize;
    specs[1].role = Role::penalize;
    const Eigen::MatrixXd x = sample_inputs(specs, 50, 6);
    const Eigen::VectorXd y = x.col(0) + x.col(1) + 0.3 * x.col(2);
    const LearningSample s(x, y, specs);
    SequentialOptions o;
    o.starts = 2;
    o.folds = 5;
    const std::vector<std::size_t> ranking{1, 0, 2};
    const auto r = build_sequential(s, ranking, o);
    REQUIRE(r.steps.size() == 2);
    CHECK(r.steps[0].step == 1);
    CHECK(r.steps[1].step == 3);
  }
}
