#include <doctest.h>

#include <cmath>
#include <vector>

#include "icscream/error.hpp"
#include "icscream/random.hpp"
#include "icscream/screening.hpp"

using namespace icscream;

namespace {

HsicTestResult result(std::size_t index, double p) {
  HsicTestResult r;
  r.input_index = index;
  r.pvalue_permutation = p;
  return r;
}

std::vector<VariableSpec> uniform_specs(std::size_t d) {
  std::vector<VariableSpec> v;
  for (std::size_t k = 0; k < d; ++k) {
    v.push_back({"x" + std::to_string(k + 1), k, Role::candidate, Distribution::uniform(0.0, 1.0)});
  }
  return v;
}

}  // namespace

TEST_SUITE("screening") {
  TEST_CASE("ranking gives priority to target rejections") {
    const std::vector<HsicTestResult> global{result(0, 0.001), result(1, 0.5), result(2, 0.02), result(3, 0.04),
                                             result(4, 0.9)};
    const std::vector<HsicTestResult> target{result(0, 0.3), result(1, 0.05), result(2, 0.01), result(3, 0.6),
                                             result(4, 0.8)};
    const std::vector<std::size_t> none;
    CHECK(rank_inputs(global, target, 0.1, none) == std::vector<std::size_t>{2, 1, 0, 3});
    const std::vector<std::size_t> forced{4, 1};
    CHECK(rank_inputs(global, target, 0.1, forced) == std::vector<std::size_t>{2, 1, 0, 3, 4});
  }

  TEST_CASE("ties resolve by index") {
    const std::vector<HsicTestResult> global{result(0, 0.001), result(1, 0.001), result(2, 0.001)};
    const std::vector<HsicTestResult> target{result(0, 0.5), result(1, 0.5), result(2, 0.5)};
    const std::vector<std::size_t> none;
    CHECK(rank_inputs(global, target, 0.1, none) == std::vector<std::size_t>{0, 1, 2});
  }

  TEST_CASE("mismatched result lists are rejected") {
    const std::vector<HsicTestResult> global{result(0, 0.1)};
    const std::vector<HsicTestResult> target{result(1, 0.1)};
    const std::vector<std::size_t> none;
    CHECK_THROWS_AS(rank_inputs(global, target, 0.1, none), Error);
  }

  TEST_CASE("independent output selects only the forced inputs") {
    auto specs = uniform_specs(4);
    specs[0].role = Role::penalize;
    specs[1].role = Role::penalize;
    const Eigen::MatrixXd x = sample_inputs(specs, 120, 3);
    Eigen::VectorXd y(120);
    Rng rng(99);
    for (auto& v : y) v = uniform_open01(rng);
    const LearningSample s(x, y, specs);
    ScreeningOptions o;
    o.target.threshold = critical_threshold(s, 0.9).value;
    o.alpha = 0.01;
    o.permutations = 199;
    o.seed = 4;
    const auto r = screen(s, o);
    CHECK(r.selected == std::vector<std::size_t>{0, 1});
    CHECK(r.forced == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("duplicated influential column gets equal statistics and adjacent ranks") {
    auto specs = uniform_specs(4);
    Eigen::MatrixXd x = sample_inputs(specs, 100, 8);
    x.col(3) = x.col(1);
    const Eigen::VectorXd y = (6.0 * x.col(1)).array().sin() + 0.1 * x.col(0).array();
    const LearningSample s(x, y, specs);
    ScreeningOptions o;
    o.target.threshold = critical_threshold(s, 0.9).value;
    o.permutations = 199;
    const auto r = screen(s, o);
    CHECK(r.global[1].statistic == r.global[3].statistic);
    CHECK(r.target[1].statistic == r.target[3].statistic);
    REQUIRE(r.selected.size() >= 2);
    CHECK(r.selected[0] == 1);
    CHECK(r.selected[1] == 3);
  }

  TEST_CASE("fixed inputs are skipped and zero penalize inputs are allowed") {
    auto specs = uniform_specs(3);
    specs[2].role = Role::fixed;
    const Eigen::MatrixXd x = sample_inputs(specs, 60, 2);
    const Eigen::VectorXd y = x.col(0) + x.col(2);
    const LearningSample s(x, y, specs);
    ScreeningOptions o;
    o.target.threshold = critical_threshold(s, 0.9).value;
    o.permutations = 99;
    const auto r = screen(s, o);
    REQUIRE(r.global.size() == 2);
    CHECK(r.global[0].input_index == 0);
    CHECK(r.global[1].input_index == 1);
    CHECK(r.forced.empty());
    CHECK(r.selected.front() == 0);
    CHECK(std::isfinite(r.global[0].pvalue_gamma));
  }

  TEST_CASE("same seed, same result") {
    const auto specs = uniform_specs(3);
    const Eigen::MatrixXd x = sample_inputs(specs, 40, 5);
    const Eigen::VectorXd y = x.col(0).array().square() + 0.3 * x.col(1).array();
    const LearningSample s(x, y, specs);
    ScreeningOptions o;
    o.target.threshold = critical_threshold(s, 0.9).value;
    o.permutations = 99;
    o.seed = 42;
    const auto a = screen(s, o);
    const auto b = screen(s, o);
    for (std::size_t k = 0; k < a.global.size(); ++k) {
      CHECK(a.global[k].pvalue_permutation == b.global[k].pvalue_permutation);
      CHECK(a.target[k].pvalue_permutation == b.target[k].pvalue_permutation);
    }
    CHECK(a.selected == b.selected);
  }

  TEST_CASE("small samples report no Gamma p-value") {
    const auto specs = uniform_specs(2);
    const Eigen::MatrixXd x = sample_inputs(specs, 12, 5);
    const Eigen::VectorXd y = x.col(0);
    const LearningSample s(x, y, specs);
    ScreeningOptions o;
    o.target.threshold = critical_threshold(s, 0.9).value;
    o.permutations = 49;
    const auto r = screen(s, o);
    CHECK(std::isnan(r.global[0].pvalue_gamma));
  }

  TEST_CASE("constant input names the offending variable") {
    auto specs = uniform_specs(2);
    Eigen::MatrixXd x = sample_inputs(specs, 30, 5);
    x.col(1).setConstant(0.5);
    const Eigen::VectorXd y = x.col(0);
    const LearningSample s(x, y, specs);
    ScreeningOptions o;
    o.target.threshold = critical_threshold(s, 0.9).value;
    o.permutations = 9;
    try {
      screen(s, o);
      FAIL("expected zero_bandwidth");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::zero_bandwidth);
      CHECK(std::string(e.what()).find("x2") != std::string::npos);
    }
  }
}
