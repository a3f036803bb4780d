#include <doctest.h>

#include <cmath>
#include <vector>

#include "icscream/error.hpp"
#include "icscream/exceedance.hpp"
#include "icscream/random.hpp"

using namespace icscream;

namespace {

std::vector<VariableSpec> unit_specs(std::size_t d) {
  std::vector<VariableSpec> v;
  for (std::size_t k = 0; k < d; ++k) {
    v.push_back({"x" + std::to_string(k + 1), k, k < 2 ? Role::penalize : Role::candidate,
                 Distribution::uniform(0.0, 1.0)});
  }
  return v;
}

// A process with no spatial correlation: mean = level everywhere, mse = noise.
GpModel flat_model(double level, double noise) {
  const auto specs = unit_specs(3);
  const Eigen::MatrixXd x = sample_inputs(specs, 10, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(10, level);
  GpHyperparams hp;
  hp.lengths = Eigen::Vector3d::Ones();
  hp.process_variance = 0.0;
  hp.nugget = noise;
  return GpModel::condition(x, y, hp, Standardization::fit(x), {0, 1, 2}, 0.0);
}

GpModel smooth_model(std::size_t n, bool nugget, std::uint64_t seed) {
  const auto specs = unit_specs(3);
  const Eigen::MatrixXd x = sample_inputs(specs, n, seed);
  const Eigen::VectorXd y = (x.col(0) - x.col(1)).array().square() * 4.0 + x.col(2).array();
  FitOptions o;
  o.starts = 3;
  o.estimate_nugget = nugget;
  o.seed = seed;
  return fit(x, y, o, {0, 1, 2});
}

constexpr std::array<std::size_t, 2> kPen{0, 1};

}  // namespace

TEST_SUITE("exceedance") {
  TEST_CASE("mean far below the threshold") {
    const auto m = flat_model(-10.0, 1e-12);
    const auto specs = unit_specs(3);
    const auto e = conditional_exceedance(m, {0.5, 0.5}, kPen, specs, 0.0, 500, 1);
    CHECK(e.probability < 1e-9);
    CHECK(e.plugin == 0.0);
  }

  TEST_CASE("mean equal to the threshold") {
    const auto m = flat_model(2.0, 0.7);
    const auto specs = unit_specs(3);
    const auto e = conditional_exceedance(m, {0.2, 0.9}, kPen, specs, 2.0, 500, 1);
    CHECK(std::abs(e.probability - 0.5) <= 3.0 * e.std_error + 1e-12);
  }

  TEST_CASE("zero mse degenerates to the indicator") {
    const auto specs = unit_specs(3);
    const Eigen::MatrixXd x = sample_inputs(specs, 10, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 1.0);
    const auto m = fit(x, y, {}, {0, 1, 2});
    REQUIRE(m.degenerate());
    CHECK(conditional_exceedance(m, {0.5, 0.5}, kPen, specs, 0.5, 100, 1).probability == 1.0);
    CHECK(conditional_exceedance(m, {0.5, 0.5}, kPen, specs, 1.0, 100, 1).probability == 0.0);
    BatchPrediction b{Eigen::Vector3d(0.0, 2.0, 3.0), Eigen::Vector3d::Zero()};
    const auto r = ExceedanceEstimator::reduce(b, 1.0);
    CHECK(r.probability == doctest::Approx(2.0 / 3.0));
    CHECK(r.plugin == doctest::Approx(2.0 / 3.0));
    CHECK(r.std_error == doctest::Approx(std::sqrt(2.0 / 9.0) / std::sqrt(3.0)));
  }

  TEST_CASE("1x1 grid equals the single-cell estimate") {
    const auto m = smooth_model(60, true, 2);
    const auto specs = unit_specs(3);
    PenGrid grid{{0.3}, {0.6}};
    const Threshold t{0.9, 1.5};
    const auto map = exceedance_map(m, grid, kPen, specs, t, 300, 9);
    const auto e = conditional_exceedance(m, {0.3, 0.6}, kPen, specs, 1.5, 300, 9);
    CHECK(map.probability(0, 0) == e.probability);
    CHECK(map.std_error(0, 0) == e.std_error);
    CHECK(map.out_of_range == 0);
  }

  TEST_CASE("threshold below the output range gives certain exceedance") {
    const auto m = smooth_model(80, true, 3);
    const auto specs = unit_specs(3);
    const auto grid = PenGrid::over_support(specs[0].distribution, specs[1].distribution, 4, 4);
    const auto map = exceedance_map(m, grid, kPen, specs, {0.9, -10.0}, 200, 1);
    CHECK(map.probability.minCoeff() >= 1.0 - 1e-6);
  }

  TEST_CASE("raising the threshold never raises a cell") {
    const auto m = smooth_model(80, true, 4);
    const auto specs = unit_specs(3);
    const auto grid = PenGrid::over_support(specs[0].distribution, specs[1].distribution, 6, 5);
    std::vector<Threshold> ts{{0.5, 0.5}, {0.8, 1.0}, {0.9, 1.6}, {0.95, 2.5}};
    const auto maps = exceedance_maps(m, grid, kPen, specs, ts, 400, 2);
    for (std::size_t k = 1; k < maps.size(); ++k) {
      CHECK(((maps[k].probability - maps[k - 1].probability).array() <= 0.0).all());
      CHECK(((maps[k].plugin - maps[k - 1].plugin).array() <= 0.0).all());
    }
    for (const auto& mp : maps) {
      CHECK(mp.probability.minCoeff() >= 0.0);
      CHECK(mp.probability.maxCoeff() <= 1.0);
      CHECK((mp.std_error.array() <= 0.5 / std::sqrt(400.0)).all());
      CHECK(mp.out_of_range == 0);
    }
  }

  TEST_CASE("quadrupling M halves the standard error") {
    const auto m = smooth_model(80, true, 5);
    const auto specs = unit_specs(3);
    const auto a = conditional_exceedance(m, {0.1, 0.9}, kPen, specs, 3.0, 2000, 11);
    const auto b = conditional_exceedance(m, {0.1, 0.9}, kPen, specs, 3.0, 8000, 11);
    REQUIRE(b.std_error > 0.0);
    const double ratio = a.std_error / b.std_error;
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
  }

  TEST_CASE("full-process and plug-in estimates agree for a near-interpolating model") {
    const auto m = smooth_model(250, false, 6);
    const auto specs = unit_specs(3);
    for (const std::array<double, 2> at : {std::array<double, 2>{0.1, 0.8}, {0.5, 0.5}, {0.9, 0.3}}) {
      const auto e = conditional_exceedance(m, at, kPen, specs, 1.5, 4000, 12);
      const double bern = std::sqrt(std::max(e.plugin * (1.0 - e.plugin), 1e-4) / 4000.0);
      CHECK(std::abs(e.probability - e.plugin) <= 3.0 * bern);
    }
  }

  TEST_CASE("worst case") {
    ExceedanceMap m;
    m.grid = {{0.0, 1.0, 2.0}, {5.0, 6.0}};
    m.probability = Eigen::MatrixXd::Constant(3, 2, 0.25);
    auto w = worst_case(m);
    CHECK(w.row == 0);
    CHECK(w.col == 0);
    m.probability(2, 0) = 0.8;
    m.probability(1, 1) = 0.8;
    w = worst_case(m);
    CHECK(w.row == 1);
    CHECK(w.col == 1);
    CHECK(w.location == std::array<double, 2>{1.0, 6.0});
    CHECK(w.probability == 0.8);
  }

  TEST_CASE("single-peak surface") {
    // Process mean peaks at x1 = 0.5, x2 = 0.25; the peak cell is on the grid.
    const auto specs = unit_specs(3);
    const Eigen::MatrixXd x = sample_inputs(specs, 200, 7);
    const Eigen::VectorXd y = (-((x.col(0).array() - 0.5).square() + (x.col(1).array() - 0.25).square()) / 0.05).exp();
    FitOptions o;
    o.starts = 3;
    const auto model = fit(x, y, o, {0, 1, 2});
    PenGrid grid{{0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 0.25, 0.5, 0.75, 1.0}};
    const auto map = exceedance_map(model, grid, kPen, specs, {0.9, 0.5}, 500, 3);
    const auto w = worst_case(map);
    CHECK(w.row == 2);
    CHECK(w.col == 1);
  }

  TEST_CASE("grid and argument checks") {
    const auto specs = unit_specs(3);
    const auto m = flat_model(0.0, 1.0);
    PenGrid bad{{0.5, 0.4}, {0.5}};
    CHECK_THROWS_AS(exceedance_map(m, bad, kPen, specs, {0.9, 0.0}, 10, 1), Error);
    PenGrid outside{{1.5}, {0.5}};
    CHECK_THROWS_AS(exceedance_map(m, outside, kPen, specs, {0.9, 0.0}, 10, 1), Error);
    CHECK_THROWS_AS(conditional_exceedance(m, {0.5, 0.5}, kPen, specs, 0.0, 0, 1), Error);
    const std::array<std::size_t, 2> same{0, 0};
    CHECK_THROWS_AS(conditional_exceedance(m, {0.5, 0.5}, same, specs, 0.0, 10, 1), Error);

    const auto g = PenGrid::over_support(Distribution::uniform(2.0, 4.0), Distribution::normal(0.0, 1.0), 3, 2);
    CHECK(g.axis1 == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(g.axis2[0] == doctest::Approx(-3.0902).epsilon(1e-4));
  }
}
