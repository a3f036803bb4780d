#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "icscream/dataset.hpp"
#include "icscream/error.hpp"
#include "icscream/random.hpp"
#include "test_support.hpp"

using namespace icscream;
using testing_support::read_file;
using testing_support::scratch_dir;
using testing_support::write_file;

namespace {

std::vector<VariableSpec> two_uniforms() {
  return {{"x1", 0, Role::penalize, Distribution::uniform(0.0, 1.0)},
          {"x2", 1, Role::candidate, Distribution::uniform(0.0, 1.0)}};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("load a hand-written file with a reordered header") {
    const auto dir = scratch_dir("dataset_load");
    write_file(dir / "s.csv", "y,x2,x1\n1.5,0.25,0.5\n2.5,0.75,0.125\n-1,0,1\n");
    const auto s = load_sample(dir / "s.csv", two_uniforms());
    CHECK(s.size() == 3);
    CHECK(s.dimension() == 2);
    CHECK(s.design()(0, 0) == 0.5);
    CHECK(s.design()(0, 1) == 0.25);
    CHECK(s.design()(1, 0) == 0.125);
    CHECK(s.output()[2] == -1.0);
  }

  TEST_CASE("out-of-support value cites row and column") {
    const auto dir = scratch_dir("dataset_support");
    write_file(dir / "s.csv", "x1,x2,y\n0.5,0.5,1\n2.0,0.5,1\n");
    try {
      load_sample(dir / "s.csv", two_uniforms());
      FAIL("expected out_of_support");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::out_of_support);
      const std::string msg = e.what();
      CHECK(msg.find("x1") != std::string::npos);
      CHECK(msg.find('2') != std::string::npos);
    }
  }

  TEST_CASE("malformed files") {
    const auto dir = scratch_dir("dataset_bad");
    write_file(dir / "empty.csv", "");
    CHECK(kind_of([&] { load_sample(dir / "empty.csv", two_uniforms()); }) == ErrorKind::parse);
    write_file(dir / "missing_col.csv", "x1,y\n0.5,1\n0.2,1\n");
    CHECK(kind_of([&] { load_sample(dir / "missing_col.csv", two_uniforms()); }) == ErrorKind::header_mismatch);
    write_file(dir / "short.csv", "x1,x2,y\n0.5,0.5\n0.1,0.1,1\n");
    CHECK(kind_of([&] { load_sample(dir / "short.csv", two_uniforms()); }) == ErrorKind::parse);
    write_file(dir / "nan.csv", "x1,x2,y\n0.5,0.5,nan\n0.1,0.1,1\n");
    CHECK(kind_of([&] { load_sample(dir / "nan.csv", two_uniforms()); }) == ErrorKind::missing_value);
    write_file(dir / "one.csv", "x1,x2,y\n0.5,0.5,1\n");
    CHECK(kind_of([&] { load_sample(dir / "one.csv", two_uniforms()); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { load_sample(dir / "absent.csv", two_uniforms()); }) == ErrorKind::io);
  }

  TEST_CASE("schema checks") {
    auto dup = two_uniforms();
    dup[1].name = "x1";
    CHECK_THROWS_AS(validate_schema(dup), Error);
    auto gap = two_uniforms();
    gap[1].index = 2;
    CHECK_THROWS_AS(validate_schema(gap), Error);
    CHECK(indices_with_role(two_uniforms(), Role::penalize) == std::vector<std::size_t>{0});
  }

  TEST_CASE("write then load reproduces values bit for bit") {
    const auto dir = scratch_dir("dataset_roundtrip");
    const auto specs = two_uniforms();
    Eigen::MatrixXd x = sample_inputs(specs, 50, 3);
    Eigen::VectorXd y = x.col(0) * std::acos(-1.0) - x.col(1) / 3.0;
    const LearningSample s(x, y, specs);
    write_sample(dir / "a.csv", s);
    const auto back = load_sample(dir / "a.csv", specs);
    CHECK(back.design() == s.design());
    CHECK(back.output() == s.output());
    write_sample(dir / "b.csv", back);
    CHECK(read_file(dir / "a.csv") == read_file(dir / "b.csv"));
  }

  TEST_CASE("empirical quantile") {
    std::vector<double> ten{3, 1, 2, 10, 9, 8, 7, 6, 5, 4};
    CHECK(empirical_quantile(ten, 0.9) == 9.0);
    std::vector<double> one{5.0};
    CHECK(empirical_quantile(one, 0.1) == 5.0);
    CHECK(empirical_quantile(one, 0.99) == 5.0);

    // monotone in the level, equivariant under a shift
    std::vector<double> shifted = ten;
    for (auto& v : shifted) v += 2.5;
    double prev = -1e300;
    for (double level = 0.05; level < 1.0; level += 0.05) {
      const double q = empirical_quantile(ten, level);
      CHECK(q >= prev);
      prev = q;
      CHECK(empirical_quantile(shifted, level) == q + 2.5);
    }
  }

  TEST_CASE("empirical 0.9 quantile of normal draws") {
    const std::vector<VariableSpec> spec{{"z", 0, Role::candidate, Distribution::normal(0.0, 1.0)}};
    const Eigen::MatrixXd z = sample_inputs(spec, 10000, 17);
    std::vector<double> v(z.data(), z.data() + z.size());
    CHECK(std::abs(empirical_quantile(v, 0.9) - 1.2816) <= 0.05);
  }

  TEST_CASE("sample_inputs") {
    const std::vector<VariableSpec> spec{{"u", 0, Role::candidate, Distribution::uniform(0.0, 1.0)},
                                         {"l", 1, Role::candidate, Distribution::log_uniform(1.0, std::exp(1.0))}};
    const Eigen::MatrixXd a = sample_inputs(spec, 10000, 5);
    const Eigen::MatrixXd b = sample_inputs(spec, 10000, 5);
    CHECK(a == b);
    CHECK(std::abs(a.col(0).mean() - 0.5) <= 0.02);
    CHECK(std::abs(a.col(1).array().log().mean() - 0.5) <= 0.02);
  }

  TEST_CASE("critical threshold and subsets") {
    const auto specs = two_uniforms();
    Eigen::MatrixXd x = sample_inputs(specs, 10, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y[i] = i + 1;
    const LearningSample s(x, y, specs);
    const auto t = critical_threshold(s, 0.9);
    CHECK(t.value == 9.0);
    CHECK(t.level == 0.9);
    const std::vector<std::size_t> rows{2, 2, 5};
    const auto sub = s.subset(rows);
    CHECK(sub.size() == 3);
    CHECK(sub.output()[1] == 3.0);
    const std::vector<std::size_t> cols{1};
    CHECK(s.columns(cols).col(0) == x.col(1));
  }
}
