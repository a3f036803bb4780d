#include <doctest.h>

#include <string>

#include "icscream/error.hpp"
#include "icscream/study.hpp"
#include "icscream/synthetic.hpp"
#include "test_support.hpp"

using namespace icscream;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "sample": "data.csv",
    "variables": [
      {"name": "a", "role": "penalize", "distribution": {"family": "uniform", "a": 0, "b": 1}},
      {"name": "b", "distribution": {"family": "truncated-normal", "mean": 0, "sd": 1, "lower": -1, "upper": 2}}
    ]
  })");
}

ErrorKind kind_of(const json& j) {
  try {
    parse_config(j, "/tmp");
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;
}

}  // namespace

TEST_SUITE("study") {
  TEST_CASE("defaults") {
    const auto c = parse_config(minimal(), "/base");
    CHECK(c.sample_path == std::filesystem::path("/base/data.csv"));
    CHECK(c.output_column == "y");
    CHECK(c.quantile_level == 0.9);
    CHECK(c.alpha == 0.1);
    CHECK(c.permutations == 999);
    CHECK(c.nu == MaternNu::five_halves);
    CHECK(c.folds == 10);
    CHECK(c.grid1 == 50);
    CHECK(c.grid2 == 50);
    CHECK(c.mc_samples == 10000);
    CHECK(c.variables[1].role == Role::candidate);
    CHECK(c.variables[1].index == 1);
    CHECK(c.variables[1].distribution.family() == Family::truncated_normal);
  }

  TEST_CASE("overrides and round trip") {
    auto j = minimal();
    j["seed"] = 17;
    j["screening"] = {{"alpha", 0.05}, {"kernel", {{"bandwidth_rule", "median-heuristic"}}},
                      {"target", {{"relaxation", "exponential"}, {"scale", 0.3}}}};
    j["metamodel"] = {{"nu", "3/2"}, {"folds", 5}};
    j["map"] = {{"grid", {10, 12}}, {"mc_samples", 100}};
    const auto c = parse_config(j, "/base");
    CHECK(c.seed == 17);
    CHECK(c.alpha == 0.05);
    CHECK(c.kernel.rule == BandwidthRule::median_heuristic);
    CHECK(c.relaxation == Relaxation::exponential);
    CHECK(*c.relaxation_scale == 0.3);
    CHECK(c.nu == MaternNu::three_halves);
    CHECK(c.folds == 5);
    CHECK(c.grid2 == 12);
    const auto again = parse_config(to_json(c), "/elsewhere");
    CHECK(to_json(again) == to_json(c));
  }

  TEST_CASE("unknown keys and bad values fail fast") {
    auto j = minimal();
    j["colour"] = "blue";
    CHECK(kind_of(j) == ErrorKind::config);
    j = minimal();
    j["metamodel"] = {{"nugget", true}};
    CHECK(kind_of(j) == ErrorKind::config);
    j = minimal();
    j["variables"][0]["distribution"]["c"] = 3;
    CHECK(kind_of(j) == ErrorKind::config);
    j = minimal();
    j["screening"] = {{"alpha", 1.5}};
    CHECK(kind_of(j) == ErrorKind::config);
    j = minimal();
    j["variables"][1]["name"] = "a";
    CHECK(kind_of(j) == ErrorKind::config);
    j = minimal();
    j["variables"][0]["distribution"] = {{"family", "uniform"}, {"a", 1}, {"b", 0}};
    CHECK(kind_of(j) == ErrorKind::config);
  }

  TEST_CASE("distribution documents round-trip") {
    for (const auto& d : {Distribution::uniform(-1, 2), Distribution::log_uniform(0.5, 8), Distribution::normal(1, 2),
                          Distribution::log_normal(0.1, 0.4), Distribution::truncated_normal(0, 1, -2, 3)}) {
      const auto back = distribution_from_json(distribution_to_json(d));
      CHECK(back.family() == d.family());
      CHECK(back.first() == d.first());
      CHECK(back.second() == d.second());
      CHECK(back.cdf(0.7) == d.cdf(0.7));
    }
  }

  TEST_CASE("SHA-256 test vectors") {
    CHECK(sha256_string("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_string("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const auto dir = testing_support::scratch_dir("study_sha");
    testing_support::write_file(dir / "f", "abc");
    CHECK(sha256_file(dir / "f") == sha256_string("abc"));
  }

  TEST_CASE("model document round trip") {
    const SyntheticModel truth(SyntheticSpec::bell_default(12, 80, 3));
    const auto sample = truth.generate();
    FitOptions o;
    o.starts = 2;
    const std::vector<std::size_t> cols{0, 1, 2};
    const auto model = fit(sample.columns(cols), sample.output(), o, cols);
    const auto doc = model_to_json(model, sample, "s.csv", "hash");
    const auto back = model_from_json(json::parse(doc.dump()), sample, "hash");
    const Eigen::MatrixXd probe = sample.columns(cols).topRows(10).array() * 0.9 + 0.05;
    const auto a = model.predict_batch(probe);
    const auto b = back.predict_batch(probe);
    CHECK(a.mean == b.mean);
    CHECK(a.mse == b.mse);
    CHECK_THROWS_AS(model_from_json(doc, sample, "other"), Error);
  }

  TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(0.535) == "0.535");
  }
}
