#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "icscream/distribution.hpp"
#include "icscream/error.hpp"
#include "icscream/random.hpp"

using namespace icscream;

namespace {

// Kolmogorov-Smirnov distance between the draws and an analytic CDF.
template <typename Cdf>
double ks_distance(std::vector<double> draws, Cdf cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::vector<double> draw(const Distribution& dist, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = dist.sample(rng);
  return out;
}

// Critical value of the KS statistic at significance 0.001 (asymptotic).
double ks_critical(std::size_t n) { return 1.9495 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST_SUITE("distribution") {
  TEST_CASE("parameter constraints") {
    CHECK_THROWS_AS(Distribution::uniform(1.0, 1.0), Error);
    CHECK_THROWS_AS(Distribution::log_uniform(0.0, 1.0), Error);
    CHECK_THROWS_AS(Distribution::normal(0.0, 0.0), Error);
    CHECK_THROWS_AS(Distribution::log_normal(0.0, -1.0), Error);
    CHECK_THROWS_AS(Distribution::truncated_normal(0.0, 1.0, 2.0, 1.0), Error);
  }

  TEST_CASE("family names round-trip") {
    for (auto f : {Family::uniform, Family::log_uniform, Family::normal, Family::log_normal,
                   Family::truncated_normal}) {
      CHECK(parse_family(to_string(f)) == f);
    }
    CHECK_THROWS_AS(parse_family("weibull"), Error);
  }

  TEST_CASE("KS test against the analytic CDF for every family") {
    const std::size_t n = 10000;
    const auto uni = Distribution::uniform(-1.0, 3.0);
    CHECK(ks_distance(draw(uni, n, 1), [](double x) { return (x + 1.0) / 4.0; }) < ks_critical(n));

    const auto logu = Distribution::log_uniform(1.0, 100.0);
    CHECK(ks_distance(draw(logu, n, 2), [](double x) { return std::log(x) / std::log(100.0); }) < ks_critical(n));

    const auto nor = Distribution::normal(2.0, 0.5);
    CHECK(ks_distance(draw(nor, n, 3), [](double x) { return phi((x - 2.0) / 0.5); }) < ks_critical(n));

    const auto logn = Distribution::log_normal(0.3, 0.8);
    CHECK(ks_distance(draw(logn, n, 4), [](double x) { return phi((std::log(x) - 0.3) / 0.8); }) < ks_critical(n));

    const auto tn = Distribution::truncated_normal(0.0, 1.0, -0.5, 2.0);
    const double lo = phi(-0.5);
    const double hi = phi(2.0);
    CHECK(ks_distance(draw(tn, n, 5), [&](double x) { return (phi(x) - lo) / (hi - lo); }) < ks_critical(n));
  }

  TEST_CASE("draws stay inside the support") {
    for (const auto& d : {Distribution::uniform(0.0, 1.0), Distribution::log_uniform(0.1, 10.0),
                          Distribution::truncated_normal(1.0, 3.0, 0.0, 0.5), Distribution::log_normal(0.0, 1.0)}) {
      for (double v : draw(d, 5000, 11)) CHECK(d.in_support(v));
    }
  }

  TEST_CASE("log-uniform(1, e) has uniform logs") {
    const auto d = Distribution::log_uniform(1.0, std::numbers::e);
    double mean = 0.0;
    const auto v = draw(d, 10000, 7);
    for (double x : v) mean += std::log(x);
    CHECK(std::abs(mean / 10000.0 - 0.5) <= 0.02);
  }

  TEST_CASE("quantile inverts the CDF") {
    const auto d = Distribution::truncated_normal(1.0, 2.0, -1.0, 4.0);
    for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(d.cdf(d.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
    CHECK_THROWS_AS(d.quantile(0.0), Error);
    CHECK_THROWS_AS(d.quantile(1.0), Error);
  }
}
