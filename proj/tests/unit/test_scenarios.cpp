#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "pbsim/scenarios.hpp"
#include "pbsim/types.hpp"

using namespace pbsim;

namespace {

std::vector<double> ramp(std::size_t n, double start, double step) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + step * static_cast<double>(i);
  return v;
}

double prob_sum(const PriceScenarioSet& s) {
  return std::accumulate(s.probabilities.begin(), s.probabilities.end(), 0.0);
}

}  // namespace

TEST_CASE("zero DA noise reproduces the base in every row") {
  const auto base = ramp(96, 20.0, 1.5);
  const auto set = da_scenarios(base, 4, 0.0, 1);
  REQUIRE(set.size() == 4);
  for (const auto& row : set.prices) CHECK(row == base);
}

TEST_CASE("ten DA scenarios are equiprobable") {
  const auto set = da_scenarios(ramp(96, 20.0, 0.0), 10, 0.2, 1);
  for (const double p : set.probabilities) CHECK(p == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(std::abs(prob_sum(set) - 1.0) <= 1e-12);
  CHECK(set.kind == ScenarioKind::kDa);
}

TEST_CASE("DA noise has the configured spread") {
  const auto set = da_scenarios(std::vector<double>(4, 100.0), 1000, 0.2, 17);
  for (std::size_t t = 0; t < 4; ++t) {
    double mean = 0.0, sq = 0.0;
    for (const auto& row : set.prices) mean += row[t];
    mean /= 1000.0;
    for (const auto& row : set.prices) sq += (row[t] - mean) * (row[t] - mean);
    const double sd = std::sqrt(sq / 999.0);
    CHECK(sd >= 18.0);
    CHECK(sd <= 22.0);
  }
}

TEST_CASE("zero fan noise gives 25 copies of the actual series") {
  const auto up = ramp(96, 80.0, 1.0), down = ramp(96, 10.0, -1.0);
  const auto fan = rt_fan(up, down, 40, 3, {5, 5, 0.0});
  REQUIRE(fan.size() == 25);
  CHECK(fan.columns() == 56);
  for (std::size_t s = 0; s < 25; ++s) {
    for (std::size_t k = 0; k < 56; ++k) {
      CHECK(fan.prices[s][k] == up[40 + k]);
      CHECK(fan.down_prices[s][k] == down[40 + k]);
    }
  }
}

TEST_CASE("fan rows agree at t0 and are equiprobable") {
  const auto up = ramp(96, 80.0, 1.0), down = ramp(96, -5.0, 0.5);
  const auto fan = rt_fan(up, down, 10, 3);
  REQUIRE(fan.size() == 25);
  CHECK(fan.kind == ScenarioKind::kRtJoint);
  CHECK(fan.t0 == 10);
  CHECK(std::abs(prob_sum(fan) - 1.0) <= 1e-12);
  for (std::size_t s = 0; s < 25; ++s) {
    CHECK(fan.probabilities[s] == fan.probabilities[0]);
    CHECK(fan.prices[s][0] == up[10]);
    CHECK(fan.down_prices[s][0] == down[10]);
  }
}

TEST_CASE("fan rows form the up x down cross product") {
  const auto up = ramp(96, 80.0, 1.0), down = ramp(96, 30.0, 0.25);
  const auto fan = rt_fan(up, down, 0, 9);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(fan.prices[i * 5 + j] == fan.prices[i * 5]);
      CHECK(fan.down_prices[i * 5 + j] == fan.down_prices[j]);
    }
  }
  CHECK(fan.prices[0] != fan.prices[5]);
}

TEST_CASE("fan is deterministic and keeps negative prices") {
  const std::vector<double> up(96, 100.0), down(96, -400.0);
  const auto a = rt_fan(up, down, 5, 11);
  const auto b = rt_fan(up, down, 5, 11);
  CHECK(a.prices == b.prices);
  CHECK(a.down_prices == b.down_prices);
  const auto c = rt_fan(up, down, 5, 12);
  CHECK(a.prices != c.prices);
  bool negative = false;
  for (const auto& row : a.down_prices) {
    for (std::size_t k = 1; k < row.size(); ++k) negative = negative || row[k] < 0.0;
  }
  CHECK(negative);
}

TEST_CASE("fan respects the window end and validates t0") {
  const std::vector<double> up(96, 100.0), down(96, 50.0);
  CHECK(rt_fan(up, down, 10, 1, {}, 20).columns() == 10);
  CHECK_THROWS_AS(rt_fan(up, down, 96, 1), ValidationError);
  CHECK_THROWS_AS(rt_fan(up, down, 20, 1, {}, 20), ValidationError);
  CHECK_THROWS_AS(rt_fan(up, std::vector<double>(95, 1.0), 0, 1), ValidationError);
}
