#include <doctest.h>

#include <cmath>

#include "ioda/error.hpp"
#include "ioda/ood_detector.hpp"
#include "ioda/rng.hpp"
#include "support/oracles.hpp"

using namespace ioda;

namespace {

std::vector<State> grid_line(int n, double spacing) {
  std::vector<State> out;
  for (int i = 0; i < n; ++i) out.push_back({{i * spacing, 0.0}, {0.0, 0.0}});
  return out;
}

std::vector<State> random_states(Rng& rng, std::size_t n) {
  std::vector<State> out(n);
  for (auto& s : out) s = {{rng.uniform01(), rng.uniform01()}, {rng.uniform01(), rng.uniform01()}};
  return out;
}

}  // namespace

TEST_CASE("evenly spaced states calibrate to their spacing") {
  // Multiples of 0.125 are exact in binary, so every gap is exactly the spacing.
  const auto d = DistanceThresholdDetector::calibrate(grid_line(11, 0.125), StateMetric{}, 1.0);
  CHECK(d.epsilon() == 0.125);
  const auto tenth = DistanceThresholdDetector::calibrate(grid_line(11, 0.1), StateMetric{}, 1.0);
  CHECK(tenth.epsilon() == doctest::Approx(0.1));
}

TEST_CASE("identical states floor epsilon") {
  const State s{{0.3, 0.3}, {0.6, 0.6}};
  const auto d = DistanceThresholdDetector::calibrate({s, s}, StateMetric{}, 0.99);
  CHECK(d.epsilon() == DistanceThresholdDetector::kMinEpsilon);
  CHECK_FALSE(d.is_ood(s));
}

TEST_CASE("calibration needs at least two states") {
  CHECK_THROWS_AS(DistanceThresholdDetector::calibrate({{{0, 0}, {0, 0}}}, StateMetric{}, 0.99), Error);
  CHECK_THROWS_AS(DistanceThresholdDetector::calibrate(grid_line(3, 0.1), StateMetric{}, 0.0), Error);
}

TEST_CASE("epsilon is the q-quantile of brute-force leave-one-out distances") {
  Rng rng(21);
  const auto states = random_states(rng, 1500);
  for (const auto& metric : {StateMetric{}, StateMetric{MetricKind::kL2, {1, 1, 1, 1}}}) {
    const auto brute = ioda::testing::brute_loo(states, metric);
    const auto index = std::make_shared<const StateIndex>(states, metric);
    CHECK(leave_one_out_distances(*index) == brute);
    for (double q : {0.5, 0.9, 0.99, 1.0}) {
      const auto d = DistanceThresholdDetector::calibrate(index, q);
      CHECK(d.epsilon() == std::max(ioda::testing::sorted_quantile(brute, q), DistanceThresholdDetector::kMinEpsilon));
    }
  }
}

TEST_CASE("order statistic quantile") {
  const std::vector<double> v{5, 1, 4, 2, 3};
  CHECK(order_statistic_quantile(v, 0.2) == 1);
  CHECK(order_statistic_quantile(v, 0.21) == 2);
  CHECK(order_statistic_quantile(v, 0.6) == 3);
  CHECK(order_statistic_quantile(v, 1.0) == 5);
  CHECK(order_statistic_quantile(v, 0.99) == 5);
}

TEST_CASE("members are in-distribution and the threshold is inclusive") {
  const auto index = std::make_shared<const StateIndex>(grid_line(5, 0.25), StateMetric{});
  const DistanceThresholdDetector d(index, 0.125);
  for (const auto& s : index->points()) CHECK_FALSE(d.is_ood(s));
  CHECK_FALSE(d.is_ood({{0.0, 0.125}, {0.0, 0.0}}));  // exactly epsilon
  CHECK(d.is_ood({{0.0, 0.1251}, {0.0, 0.0}}));
  CHECK(d.is_ood({{-0.5, -0.5}, {1.0, 1.0}}));
  CHECK(d.distance_to_reference({{0.0, 0.125}, {0.0, 0.0}}) == 0.125);
}

TEST_CASE("fixed epsilon is validated") {
  const auto index = std::make_shared<const StateIndex>(grid_line(5, 0.25), StateMetric{});
  CHECK_THROWS_AS(DistanceThresholdDetector(index, -1.0), Error);
  CHECK_THROWS_AS(DistanceThresholdDetector(nullptr, 0.1), Error);
}

TEST_CASE("moving further from D never turns a state in-distribution") {
  Rng rng(22);
  const auto states = random_states(rng, 400);
  const auto d = DistanceThresholdDetector::calibrate(states, StateMetric{}, 0.99);
  // Past x = 1 every coordinate gap to D grows with x, so distance is nondecreasing.
  for (int i = 0; i < 100; ++i) {
    State q = states[static_cast<std::size_t>(rng.uniform(0, 400))];
    bool was_ood = false;
    double prev = 0.0;
    for (double x = 1.0; x <= 3.0; x += 0.02) {
      q.agent.x = x;
      const double dist = d.distance_to_reference(q);
      REQUIRE(dist >= prev);
      if (was_ood) REQUIRE(d.is_ood(q));
      was_ood = d.is_ood(q);
      prev = dist;
    }
    CHECK(was_ood);
  }
}

TEST_CASE("states beyond twice epsilon are flagged") {
  Rng rng(23);
  const auto states = random_states(rng, 1000);
  const auto d = DistanceThresholdDetector::calibrate(states, StateMetric{}, 0.99);
  for (int i = 0; i < 100; ++i) {
    const State& s = states[static_cast<std::size_t>(rng.uniform(0, 1000))];
    State q = s;
    q.agent.x = s.agent.x < 0.5 ? -2.5 * d.epsilon() : 1.0 + 2.5 * d.epsilon();
    REQUIRE(d.distance_to_reference(q) > 2 * d.epsilon());
    REQUIRE(d.is_ood(q));
  }
}
