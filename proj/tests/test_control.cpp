#include <doctest.h>

#include <cmath>
#include <memory>

#include "ioda/control.hpp"
#include "ioda/error.hpp"
#include "ioda/rng.hpp"
#include "ioda/rollout_store.hpp"

using namespace ioda;

namespace {

struct Fixture {
  std::shared_ptr<const NavEnv> env;
  std::shared_ptr<const StateIndex> index;
  std::shared_ptr<const DistanceThresholdDetector> detector;
};

Fixture make_fixture(EnvVariant variant, PolicyKind kind, int n = 300) {
  Fixture f;
  f.env = std::make_shared<const NavEnv>(EnvConfig{variant});
  const PolicySpec spec{kind};
  const SurrogatePolicy p(spec, *f.env);
  const RolloutSet set = collect(p, spec, *f.env, {n, 77, 0.1});
  f.index = std::make_shared<const StateIndex>(all_states(set), StateMetric{});
  f.detector = std::make_shared<const DistanceThresholdDetector>(
      DistanceThresholdDetector::calibrate(f.index, 0.99));
  return f;
}

const AxisPartition kX = AxisPartition::user_x_only();

}  // namespace

TEST_CASE("compose takes user axes from u and robot axes from a") {
  CHECK(compose({0.03, std::nullopt}, {0.01, -0.02}, kX) == Action{0.03, -0.02});
  CHECK(compose({std::nullopt, std::nullopt}, {0.01, -0.02}, kX) == Action{0.0, -0.02});
  CHECK(compose({std::nullopt, 0.04}, {0.01, -0.02}, AxisPartition(false, true)) == Action{0.01, 0.04});
  CHECK(compose({}, {0.01, -0.02}, AxisPartition(false, false)) == Action{0.01, -0.02});
  CHECK(user_action({0.03, std::nullopt}, kX) == Action{0.03, 0.0});
}

TEST_CASE("user commands are validated against the partition") {
  CHECK_NOTHROW(validate({0.05, std::nullopt}, kX, 0.05));
  CHECK_THROWS_AS(validate({std::nullopt, 0.01}, kX, 0.05), Error);
  CHECK_THROWS_AS(validate({0.06, std::nullopt}, kX, 0.05), Error);
  CHECK_THROWS_AS(validate({std::nan(""), std::nullopt}, kX, 0.05), Error);
}

TEST_CASE("axis partition text form round-trips") {
  for (const auto& p : {AxisPartition(true, false), AxisPartition(false, true), AxisPartition(true, true),
                        AxisPartition(false, false)}) {
    CHECK(parse_axis_partition(to_string(p)) == p);
  }
  CHECK(parse_axis_partition(" x , y ") == AxisPartition(true, true));
  CHECK_THROWS_AS(parse_axis_partition("z"), Error);
  CHECK_THROWS_AS(parse_axis_partition("x,x"), Error);
}

TEST_CASE("in-distribution states behave exactly like the unmodified loop") {
  const auto f = make_fixture(EnvVariant::kFreezeYOutside, PolicyKind::kVariantCFreeze);
  const SurrogatePolicy p({PolicyKind::kVariantCFreeze}, *f.env);
  int checked = 0;
  for (const auto& s : f.index->points()) {
    const UserCommand u{0.01, std::nullopt};
    const auto io = ioda_step(0, s, u, p, *f.detector, *f.index, *f.env, kX);
    const auto base = baseline_step(0, s, u, p, *f.env, kX);
    REQUIRE_FALSE(io.ood);
    REQUIRE_FALSE(io.imagined_state.has_value());
    REQUIRE(io == base);
    ++checked;
  }
  CHECK(checked == static_cast<int>(f.index->size()));
}

TEST_CASE("out-of-distribution states query the policy at the imagined state") {
  const auto f = make_fixture(EnvVariant::kFreezeYOutside, PolicyKind::kVariantCFreeze);
  const SurrogatePolicy p({PolicyKind::kVariantCFreeze}, *f.env);
  const State s{{-0.25, 0.3}, {0.2, 0.9}};
  const UserCommand u{-0.02, std::nullopt};
  const auto io = ioda_step(3, s, u, p, *f.detector, *f.index, *f.env, kX);
  REQUIRE(io.ood);
  REQUIRE(io.imagined_state.has_value());
  CHECK(f.env->in_workspace(io.imagined_state->agent));
  CHECK(*io.imagined_state == f.index->nearest(s).state);
  CHECK(io.robot_action == p.act(*io.imagined_state));
  CHECK(io.robot_action.dy != 0.0);  // the imagined state lies inside, so y is not frozen
  CHECK(io.composed_action == Action{-0.02, io.robot_action.dy});
  // The transition starts from the real state.
  CHECK(io.next_state == f.env->step(s, io.composed_action));
  CHECK(io.reward == f.env->reward(s, io.composed_action));
  CHECK(io.t == 3);

  const auto base = baseline_step(3, s, u, p, *f.env, kX);
  CHECK_FALSE(base.ood);
  CHECK(base.robot_action.dy == 0.0);
  CHECK(base.next_state.agent.y == s.agent.y);
}

TEST_CASE("baseline with the sporadic agent uses the hashed direction") {
  const NavEnv env(EnvConfig{EnvVariant::kLeavePenalty});
  const PolicySpec spec{PolicyKind::kVariantBSporadic, 1.0, 99};
  const SurrogatePolicy p(spec, env);
  const State s{{-0.2, 0.4}, {0.2, 0.9}};
  const auto base = baseline_step(0, s, {}, p, env, kX);
  CHECK(base.robot_action == act(spec, env, s));
  CHECK(std::hypot(base.robot_action.dx, base.robot_action.dy) == doctest::Approx(0.05));
  CHECK(base.composed_action.dx == 0.0);
}

TEST_CASE("the user axis is never overridden") {
  const auto f = make_fixture(EnvVariant::kFreezeYOutside, PolicyKind::kVariantCFreeze);
  const SurrogatePolicy p({PolicyKind::kVariantCFreeze}, *f.env);
  Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    const State s{{rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)}, {rng.uniform01(), rng.uniform01()}};
    const UserCommand u{rng.uniform(-0.05, 0.05), std::nullopt};
    for (const auto mode : {LoopMode::kIoda, LoopMode::kBaseline}) {
      const auto d = mode == LoopMode::kIoda ? ioda_step(i, s, u, p, *f.detector, *f.index, *f.env, kX)
                                             : baseline_step(i, s, u, p, *f.env, kX);
      REQUIRE(d.composed_action.dx == *u.x);
      REQUIRE(d.composed_action.dy == d.robot_action.dy);
      REQUIRE(d.imagined_state.has_value() == d.ood);
      if (d.ood) {
        // The imagined state is a member of D and the nearest one.
        REQUIRE(f.index->nearest(*d.imagined_state).dist == 0.0);
        REQUIRE(f.detector->distance_to_reference(s) == f.index->nearest(s).dist);
      }
    }
  }
}

TEST_CASE("pipeline assembly rejects a detector fit on another D") {
  const auto a = make_fixture(EnvVariant::kFreezeYOutside, PolicyKind::kVariantCFreeze, 50);
  const auto b = make_fixture(EnvVariant::kFreezeYOutside, PolicyKind::kVariantCFreeze, 60);
  auto policy = std::make_shared<const SurrogatePolicy>(PolicySpec{PolicyKind::kVariantCFreeze}, *a.env);
  CHECK_NOTHROW(ControlPipeline(a.env, policy, a.detector, a.index, kX));
  CHECK_THROWS_AS(ControlPipeline(a.env, policy, a.detector, b.index, kX), Error);

  const auto l2_index = std::make_shared<const StateIndex>(a.index->points(), StateMetric{MetricKind::kL2});
  CHECK_THROWS_AS(ControlPipeline(a.env, policy, a.detector, l2_index, kX), Error);
  // Equal content in a separate allocation is accepted.
  const auto copy = std::make_shared<const StateIndex>(a.index->points(), StateMetric{});
  CHECK_NOTHROW(ControlPipeline(a.env, policy, a.detector, copy, kX));
  CHECK_THROWS_AS(ControlPipeline(a.env, nullptr, a.detector, a.index, kX), Error);
}

TEST_CASE("pipeline dispatches on loop mode") {
  const auto f = make_fixture(EnvVariant::kFreezeYOutside, PolicyKind::kVariantCFreeze, 100);
  auto policy = std::make_shared<const SurrogatePolicy>(PolicySpec{PolicyKind::kVariantCFreeze}, *f.env);
  const ControlPipeline pipe(f.env, policy, f.detector, f.index, kX);
  const State s{{-0.3, 0.5}, {0.5, 0.5}};
  CHECK(pipe.step(LoopMode::kIoda, 0, s, {}) == ioda_step(0, s, {}, *policy, *f.detector, *f.index, *f.env, kX));
  CHECK(pipe.step(LoopMode::kBaseline, 0, s, {}) == baseline_step(0, s, {}, *policy, *f.env, kX));
  CHECK_THROWS_AS(pipe.step(LoopMode::kIoda, 0, s, {std::nullopt, 0.01}), Error);
}
