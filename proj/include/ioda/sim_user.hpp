#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ioda/control.hpp"

namespace ioda {

/// The user's novel task: subgoals (possibly outside the workspace) then the primary goal.
struct SubgoalPlan {
  std::vector<Vec2> subgoals;
  Vec2 primary_goal;
  double reach_radius = 0.05;

  friend bool operator==(const SubgoalPlan&, const SubgoalPlan&) = default;
};

/// Which target the user is currently steering toward. Only ever moves forward.
class PlanProgress {
 public:
  Vec2 target(const SubgoalPlan& plan) const;

  /// Advances past the current target if the agent is within the reach radius.
  /// Returns true when the target changed (or the primary goal was reached).
  bool update(const SubgoalPlan& plan, Vec2 agent);

  std::size_t subgoals_reached() const { return next_subgoal_; }
  bool primary_reached() const { return primary_reached_; }

 private:
  std::size_t next_subgoal_ = 0;
  bool primary_reached_ = false;
};

/// Proportional x-position controller toward the current target.
/// Only the x axis is populated; the robot owns y.
UserCommand sim_user_command(const State& s, const SubgoalPlan& plan, const PlanProgress& progress,
                             double gain, double a_max);

/// W: the user's prediction of the next state given the current state and their own command.
class UserExpectation {
 public:
  virtual ~UserExpectation() = default;
  virtual State expected_next(const State& s, const UserCommand& u, const Policy& policy,
                              const NavEnv& env, const AxisPartition& partition) const = 0;
  virtual const StateMetric& metric() const = 0;
};

/// The closest-observed-state model: the user expects the robot to act as it did
/// in the nearest state of D, using the same index and tie-breaking as projection.
///
/// With a familiarity detector attached, states the detector accepts as
/// in-distribution are predicted from the state itself (the user has seen
/// enough of that region); without one, every state is projected.
class ProjectionExpectation final : public UserExpectation {
 public:
  explicit ProjectionExpectation(std::shared_ptr<const StateIndex> reference,
                                 std::shared_ptr<const OodDetector> familiarity = nullptr);

  State expected_next(const State& s, const UserCommand& u, const Policy& policy, const NavEnv& env,
                      const AxisPartition& partition) const override;
  const StateMetric& metric() const override { return reference_->metric(); }

  const StateIndex& reference() const { return *reference_; }

 private:
  std::shared_ptr<const StateIndex> reference_;
  std::shared_ptr<const OodDetector> familiarity_;
};

/// Distance between W's prediction and the realized next state of a logged step.
double predictability_gap(const UserExpectation& w, const StepDecision& decision, const Policy& policy,
                          const NavEnv& env, const AxisPartition& partition);

struct CertificateWitness {
  State state;
  std::size_t pos = 0;  // canonical position in D
  double lhs = 0.0;     // d(W(s), T(s, u o pi(s)))
  double rhs = 0.0;     // d(W(s), T(s, u o pi(s')))
};

/// Searches D for s' with d(W(s), T(s, u o pi(s))) >= d(W(s), T(s, u o pi(s'))).
/// The candidate is the first (canonical order) minimizer of the right-hand side;
/// it is returned iff the inequality holds.
std::optional<CertificateWitness> predictability_certificate(const State& s, const UserCommand& u,
                                          std::span<const State> reference, const Policy& policy,
                                          const NavEnv& env, const AxisPartition& partition,
                                          const UserExpectation& w);

struct MetricsSummary {
  std::size_t subgoals_reached = 0;
  std::size_t total_subgoals = 0;
  bool primary_goal_reached = false;
  int steps = 0;
  double mean_gap = 0.0;
  double max_gap = 0.0;
  int ood_step_count = 0;

  bool success() const { return primary_goal_reached && subgoals_reached == total_subgoals; }

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

}  // namespace ioda
