#include "ioda/sim_user.hpp"

#include <algorithm>
#include <limits>

#include "ioda/error.hpp"

namespace ioda {

Vec2 PlanProgress::target(const SubgoalPlan& plan) const {
  return next_subgoal_ < plan.subgoals.size() ? plan.subgoals[next_subgoal_] : plan.primary_goal;
}

bool PlanProgress::update(const SubgoalPlan& plan, Vec2 agent) {
  if (primary_reached_) return false;
  if (norm2(agent - target(plan)) > plan.reach_radius) return false;
  if (next_subgoal_ < plan.subgoals.size()) {
    ++next_subgoal_;
  } else {
    primary_reached_ = true;
  }
  return true;
}

UserCommand sim_user_command(const State& s, const SubgoalPlan& plan, const PlanProgress& progress,
                             double gain, double a_max) {
  const Vec2 target = progress.target(plan);
  UserCommand u;
  u.x = std::clamp(gain * (target.x - s.agent.x), -a_max, a_max);
  return u;
}

ProjectionExpectation::ProjectionExpectation(std::shared_ptr<const StateIndex> reference,
                                             std::shared_ptr<const OodDetector> familiarity)
    : reference_(std::move(reference)), familiarity_(std::move(familiarity)) {
  if (!reference_) throw Error(ErrorCategory::kInvariant, "expectation model: null reference");
  if (familiarity_) check_shared_reference(*familiarity_, *reference_);
}

State ProjectionExpectation::expected_next(const State& s, const UserCommand& u, const Policy& policy,
                                           const NavEnv& env, const AxisPartition& partition) const {
  const bool familiar = familiarity_ && !familiarity_->is_ood(s);
  const State& queried = familiar ? s : reference_->nearest(s).state;
  return env.step(s, compose(u, policy.act(queried), partition));
}

double predictability_gap(const UserExpectation& w, const StepDecision& decision, const Policy& policy,
                          const NavEnv& env, const AxisPartition& partition) {
  const State predicted = w.expected_next(decision.input_state, decision.user_command, policy, env, partition);
  return w.metric()(predicted, decision.next_state);
}

std::optional<CertificateWitness> predictability_certificate(const State& s, const UserCommand& u,
                                          std::span<const State> reference, const Policy& policy,
                                          const NavEnv& env, const AxisPartition& partition,
                                          const UserExpectation& w) {
  if (reference.empty()) return std::nullopt;
  const auto& d = w.metric();
  const State predicted = w.expected_next(s, u, policy, env, partition);
  const double lhs = d(predicted, env.step(s, compose(u, policy.act(s), partition)));

  CertificateWitness best{reference.front(), 0, lhs, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const State next = env.step(s, compose(u, policy.act(reference[i]), partition));
    const double rhs = d(predicted, next);
    if (rhs < best.rhs) {
      best.state = reference[i];
      best.pos = i;
      best.rhs = rhs;
      if (rhs == 0.0) break;  // no later state can beat zero under the tie rule
    }
  }
  if (lhs >= best.rhs) return best;
  return std::nullopt;
}

}  // namespace ioda
