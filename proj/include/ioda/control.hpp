#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "ioda/nav_env.hpp"
#include "ioda/ood_detector.hpp"
#include "ioda/policy.hpp"
#include "ioda/state_index.hpp"

namespace ioda {

enum class Axis { kX, kY };

/// Disjoint split of the action axes. The robot owns exactly the axes the user does not.
class AxisPartition {
 public:
  AxisPartition() = default;
  AxisPartition(bool user_x, bool user_y) : user_x_(user_x), user_y_(user_y) {}

  static AxisPartition user_x_only() { return {true, false}; }

  bool user_owns(Axis a) const { return a == Axis::kX ? user_x_ : user_y_; }
  bool robot_owns(Axis a) const { return !user_owns(a); }

  friend bool operator==(const AxisPartition&, const AxisPartition&) = default;

 private:
  bool user_x_ = true;
  bool user_y_ = false;
};

/// "x", "y", "x,y" or "" (no user axes).
std::string to_string(const AxisPartition& p);
AxisPartition parse_axis_partition(std::string_view text);

/// Per-tick teleoperation signal. Only user-owned axes may carry a value; a
/// user-owned axis without a value means "no input" and contributes zero.
struct UserCommand {
  std::optional<double> x;
  std::optional<double> y;

  friend bool operator==(const UserCommand&, const UserCommand&) = default;
};

/// Throws Error(kInvariant) when the command touches a robot axis or exceeds a_max.
void validate(const UserCommand& u, const AxisPartition& p, double a_max);

/// Disjoint combination u o a: user axes from u, robot axes from a. No blending.
Action compose(const UserCommand& u, const Action& a, const AxisPartition& p);

/// The action actually applied on the user's axes (robot axes zero).
Action user_action(const UserCommand& u, const AxisPartition& p);

enum class LoopMode { kIoda, kBaseline };

std::string_view to_string(LoopMode mode);

struct StepDecision {
  int t = 0;
  State input_state;
  bool ood = false;
  std::optional<State> imagined_state;  // present iff ood
  Action robot_action;
  UserCommand user_command;
  Action composed_action;
  State next_state;
  double reward = 0.0;

  friend bool operator==(const StepDecision&, const StepDecision&) = default;
};

/// One tick of IODA: when s is OOD, the policy is queried at the nearest state of D
/// while the transition always starts from the real state.
StepDecision ioda_step(int t, const State& s, const UserCommand& u, const Policy& policy,
                       const OodDetector& detector, const StateIndex& index, const NavEnv& env,
                       const AxisPartition& partition);

/// The unmodified loop: the policy always sees the real state.
StepDecision baseline_step(int t, const State& s, const UserCommand& u, const Policy& policy,
                           const NavEnv& env, const AxisPartition& partition);

/// Throws unless detector and index were built over the same D with the same metric.
void check_shared_reference(const OodDetector& detector, const StateIndex& index);

/// Immutable bundle of everything a control loop needs, validated at assembly time.
/// Shareable across sessions and threads.
class ControlPipeline {
 public:
  ControlPipeline(std::shared_ptr<const NavEnv> env, std::shared_ptr<const Policy> policy,
                  std::shared_ptr<const OodDetector> detector, std::shared_ptr<const StateIndex> index,
                  AxisPartition partition);

  StepDecision step(LoopMode mode, int t, const State& s, const UserCommand& u) const;

  const NavEnv& env() const { return *env_; }
  const Policy& policy() const { return *policy_; }
  const OodDetector& detector() const { return *detector_; }
  const StateIndex& index() const { return *index_; }
  const AxisPartition& partition() const { return partition_; }

  std::shared_ptr<const StateIndex> shared_index() const { return index_; }

 private:
  std::shared_ptr<const NavEnv> env_;
  std::shared_ptr<const Policy> policy_;
  std::shared_ptr<const OodDetector> detector_;
  std::shared_ptr<const StateIndex> index_;
  AxisPartition partition_;
};

}  // namespace ioda
