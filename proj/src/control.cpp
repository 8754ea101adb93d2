#include "ioda/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ioda/error.hpp"

namespace ioda {

std::string to_string(const AxisPartition& p) {
  std::string out;
  if (p.user_owns(Axis::kX)) out += "x";
  if (p.user_owns(Axis::kY)) out += out.empty() ? "y" : ",y";
  return out;
}

AxisPartition parse_axis_partition(std::string_view text) {
  bool x = false;
  bool y = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    std::string_view tok = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok == "x" && !x) {
      x = true;
    } else if (tok == "y" && !y) {
      y = true;
    } else if (!tok.empty() || comma != std::string_view::npos) {
      throw Error(ErrorCategory::kConfig, "bad axis list '" + std::string(text) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return {x, y};
}

void validate(const UserCommand& u, const AxisPartition& p, double a_max) {
  const auto check = [&](const std::optional<double>& v, Axis axis, const char* name) {
    if (!v) return;
    if (!p.user_owns(axis)) {
      throw Error(ErrorCategory::kInvariant, std::string("user command on robot-owned axis ") + name);
    }
    if (!std::isfinite(*v) || std::abs(*v) > a_max) {
      throw Error(ErrorCategory::kInvariant, std::string("user command on ") + name + " exceeds a_max");
    }
  };
  check(u.x, Axis::kX, "x");
  check(u.y, Axis::kY, "y");
}

Action compose(const UserCommand& u, const Action& a, const AxisPartition& p) {
  return {p.user_owns(Axis::kX) ? u.x.value_or(0.0) : a.dx,
          p.user_owns(Axis::kY) ? u.y.value_or(0.0) : a.dy};
}

Action user_action(const UserCommand& u, const AxisPartition& p) {
  return {p.user_owns(Axis::kX) ? u.x.value_or(0.0) : 0.0,
          p.user_owns(Axis::kY) ? u.y.value_or(0.0) : 0.0};
}

std::string_view to_string(LoopMode mode) { return mode == LoopMode::kIoda ? "ioda" : "baseline"; }

namespace {

StepDecision finish(StepDecision d, const NavEnv& env, const AxisPartition& p) {
  validate(d.user_command, p, env.a_max());
  d.composed_action = compose(d.user_command, d.robot_action, p);
  d.next_state = env.step(d.input_state, d.composed_action);
  d.reward = env.reward(d.input_state, d.composed_action);
  return d;
}

}  // namespace

StepDecision ioda_step(int t, const State& s, const UserCommand& u, const Policy& policy,
                       const OodDetector& detector, const StateIndex& index, const NavEnv& env,
                       const AxisPartition& partition) {
  StepDecision d;
  d.t = t;
  d.input_state = s;
  d.user_command = u;
  d.ood = detector.is_ood(s);
  if (d.ood) {
    d.imagined_state = index.nearest(s).state;
    d.robot_action = policy.act(*d.imagined_state);
  } else {
    d.robot_action = policy.act(s);
  }
  return finish(d, env, partition);
}

StepDecision baseline_step(int t, const State& s, const UserCommand& u, const Policy& policy,
                           const NavEnv& env, const AxisPartition& partition) {
  StepDecision d;
  d.t = t;
  d.input_state = s;
  d.user_command = u;
  d.robot_action = policy.act(s);
  return finish(d, env, partition);
}

void check_shared_reference(const OodDetector& detector, const StateIndex& index) {
  if (!(detector.metric() == index.metric())) {
    throw Error(ErrorCategory::kInvariant, "detector and projection index use different metrics");
  }
  const auto refs = detector.reference_states();
  const auto& pts = index.points();
  if (refs.data() == pts.data() && refs.size() == pts.size()) return;
  if (refs.size() != pts.size() || !std::equal(refs.begin(), refs.end(), pts.begin())) {
    throw Error(ErrorCategory::kInvariant, "detector and projection index were built over different D");
  }
}

ControlPipeline::ControlPipeline(std::shared_ptr<const NavEnv> env, std::shared_ptr<const Policy> policy,
                                 std::shared_ptr<const OodDetector> detector,
                                 std::shared_ptr<const StateIndex> index, AxisPartition partition)
    : env_(std::move(env)),
      policy_(std::move(policy)),
      detector_(std::move(detector)),
      index_(std::move(index)),
      partition_(partition) {
  if (!env_ || !policy_ || !detector_ || !index_) {
    throw Error(ErrorCategory::kInvariant, "control pipeline: missing component");
  }
  check_shared_reference(*detector_, *index_);
}

StepDecision ControlPipeline::step(LoopMode mode, int t, const State& s, const UserCommand& u) const {
  if (mode == LoopMode::kIoda) {
    return ioda_step(t, s, u, *policy_, *detector_, *index_, *env_, partition_);
  }
  return baseline_step(t, s, u, *policy_, *env_, partition_);
}

}  // namespace ioda
