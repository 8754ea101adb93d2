#include "ioda/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ioda/error.hpp"
#include "ioda/rng.hpp"

namespace ioda {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kProportionalOptimal: return "proportional_optimal";
    case PolicyKind::kVariantBSporadic: return "variant_b_sporadic";
    case PolicyKind::kVariantCFreeze: return "variant_c_freeze";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "proportional_optimal") return PolicyKind::kProportionalOptimal;
  if (name == "variant_b_sporadic") return PolicyKind::kVariantBSporadic;
  if (name == "variant_c_freeze") return PolicyKind::kVariantCFreeze;
  throw Error(ErrorCategory::kConfig, "unknown policy kind '" + std::string(name) + "'");
}

PolicyKind default_policy_for(EnvVariant variant) {
  switch (variant) {
    case EnvVariant::kUnconstrained: return PolicyKind::kProportionalOptimal;
    case EnvVariant::kLeavePenalty: return PolicyKind::kVariantBSporadic;
    case EnvVariant::kFreezeYOutside: return PolicyKind::kVariantCFreeze;
  }
  return PolicyKind::kProportionalOptimal;
}

SurrogatePolicy::SurrogatePolicy(PolicySpec spec, const NavEnv& env)
    : spec_(spec), env_(env.config()) {
  if (!(spec_.gain > 0.0) || !std::isfinite(spec_.gain)) {
    throw Error(ErrorCategory::kConfig, "policy gain must be positive");
  }
}

Action SurrogatePolicy::act(const State& s) const {
  if (!is_finite(s)) throw Error(ErrorCategory::kInvariant, "act: non-finite state");
  if (in_workspace(s.agent, env_.workspace)) return proportional(s);
  switch (spec_.kind) {
    case PolicyKind::kProportionalOptimal: return proportional(s);
    case PolicyKind::kVariantBSporadic: return sporadic(s);
    case PolicyKind::kVariantCFreeze: return freeze_y(s);
  }
  return proportional(s);
}

Action SurrogatePolicy::proportional(const State& s) const {
  const double lim = env_.a_max;
  return {std::clamp(spec_.gain * (s.goal.x - s.agent.x), -lim, lim),
          std::clamp(spec_.gain * (s.goal.y - s.agent.y), -lim, lim)};
}

Action SurrogatePolicy::sporadic(const State& s) const {
  std::uint64_t h = splitmix64(spec_.noise_seed);
  for (double c : s.coords()) {
    const auto cell = static_cast<std::int64_t>(std::llround(c / kHashGrid));
    h = hash_combine(h, static_cast<std::uint64_t>(cell));
  }
  const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
  const double lim = env_.a_max;
  return {std::clamp(lim * std::cos(angle), -lim, lim), std::clamp(lim * std::sin(angle), -lim, lim)};
}

Action SurrogatePolicy::freeze_y(const State& s) const {
  const Vec2 target = nearest_workspace_point(s.agent, env_.workspace);
  return {std::clamp(target.x - s.agent.x, -env_.a_max, env_.a_max), 0.0};
}

Action act(const PolicySpec& spec, const NavEnv& env, const State& s) {
  return SurrogatePolicy(spec, env).act(s);
}

bool is_policy_optimal_rollout(const Policy& policy, const NavEnv& env, const State& s0) {
  if (!is_finite(s0) || !env.in_workspace(s0.agent) || !env.in_workspace(s0.goal)) return false;
  State s = s0;
  for (int t = 0; t < env.config().episode_cap; ++t) {
    if (env.at_goal(s)) return true;
    s = env.step(s, policy.act(s));
    if (!env.in_workspace(s.agent)) return false;
  }
  return env.at_goal(s);
}

}  // namespace ioda
