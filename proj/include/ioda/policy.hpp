#pragma once

#include <cstdint>
#include <memory>
#include <string_view>

#include "ioda/nav_env.hpp"

namespace ioda {

enum class PolicyKind { kProportionalOptimal, kVariantBSporadic, kVariantCFreeze };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

/// The surrogate that stands in for the trained agent of a given environment variant.
PolicyKind default_policy_for(EnvVariant variant);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kProportionalOptimal;
  double gain = 1.0;
  std::uint64_t noise_seed = 0;  // only read by kVariantBSporadic

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// A goal-conditioned policy pi: S -> A. Implementations must be pure.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const State& s) const = 0;
};

/// Analytic reference policies. All kinds coincide while the agent is inside the
/// workspace and differ only outside it:
///  - proportional: keeps steering toward the goal;
///  - variant B: hashed pseudo-random direction at full speed;
///  - variant C: holds y and returns toward the workspace in x.
class SurrogatePolicy final : public Policy {
 public:
  SurrogatePolicy(PolicySpec spec, const NavEnv& env);

  Action act(const State& s) const override;
  const PolicySpec& spec() const { return spec_; }

  /// Grid used to quantize states before hashing (variant B).
  static constexpr double kHashGrid = 0.01;

 private:
  Action proportional(const State& s) const;
  Action sporadic(const State& s) const;
  Action freeze_y(const State& s) const;

  PolicySpec spec_;
  EnvConfig env_;
};

Action act(const PolicySpec& spec, const NavEnv& env, const State& s);

/// True iff running the policy from s0 reaches the goal tolerance within the
/// episode cap while never leaving the workspace.
bool is_policy_optimal_rollout(const Policy& policy, const NavEnv& env, const State& s0);

}  // namespace ioda
