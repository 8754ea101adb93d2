#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ioda/nav_env.hpp"
#include "ioda/policy.hpp"

namespace ioda {

struct StepRecord {
  int rollout_id = 0;
  int t = 0;
  State state;
  Action action;
  double reward = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RolloutMeta {
  PolicySpec policy;
  EnvVariant variant = EnvVariant::kUnconstrained;
  std::uint64_t seed = 0;
  int version = 1;

  friend bool operator==(const RolloutMeta&, const RolloutMeta&) = default;
};

/// The observation history D: records ordered by (rollout_id, t), ids dense
/// from 0, every state in the workspace, every rollout ending at its goal.
struct RolloutSet {
  RolloutMeta meta;
  std::vector<StepRecord> records;

  std::size_t rollout_count() const {
    return records.empty() ? 0 : static_cast<std::size_t>(records.back().rollout_id) + 1;
  }

  friend bool operator==(const RolloutSet&, const RolloutSet&) = default;
};

struct CollectOptions {
  int n_rollouts = 1000;
  std::uint64_t seed = 0;
  double min_separation = 0.1;
};

/// Runs one rollout from s0 and appends its records. Throws if the rollout
/// leaves the workspace or misses the goal within the episode cap.
void record_rollout(const Policy& policy, const NavEnv& env, const State& s0, int rollout_id,
                    std::vector<StepRecord>& out);

/// Collects n rollouts from seeded uniform (start, goal) pairs in the workspace.
RolloutSet collect(const Policy& policy, const PolicySpec& spec, const NavEnv& env,
                   const CollectOptions& options);

/// Throws Error(kInvariant) describing the first violated invariant.
void validate(const RolloutSet& set, const NavEnv& env);

/// Canonical (rollout_id, t) ordered state list: the projection tie-break order.
std::vector<State> all_states(const RolloutSet& set);

void write_rollouts(const RolloutSet& set, std::ostream& out);
RolloutSet read_rollouts(std::istream& in, const NavEnv& env);

void save(const RolloutSet& set, const std::filesystem::path& path);
RolloutSet load(const std::filesystem::path& path, const NavEnv& env);

}  // namespace ioda
