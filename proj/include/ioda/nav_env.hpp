#pragma once

#include <array>
#include <string>
#include <string_view>

namespace ioda {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

double norm2(Vec2 v);
bool is_finite(Vec2 v);

/// Agent position plus goal position. Every component exchanges this 4-vector.
struct State {
  Vec2 agent;
  Vec2 goal;

  std::array<double, 4> coords() const { return {agent.x, agent.y, goal.x, goal.y}; }
  static State from_coords(const std::array<double, 4>& c) {
    return {{c[0], c[1]}, {c[2], c[3]}};
  }

  friend bool operator==(const State&, const State&) = default;
};

bool is_finite(const State& s);

struct Action {
  double dx = 0.0;
  double dy = 0.0;

  friend bool operator==(const Action&, const Action&) = default;
};

bool is_finite(const Action& a);

struct WorkspaceSpec {
  Vec2 min{0.0, 0.0};
  Vec2 max{1.0, 1.0};
  Vec2 world_min{-0.5, -0.5};
  Vec2 world_max{1.5, 1.5};

  friend bool operator==(const WorkspaceSpec&, const WorkspaceSpec&) = default;
};

/// Closed rectangle test: points on the workspace edge count as inside.
bool in_workspace(Vec2 p, const WorkspaceSpec& w);

/// Nearest point of the (closed) workspace rectangle.
Vec2 nearest_workspace_point(Vec2 p, const WorkspaceSpec& w);

enum class EnvVariant { kUnconstrained, kLeavePenalty, kFreezeYOutside };

std::string_view to_string(EnvVariant v);
EnvVariant parse_env_variant(std::string_view name);

struct EnvConfig {
  EnvVariant variant = EnvVariant::kUnconstrained;
  WorkspaceSpec workspace;
  double a_max = 0.05;
  int episode_cap = 400;
  double goal_tolerance = 0.02;
  double c_leave = 1.0;
  double c_ymove = 10.0;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

/// Point-mass 2D goal navigation. Immutable; all members are pure.
class NavEnv {
 public:
  explicit NavEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const WorkspaceSpec& workspace() const { return config_.workspace; }
  double a_max() const { return config_.a_max; }

  /// Additive kinematics clamped to the world rectangle; the goal is carried through.
  State step(const State& s, const Action& a) const;

  /// Negative Euclidean goal distance minus the variant's out-of-workspace penalties,
  /// evaluated at the pre-step agent position.
  double reward(const State& s, const Action& a) const;

  bool in_workspace(Vec2 p) const { return ioda::in_workspace(p, config_.workspace); }
  bool at_goal(const State& s) const;
  double goal_distance(const State& s) const { return norm2(s.goal - s.agent); }

  Action clamp_action(Action a) const;

 private:
  EnvConfig config_;
};

}  // namespace ioda
