#include "ioda/nav_env.hpp"

#include <algorithm>
#include <cmath>

#include "ioda/error.hpp"

namespace ioda {

double norm2(Vec2 v) { return std::hypot(v.x, v.y); }

bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

bool is_finite(const State& s) { return is_finite(s.agent) && is_finite(s.goal); }

bool is_finite(const Action& a) { return std::isfinite(a.dx) && std::isfinite(a.dy); }

bool in_workspace(Vec2 p, const WorkspaceSpec& w) {
  return p.x >= w.min.x && p.x <= w.max.x && p.y >= w.min.y && p.y <= w.max.y;
}

Vec2 nearest_workspace_point(Vec2 p, const WorkspaceSpec& w) {
  return {std::clamp(p.x, w.min.x, w.max.x), std::clamp(p.y, w.min.y, w.max.y)};
}

std::string_view to_string(EnvVariant v) {
  switch (v) {
    case EnvVariant::kUnconstrained: return "unconstrained";
    case EnvVariant::kLeavePenalty: return "leave_penalty";
    case EnvVariant::kFreezeYOutside: return "freeze_y_outside";
  }
  return "unknown";
}

EnvVariant parse_env_variant(std::string_view name) {
  if (name == "unconstrained") return EnvVariant::kUnconstrained;
  if (name == "leave_penalty") return EnvVariant::kLeavePenalty;
  if (name == "freeze_y_outside") return EnvVariant::kFreezeYOutside;
  throw Error(ErrorCategory::kConfig, "unknown env variant '" + std::string(name) + "'");
}

NavEnv::NavEnv(EnvConfig config) : config_(config) {
  const auto& w = config_.workspace;
  if (!(w.min.x < w.max.x && w.min.y < w.max.y)) {
    throw Error(ErrorCategory::kConfig, "workspace min must be < max componentwise");
  }
  if (!(w.world_min.x < w.min.x && w.world_min.y < w.min.y && w.max.x < w.world_max.x &&
        w.max.y < w.world_max.y)) {
    throw Error(ErrorCategory::kConfig, "workspace must lie strictly inside the world");
  }
  if (!(config_.a_max > 0.0) || config_.episode_cap < 1 || !(config_.goal_tolerance > 0.0)) {
    throw Error(ErrorCategory::kConfig, "a_max, episode_cap and goal_tolerance must be positive");
  }
  if (config_.c_leave < 0.0 || config_.c_ymove < 0.0) {
    throw Error(ErrorCategory::kConfig, "penalty constants must be non-negative");
  }
}

State NavEnv::step(const State& s, const Action& a) const {
  if (!is_finite(s) || !is_finite(a)) {
    throw Error(ErrorCategory::kInvariant, "step: non-finite state or action");
  }
  if (std::abs(a.dx) > config_.a_max || std::abs(a.dy) > config_.a_max) {
    throw Error(ErrorCategory::kInvariant, "step: action exceeds a_max");
  }
  const auto& w = config_.workspace;
  State next = s;
  next.agent.x = std::clamp(s.agent.x + a.dx, w.world_min.x, w.world_max.x);
  next.agent.y = std::clamp(s.agent.y + a.dy, w.world_min.y, w.world_max.y);
  return next;
}

double NavEnv::reward(const State& s, const Action& a) const {
  if (!is_finite(s) || !is_finite(a)) {
    throw Error(ErrorCategory::kInvariant, "reward: non-finite state or action");
  }
  double r = -goal_distance(s);
  if (in_workspace(s.agent)) return r;
  switch (config_.variant) {
    case EnvVariant::kUnconstrained:
      break;
    case EnvVariant::kLeavePenalty:
      r -= config_.c_leave;
      break;
    case EnvVariant::kFreezeYOutside:
      r -= config_.c_leave + config_.c_ymove * std::abs(a.dy);
      break;
  }
  return r;
}

bool NavEnv::at_goal(const State& s) const { return goal_distance(s) <= config_.goal_tolerance; }

Action NavEnv::clamp_action(Action a) const {
  return {std::clamp(a.dx, -config_.a_max, config_.a_max),
          std::clamp(a.dy, -config_.a_max, config_.a_max)};
}

}  // namespace ioda
