#pragma once

#include <array>
#include <string_view>

#include "ioda/nav_env.hpp"

namespace ioda {

enum class MetricKind { kL1, kL2 };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

/// Distance between full 4-D states (agent and goal), optionally axis-weighted.
struct StateMetric {
  MetricKind kind = MetricKind::kL1;
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};

  double operator()(const State& a, const State& b) const { return distance(a.coords(), b.coords()); }
  double distance(const std::array<double, 4>& a, const std::array<double, 4>& b) const;

  /// Combines per-axis absolute gaps the same way distance() combines coordinate
  /// differences, so a gap vector dominated by the true differences never
  /// overestimates the distance.
  double from_gaps(const std::array<double, 4>& gaps) const;

  friend bool operator==(const StateMetric&, const StateMetric&) = default;
};

}  // namespace ioda
