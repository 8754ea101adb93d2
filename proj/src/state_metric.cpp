#include "ioda/state_metric.hpp"

#include <cmath>
#include <string>

#include "ioda/error.hpp"

namespace ioda {

std::string_view to_string(MetricKind kind) { return kind == MetricKind::kL1 ? "l1" : "l2"; }

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "l1" || name == "L1") return MetricKind::kL1;
  if (name == "l2" || name == "L2") return MetricKind::kL2;
  throw Error(ErrorCategory::kConfig, "unknown metric '" + std::string(name) + "'");
}

double StateMetric::distance(const std::array<double, 4>& a, const std::array<double, 4>& b) const {
  std::array<double, 4> gaps{};
  for (std::size_t i = 0; i < 4; ++i) gaps[i] = std::abs(a[i] - b[i]);
  return from_gaps(gaps);
}

double StateMetric::from_gaps(const std::array<double, 4>& gaps) const {
  double acc = 0.0;
  if (kind == MetricKind::kL1) {
    for (std::size_t i = 0; i < 4; ++i) acc += weights[i] * gaps[i];
    return acc;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double g = weights[i] * gaps[i];
    acc += g * g;
  }
  return std::sqrt(acc);
}

}  // namespace ioda
