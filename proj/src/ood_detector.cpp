#include "ioda/ood_detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ioda/error.hpp"

namespace ioda {

DistanceThresholdDetector::DistanceThresholdDetector(std::shared_ptr<const StateIndex> index,
                                                     double epsilon, Calibration calibration)
    : index_(std::move(index)), epsilon_(epsilon), calibration_(calibration) {
  if (!index_) throw Error(ErrorCategory::kInvariant, "detector: null reference index");
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
    throw Error(ErrorCategory::kConfig, "detector: epsilon must be positive and finite");
  }
}

std::vector<double> leave_one_out_distances(const StateIndex& index) {
  std::vector<double> out;
  out.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    out.push_back(index.nearest_excluding(index.points()[i], i).value().dist);
  }
  return out;
}

double order_statistic_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCategory::kInvariant, "quantile of empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCategory::kConfig, "quantile must lie in (0, 1]");
  const double n = static_cast<double>(values.size());
  // The small slack keeps e.g. 0.99 * 1000 from rounding up to rank 991.
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  const auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

DistanceThresholdDetector DistanceThresholdDetector::calibrate(
    std::shared_ptr<const StateIndex> index, double quantile) {
  if (!index || index->size() < 2) {
    throw Error(ErrorCategory::kInvariant, "calibrate: need at least 2 reference states");
  }
  const double eps = order_statistic_quantile(leave_one_out_distances(*index), quantile);
  return {std::move(index), std::max(eps, kMinEpsilon), Calibration{quantile, true}};
}

DistanceThresholdDetector DistanceThresholdDetector::calibrate(std::vector<State> states,
                                                               StateMetric metric, double quantile) {
  if (states.size() < 2) {
    throw Error(ErrorCategory::kInvariant, "calibrate: need at least 2 reference states");
  }
  return calibrate(std::make_shared<const StateIndex>(std::move(states), metric), quantile);
}

double DistanceThresholdDetector::distance_to_reference(const State& s) const {
  return index_->nearest(s).dist;
}

bool DistanceThresholdDetector::is_ood(const State& s) const {
  return distance_to_reference(s) > epsilon_;
}

}  // namespace ioda
