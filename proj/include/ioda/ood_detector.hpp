#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ioda/state_index.hpp"

namespace ioda {

/// Decides whether a state lies outside the observation history D.
/// Implementations are immutable once built and report the data they were fit on,
/// so a control pipeline can verify it shares D with its projection index.
class OodDetector {
 public:
  virtual ~OodDetector() = default;
  virtual bool is_ood(const State& s) const = 0;
  virtual std::span<const State> reference_states() const = 0;
  virtual const StateMetric& metric() const = 0;
};

struct Calibration {
  double quantile = 0.99;
  bool leave_one_out = true;
};

/// Nearest-neighbour distance thresholding: OOD iff the distance to the closest
/// reference state exceeds epsilon. Distance exactly epsilon is in-distribution.
class DistanceThresholdDetector final : public OodDetector {
 public:
  static constexpr double kMinEpsilon = 1e-6;

  DistanceThresholdDetector(std::shared_ptr<const StateIndex> index, double epsilon,
                            Calibration calibration = {});

  /// epsilon = q-quantile of leave-one-out nearest-neighbour distances, floored at kMinEpsilon.
  static DistanceThresholdDetector calibrate(std::shared_ptr<const StateIndex> index, double quantile);
  static DistanceThresholdDetector calibrate(std::vector<State> states, StateMetric metric,
                                             double quantile);

  bool is_ood(const State& s) const override;
  std::span<const State> reference_states() const override { return index_->points(); }
  const StateMetric& metric() const override { return index_->metric(); }

  double distance_to_reference(const State& s) const;
  double epsilon() const { return epsilon_; }
  const Calibration& calibration() const { return calibration_; }
  const std::shared_ptr<const StateIndex>& index() const { return index_; }

 private:
  std::shared_ptr<const StateIndex> index_;
  double epsilon_;
  Calibration calibration_;
};

/// Distance from each indexed state to its nearest other indexed state, in canonical order.
std::vector<double> leave_one_out_distances(const StateIndex& index);

/// The ceil(q * n)-th smallest value (1-based) of `values`; q in (0, 1].
double order_statistic_quantile(std::vector<double> values, double q);

}  // namespace ioda
