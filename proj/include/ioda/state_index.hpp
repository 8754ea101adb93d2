#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "ioda/nav_env.hpp"
#include "ioda/state_metric.hpp"

namespace ioda {

struct NearestResult {
  State state;
  double dist = 0.0;
  std::size_t pos = 0;  // canonical position in the indexed list

  friend bool operator==(const NearestResult&, const NearestResult&) = default;
};

/// Exact nearest-neighbour search over a fixed list of states (k-d tree with
/// bounding-box lower bounds, valid for weighted L1 and L2).
///
/// Ties are broken by the smallest canonical position, so results equal a linear
/// scan in list order that keeps the first minimizer.
class StateIndex {
 public:
  StateIndex(std::vector<State> points, StateMetric metric);

  NearestResult nearest(const State& query) const;

  /// Nearest among all points except canonical position `excluded`.
  /// Empty when the index holds a single point.
  std::optional<NearestResult> nearest_excluding(const State& query, std::size_t excluded) const;

  std::size_t size() const { return points_.size(); }
  const std::vector<State>& points() const { return points_; }
  const StateMetric& metric() const { return metric_; }

  static constexpr std::size_t kLeafSize = 8;

 private:
  using Coords = std::array<double, 4>;

  struct Node {
    Coords lo;
    Coords hi;
    std::size_t begin = 0;
    std::size_t end = 0;
    int left = -1;
    int right = -1;
  };

  struct Best {
    double dist;
    std::size_t pos;
  };

  int build(std::size_t begin, std::size_t end);
  double lower_bound(const Node& node, const Coords& q) const;
  void search(int node, const Coords& q, std::size_t excluded, Best& best) const;

  std::vector<State> points_;
  std::vector<Coords> coords_;
  std::vector<std::size_t> order_;  // tree leaf order -> canonical position
  std::vector<Node> nodes_;
  StateMetric metric_;
};

}  // namespace ioda
