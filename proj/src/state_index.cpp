#include "ioda/state_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ioda/error.hpp"

namespace ioda {

namespace {
constexpr std::size_t kNoExclusion = std::numeric_limits<std::size_t>::max();
}

StateIndex::StateIndex(std::vector<State> points, StateMetric metric)
    : points_(std::move(points)), metric_(metric) {
  if (points_.empty()) throw Error(ErrorCategory::kInvariant, "StateIndex: empty point set");
  coords_.reserve(points_.size());
  for (const auto& s : points_) {
    if (!is_finite(s)) throw Error(ErrorCategory::kInvariant, "StateIndex: non-finite state");
    coords_.push_back(s.coords());
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  build(0, points_.size());
}

int StateIndex::build(std::size_t begin, std::size_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo.fill(std::numeric_limits<double>::infinity());
  node.hi.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t i = begin; i < end; ++i) {
    const auto& c = coords_[order_[i]];
    for (std::size_t d = 0; d < 4; ++d) {
      node.lo[d] = std::min(node.lo[d], c[d]);
      node.hi[d] = std::max(node.hi[d], c[d]);
    }
  }

  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  std::size_t dim = 0;
  for (std::size_t d = 1; d < 4; ++d) {
    if (node.hi[d] - node.lo[d] > node.hi[dim] - node.lo[dim]) dim = d;
  }
  if (node.hi[dim] == node.lo[dim]) return id;  // all points identical

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double ca = coords_[a][dim];
                     const double cb = coords_[b][dim];
                     return ca < cb || (ca == cb && a < b);
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double StateIndex::lower_bound(const Node& node, const Coords& q) const {
  Coords gaps{};
  for (std::size_t d = 0; d < 4; ++d) {
    if (q[d] < node.lo[d]) {
      gaps[d] = node.lo[d] - q[d];
    } else if (q[d] > node.hi[d]) {
      gaps[d] = q[d] - node.hi[d];
    }
  }
  return metric_.from_gaps(gaps);
}

void StateIndex::search(int id, const Coords& q, std::size_t excluded, Best& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.left < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t pos = order_[i];
      if (pos == excluded) continue;
      const double d = metric_.distance(q, coords_[pos]);
      if (d < best.dist || (d == best.dist && pos < best.pos)) best = {d, pos};
    }
    return;
  }
  const Node& l = nodes_[static_cast<std::size_t>(node.left)];
  const Node& r = nodes_[static_cast<std::size_t>(node.right)];
  const double bl = lower_bound(l, q);
  const double br = lower_bound(r, q);
  // Equal bounds are still explored: a tie may carry a smaller canonical position.
  if (bl <= br) {
    if (bl <= best.dist) search(node.left, q, excluded, best);
    if (br <= best.dist) search(node.right, q, excluded, best);
  } else {
    if (br <= best.dist) search(node.right, q, excluded, best);
    if (bl <= best.dist) search(node.left, q, excluded, best);
  }
}

NearestResult StateIndex::nearest(const State& query) const {
  if (!is_finite(query)) throw Error(ErrorCategory::kInvariant, "nearest: non-finite query");
  Best best{std::numeric_limits<double>::infinity(), kNoExclusion};
  search(0, query.coords(), kNoExclusion, best);
  return {points_[best.pos], best.dist, best.pos};
}

std::optional<NearestResult> StateIndex::nearest_excluding(const State& query,
                                                           std::size_t excluded) const {
  if (!is_finite(query)) throw Error(ErrorCategory::kInvariant, "nearest: non-finite query");
  if (points_.size() < 2) return std::nullopt;
  Best best{std::numeric_limits<double>::infinity(), kNoExclusion};
  search(0, query.coords(), excluded, best);
  return NearestResult{points_[best.pos], best.dist, best.pos};
}

}  // namespace ioda
