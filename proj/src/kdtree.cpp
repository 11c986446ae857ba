#include "toothsparse/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace toothsparse {

NeighborIndex::NeighborIndex(PointCloud cloud) : points_(std::move(cloud)) {
  require_valid_cloud(points_, "NeighborIndex");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(0, points_.size());
  order_.clear();
  order_.shrink_to_fit();
}

int NeighborIndex::build(std::size_t begin, std::size_t end) {
  if (begin >= end) return -1;

  // Split along the axis with the widest extent over this span.
  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::size_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t l, std::size_t r) {
                     const double cl = points_[l](axis);
                     const double cr = points_[r](axis);
                     if (cl != cr) return cl < cr;
                     return l < r;  // total order keeps the tree deterministic
                   });

  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{order_[mid], axis, -1, -1});
  const int left = build(begin, mid);
  const int right = build(mid + 1, end);
  nodes_[static_cast<std::size_t>(self)].left = left;
  nodes_[static_cast<std::size_t>(self)].right = right;
  return self;
}

void NeighborIndex::search(int node, const Point3& query, double& best_sq,
                           std::size_t& best_idx) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const Point3& p = points_[n.point];

  const double d_sq = (p - query).squaredNorm();
  if (d_sq < best_sq || (d_sq == best_sq && n.point < best_idx)) {
    best_sq = d_sq;
    best_idx = n.point;
  }

  const double diff = query(n.axis) - p(n.axis);
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;

  search(near, query, best_sq, best_idx);
  // <= keeps equal-distance candidates reachable so the smallest-index tie
  // rule holds globally.
  if (diff * diff <= best_sq) search(far, query, best_sq, best_idx);
}

NeighborHit NeighborIndex::nearest(const Point3& query) const {
  double best_sq = std::numeric_limits<double>::infinity();
  std::size_t best_idx = points_.size();
  search(root_, query, best_sq, best_idx);
  return NeighborHit{best_idx, std::sqrt(best_sq)};
}

}  // namespace toothsparse
