#ifndef TOOTHSPARSE_KDTREE_HPP
#define TOOTHSPARSE_KDTREE_HPP

#include <cstddef>
#include <vector>

#include "toothsparse/geometry.hpp"

namespace toothsparse {

struct NeighborHit {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Static k-d tree over a point cloud. Read-only after construction, safe to
/// query concurrently. Distance ties resolve to the smallest point index.
class NeighborIndex {
 public:
  /// Throws std::invalid_argument on an empty or non-finite cloud.
  explicit NeighborIndex(PointCloud cloud);

  NeighborHit nearest(const Point3& query) const;

  const PointCloud& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t point = 0;  // index into points_
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t begin, std::size_t end);
  void search(int node, const Point3& query, double& best_sq,
              std::size_t& best_idx) const;

  PointCloud points_;
  std::vector<std::size_t> order_;  // scratch during build
  std::vector<Node> nodes_;
  int root_ = -1;
};

inline NeighborIndex nn_index(PointCloud cloud) { return NeighborIndex(std::move(cloud)); }

inline NeighborHit nn_query(const NeighborIndex& index, const Point3& p) {
  return index.nearest(p);
}

}  // namespace toothsparse

#endif  // TOOTHSPARSE_KDTREE_HPP
