#include "toothsparse/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "toothsparse/errors.hpp"
#include "toothsparse/kdtree.hpp"

namespace toothsparse {

bool cloud_is_finite(const PointCloud& cloud) {
  for (const Point3& p : cloud) {
    if (!p.allFinite()) return false;
  }
  return true;
}

void require_valid_cloud(const PointCloud& cloud, const char* what) {
  if (cloud.empty()) {
    throw std::invalid_argument(std::string(what) + ": point cloud is empty");
  }
  if (!cloud_is_finite(cloud)) {
    throw std::invalid_argument(std::string(what) + ": point cloud has non-finite coordinates");
  }
}

Point3 centroid(const PointCloud& cloud) {
  require_valid_cloud(cloud, "centroid");
  Point3 sum = Point3::Zero();
  for (const Point3& p : cloud) sum += p;
  return sum / static_cast<double>(cloud.size());
}

double cloud_diameter(const PointCloud& cloud) {
  require_valid_cloud(cloud, "cloud_diameter");
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      best = std::max(best, (cloud[i] - cloud[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

bool RigidTransform::is_proper_rotation(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
  RigidTransform out;
  out.rotation = outer.rotation * inner.rotation;
  out.translation = outer.rotation * inner.translation + outer.translation;
  return out;
}

RigidTransform inverse(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  out.reserve(cloud.size());
  for (const Point3& p : cloud) out.push_back(t(p));
  return out;
}

RigidTransform procrustes_rigid(const PointCloud& source, const PointCloud& target) {
  if (source.size() != target.size()) {
    throw std::invalid_argument("procrustes_rigid: source and target cardinality differ (" +
                                std::to_string(source.size()) + " vs " +
                                std::to_string(target.size()) + ")");
  }
  if (source.size() < 3) {
    throw std::invalid_argument("procrustes_rigid: needs at least 3 point pairs");
  }
  require_valid_cloud(source, "procrustes_rigid source");
  require_valid_cloud(target, "procrustes_rigid target");

  const Point3 cs = centroid(source);
  const Point3 ct = centroid(target);

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < source.size(); ++k) {
    h += (source[k] - cs) * (target[k] - ct).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(1) > 1e-12 * sv(0)) || sv(0) <= 0.0) {
    throw NumericalError("procrustes_rigid: degenerate configuration (rank < 2)");
  }

  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d signs(1.0, 1.0, (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0);

  RigidTransform out;
  out.rotation = v * signs.asDiagonal() * u.transpose();
  out.translation = ct - out.rotation * cs;
  return out;
}

double alignment_rms(const RigidTransform& t, const PointCloud& source,
                     const PointCloud& target) {
  if (source.size() != target.size() || source.empty()) {
    throw std::invalid_argument("alignment_rms: clouds must be non-empty and equal size");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < source.size(); ++k) {
    sum += (t(source[k]) - target[k]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(source.size()));
}

double chamfer_mean(const PointCloud& a, const PointCloud& b) {
  require_valid_cloud(a, "chamfer_mean a");
  require_valid_cloud(b, "chamfer_mean b");

  const NeighborIndex index_a(a);
  const NeighborIndex index_b(b);

  double sum_ab = 0.0;
  for (const Point3& p : a) sum_ab += index_b.nearest(p).distance;
  double sum_ba = 0.0;
  for (const Point3& p : b) sum_ba += index_a.nearest(p).distance;

  return 0.5 * (sum_ab / static_cast<double>(a.size()) +
                sum_ba / static_cast<double>(b.size()));
}

}  // namespace toothsparse
