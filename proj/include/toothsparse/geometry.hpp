#ifndef TOOTHSPARSE_GEOMETRY_HPP
#define TOOTHSPARSE_GEOMETRY_HPP

#include <Eigen/Core>
#include <vector>

namespace toothsparse {

/// 3D point, coordinates in millimeters.
using Point3 = Eigen::Vector3d;

/// Ordered point cloud. Order matters once a cloud is corresponded: point k
/// of a corresponded cloud matches point k of its template tooth.
using PointCloud = std::vector<Point3>;

bool cloud_is_finite(const PointCloud& cloud);

/// Throws std::invalid_argument if the cloud is empty or has non-finite
/// coordinates. `what` names the offending argument in the message.
void require_valid_cloud(const PointCloud& cloud, const char* what);

Point3 centroid(const PointCloud& cloud);

/// Largest pairwise distance. O(n^2); clouds here are small.
double cloud_diameter(const PointCloud& cloud);

/// Proper rigid motion p -> rotation * p + translation. Rotation is
/// orthonormal with determinant +1: no reflection, no scale.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Point3 operator()(const Point3& p) const { return rotation * p + translation; }
  bool is_proper_rotation(double tol = 1e-9) const;
};

/// outer after inner: (compose(a, b))(p) == a(b(p)).
RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);
RigidTransform inverse(const RigidTransform& t);

/// Applies t to every point; cardinality and order preserved.
PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud);

/// Least-squares rigid motion mapping source onto target under the index
/// correspondence source[k] -> target[k] (Kabsch, SVD closed form with
/// determinant sign correction; no scaling).
///
/// Throws std::invalid_argument on cardinality mismatch or fewer than 3
/// pairs, NumericalError when the configuration is rank-deficient (rank < 2).
RigidTransform procrustes_rigid(const PointCloud& source, const PointCloud& target);

/// Root-mean-square distance between t(source[k]) and target[k].
double alignment_rms(const RigidTransform& t, const PointCloud& source,
                     const PointCloud& target);

/// Symmetric mean nearest-neighbor distance:
/// 0.5 * (mean over a of NN distance to b + mean over b of NN distance to a).
double chamfer_mean(const PointCloud& a, const PointCloud& b);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_GEOMETRY_HPP
