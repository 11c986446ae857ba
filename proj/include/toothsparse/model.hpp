#ifndef TOOTHSPARSE_MODEL_HPP
#define TOOTHSPARSE_MODEL_HPP

#include <map>
#include <set>
#include <string>

#include "toothsparse/geometry.hpp"
#include "toothsparse/teeth.hpp"

namespace toothsparse {

/// A tooth cloud re-indexed into template point order: point k corresponds
/// to point k of the template tooth with the same label.
struct CorrespondedTooth {
  ToothLabel label;
  PointCloud cloud;
};

/// The 28-tooth reference: one cloud per label with a fixed point count and
/// canonical point ordering that defines correspondence identity. Immutable.
class DentalTemplate {
 public:
  /// Throws DataError unless exactly the 28 valid labels are present with
  /// non-empty finite clouds.
  explicit DentalTemplate(std::map<ToothLabel, PointCloud> teeth);

  const PointCloud& tooth(ToothLabel label) const;
  std::size_t point_count(ToothLabel label) const;  // T_i
  const std::map<ToothLabel, PointCloud>& teeth() const { return teeth_; }

 private:
  std::map<ToothLabel, PointCloud> teeth_;
};

/// A subject's labeled raw tooth clouds, arbitrary cardinality and order.
struct DentalModel {
  std::string subject_id;
  std::map<ToothLabel, PointCloud> teeth;

  std::set<ToothLabel> labels() const;

  /// Throws DataError when empty or a cloud is invalid.
  void validate() const;
};

}  // namespace toothsparse

#endif  // TOOTHSPARSE_MODEL_HPP
