#ifndef TOOTHSPARSE_DICTIONARY_HPP
#define TOOTHSPARSE_DICTIONARY_HPP

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "toothsparse/model.hpp"
#include "toothsparse/teeth.hpp"

namespace toothsparse {

/// Coordinate dictionary for one tooth type: a (3 * t_points) x n_subjects
/// matrix whose column j stacks subject j's corresponded cloud as
/// (x0, y0, z0, x1, y1, z1, ...). Rows 3k..3k+2 hold corresponding point k
/// across the cohort. Columns are raw template-frame coordinates: no
/// centering, no normalization.
struct ToothDictionary {
  ToothLabel label;
  std::size_t t_points = 0;
  Eigen::MatrixXd data;
  std::vector<std::string> subject_ids;

  std::size_t n_subjects() const { return subject_ids.size(); }
};

/// All 28 per-tooth dictionaries built from one cohort, with identical
/// subject ordering across labels. Immutable after construction.
class DictionarySet {
 public:
  /// Throws DataError unless all 28 labels are present with consistent
  /// subject ids and valid shapes.
  DictionarySet(std::map<ToothLabel, ToothDictionary> dictionaries,
                std::vector<std::string> subject_ids);

  const ToothDictionary& at(ToothLabel label) const;
  const std::vector<std::string>& subject_ids() const { return subject_ids_; }
  const std::map<ToothLabel, ToothDictionary>& dictionaries() const {
    return dictionaries_;
  }

 private:
  std::map<ToothLabel, ToothDictionary> dictionaries_;
  std::vector<std::string> subject_ids_;
};

/// Flattens a cloud to the coordinate-vector layout used by dictionaries.
Eigen::VectorXd to_coordinate_vector(const PointCloud& cloud);

/// Inverse of to_coordinate_vector. Throws DataError unless length % 3 == 0.
PointCloud from_coordinate_vector(const Eigen::VectorXd& coords);

/// Builds one tooth dictionary from per-subject corresponded teeth, subject
/// order preserved. Throws DataError on label or cardinality mismatches.
ToothDictionary build_dictionary(ToothLabel label,
                                 const std::vector<CorrespondedTooth>& cohort,
                                 const std::vector<std::string>& subject_ids);

/// Vertical concatenation of the per-label matrices in the given order.
/// Throws std::invalid_argument when labels is empty.
Eigen::MatrixXd stack_dictionaries(const DictionarySet& set,
                                   const std::vector<ToothLabel>& labels);

/// Binary dictionary-set file ("TDS1"): magic, length-prefixed JSON manifest
/// (subject ids, labels, point counts, block offsets), little-endian float64
/// data blocks, trailing FNV-1a 64 checksum of all preceding bytes.
void save_dictionary_set(const DictionarySet& set, const std::filesystem::path& path);

/// Validates magic, manifest invariants, and the checksum.
/// Throws DataError on any mismatch, truncation, or corruption.
DictionarySet load_dictionary_set(const std::filesystem::path& path);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_DICTIONARY_HPP
