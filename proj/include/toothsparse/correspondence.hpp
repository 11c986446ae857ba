#ifndef TOOTHSPARSE_CORRESPONDENCE_HPP
#define TOOTHSPARSE_CORRESPONDENCE_HPP

#include <map>
#include <set>

#include "toothsparse/cpd.hpp"
#include "toothsparse/model.hpp"

namespace toothsparse {

/// Rigid transform taking model coordinates into the template frame, fit by
/// Procrustes over per-tooth centroid pairs restricted to use_labels.
///
/// Throws std::invalid_argument when use_labels has teeth absent from the
/// model, DataError/NumericalError for too few or degenerate centroids.
RigidTransform align_model_to_template(const DentalModel& model,
                                       const DentalTemplate& dental_template,
                                       const std::set<ToothLabel>& use_labels);

/// Correspondence for one tooth, both clouds already in a common frame:
/// deform the template tooth onto the subject tooth with CPD, then replace
/// every deformed point by its nearest subject point. The output has the
/// template's cardinality and ordering, and every output point is an exact
/// member of the subject cloud (possibly selected more than once).
PointCloud correspond_tooth(const PointCloud& template_tooth,
                            const PointCloud& subject_tooth, const CpdConfig& cfg);

/// Aligns the model to the template over all present labels and corresponds
/// every present tooth. Results are expressed in the template frame.
std::map<ToothLabel, CorrespondedTooth> correspond_model(
    const DentalModel& model, const DentalTemplate& dental_template,
    const CpdConfig& cfg);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_CORRESPONDENCE_HPP
