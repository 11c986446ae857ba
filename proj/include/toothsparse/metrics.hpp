#ifndef TOOTHSPARSE_METRICS_HPP
#define TOOTHSPARSE_METRICS_HPP

#include "toothsparse/model.hpp"

namespace toothsparse {

/// Mean Euclidean distance over corresponding points. Captures position and
/// shape together. Throws DataError on label or cardinality mismatch.
double prediction_error(const CorrespondedTooth& predicted,
                        const CorrespondedTooth& truth);

/// Residual point-cloud distance after optimally rigidly aligning the
/// prediction to the truth (using the index correspondence), measured as the
/// symmetric mean chamfer distance. Captures shape only.
double shape_error(const CorrespondedTooth& predicted, const CorrespondedTooth& truth);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_METRICS_HPP
