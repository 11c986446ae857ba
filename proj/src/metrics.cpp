#include "toothsparse/metrics.hpp"

#include <string>

#include "toothsparse/errors.hpp"

namespace toothsparse {

namespace {

void require_comparable(const CorrespondedTooth& predicted, const CorrespondedTooth& truth) {
  if (predicted.label != truth.label) {
    throw DataError("metrics: label mismatch (" + std::to_string(predicted.label.fdi()) +
                    " vs " + std::to_string(truth.label.fdi()) + ")");
  }
  if (predicted.cloud.size() != truth.cloud.size() || predicted.cloud.empty()) {
    throw DataError("metrics: cardinality mismatch for tooth " +
                    std::to_string(predicted.label.fdi()));
  }
}

}  // namespace

double prediction_error(const CorrespondedTooth& predicted, const CorrespondedTooth& truth) {
  require_comparable(predicted, truth);
  double sum = 0.0;
  for (std::size_t k = 0; k < predicted.cloud.size(); ++k) {
    sum += (predicted.cloud[k] - truth.cloud[k]).norm();
  }
  return sum / static_cast<double>(predicted.cloud.size());
}

double shape_error(const CorrespondedTooth& predicted, const CorrespondedTooth& truth) {
  require_comparable(predicted, truth);
  const RigidTransform align = procrustes_rigid(predicted.cloud, truth.cloud);
  return chamfer_mean(apply_transform(align, predicted.cloud), truth.cloud);
}

}  // namespace toothsparse
