#ifndef TOOTHSPARSE_CPD_HPP
#define TOOTHSPARSE_CPD_HPP

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "toothsparse/geometry.hpp"

namespace toothsparse {

/// Coherent point drift, non-rigid variant. The source cloud carries the
/// Gaussian mixture centroids and is deformed onto the target data cloud.
///
/// Clouds are internally normalized to a common unit-diameter frame, so beta
/// is expressed in fractions of the joint cloud diameter and the same config
/// works across tooth sizes. Outputs are mapped back to input units.
struct CpdConfig {
  double beta = 2.0;            ///< Gaussian kernel width, unit-diameter frame
  double lambda = 3.0;          ///< deformation coherence weight
  double outlier_weight = 0.1;  ///< w in [0,1): uniform outlier mixture mass
  int max_iterations = 100;
  double tolerance = 1e-6;      ///< relative objective change at which EM stops

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct CpdResult {
  PointCloud deformed;        ///< same cardinality and order as the source
  double final_variance = 0;  ///< mm^2, input units
  int iterations_used = 0;    ///< number of M-steps performed
  /// Penalized negative log-likelihood evaluated after each M-step (entry 0
  /// is the initial state). Non-increasing up to numerical tolerance.
  std::vector<double> objective_trace;
};

/// Per-iteration internals exposed for test instrumentation.
struct CpdIterationStats {
  int iteration = 0;
  double sigma2 = 0;     ///< unit-diameter frame
  double objective = 0;  ///< penalized negative log-likelihood
  Eigen::VectorXd posterior_column_sums;  ///< one per target point
  Eigen::VectorXd outlier_mass;           ///< one per target point
};

using CpdObserver = std::function<void(const CpdIterationStats&)>;

/// Deforms source onto target: deformed = source + G * W with G the Gaussian
/// Gram matrix of the source and W estimated by EM. Deterministic for fixed
/// inputs and config.
///
/// Throws std::invalid_argument for empty/non-finite clouds or a bad config,
/// NumericalError if the M-step system becomes singular.
CpdResult cpd_nonrigid(const PointCloud& source, const PointCloud& target,
                       const CpdConfig& config, const CpdObserver& observer = {});

}  // namespace toothsparse

#endif  // TOOTHSPARSE_CPD_HPP
