#ifndef TOOTHSPARSE_PREDICTOR_HPP
#define TOOTHSPARSE_PREDICTOR_HPP

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "toothsparse/bpdn.hpp"
#include "toothsparse/cpd.hpp"
#include "toothsparse/dictionary.hpp"
#include "toothsparse/model.hpp"

namespace toothsparse {

/// Coding tolerances for prediction runs. Dictionary columns are raw
/// coordinates and heavily correlated, so solver-grade optimality is slow to
/// reach and unnecessary: coefficient accuracy of ~1e-6 relative sits far
/// below any prediction tolerance.
inline BpdnConfig pipeline_bpdn_defaults() {
  BpdnConfig config;
  config.max_iterations = 5000;
  config.tol_rel = 1e-6;
  return config;
}

struct PredictionConfig {
  int adjacency_radius = 1;  ///< t: columns beyond the missing range
  int iterations = 3;
  CpdConfig cpd;
  BpdnConfig bpdn = pipeline_bpdn_defaults();

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct IterationDiagnostics {
  RigidTransform alignment;  ///< model frame -> template frame
  double residual_norm = 0.0;
  bool bpdn_feasible = true;
  bool bpdn_converged = false;
  /// Mean point movement of the predictions against the previous iteration;
  /// unset on the first iteration.
  std::optional<double> mean_movement;
  /// Mean prediction error against supplied ground truth (subject frame).
  std::optional<double> ground_truth_error;
};

struct PredictionResult {
  std::map<ToothLabel, CorrespondedTooth> predicted_template_frame;
  std::map<ToothLabel, CorrespondedTooth> predicted_subject_frame;
  SparseCode sparse_code;  ///< final iteration's coefficients
  std::vector<ToothLabel> adjacent_labels;
  std::vector<IterationDiagnostics> per_iteration;
};

/// Predicts the missing teeth of a model from its remaining teeth.
///
/// Each iteration rigidly aligns the model to the template (iteration 1 on
/// the remaining teeth alone; later iterations merge in the current
/// predictions), re-corresponds the adjacent teeth, solves the l1 coding of
/// their stacked coordinates in the stacked adjacent dictionaries, and
/// applies the shared coefficients to every missing tooth's dictionary.
/// Stops after config.iterations or once predictions move < 1e-3 mm.
///
/// An iteration whose coding is infeasible at the configured epsilon falls
/// back to the least-squares coefficients; this is surfaced per iteration
/// and in the final sparse_code rather than thrown, because later
/// re-alignments shrink the residual.
///
/// `ground_truth`, when given, only fills the per-iteration error
/// diagnostics; it never influences the prediction.
///
/// Throws NoSupportError when no adjacent teeth exist, DataError /
/// std::invalid_argument on contract violations, and propagates CPD and
/// alignment errors.
PredictionResult predict(
    const DentalModel& model, const std::set<ToothLabel>& missing,
    const DictionarySet& dicts, const DentalTemplate& dental_template,
    const PredictionConfig& config,
    const std::map<ToothLabel, CorrespondedTooth>* ground_truth = nullptr);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_PREDICTOR_HPP
