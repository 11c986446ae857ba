#ifndef TOOTHSPARSE_EVALUATION_HPP
#define TOOTHSPARSE_EVALUATION_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "toothsparse/dictionary.hpp"
#include "toothsparse/predictor.hpp"
#include "toothsparse/synthetic.hpp"

namespace toothsparse {

/// A subject usable for experiments: raw model plus ground-truth corresponded
/// teeth in the subject's own frame.
struct EvaluationSubject {
  DentalModel model;
  std::map<ToothLabel, CorrespondedTooth> truth;
};

std::vector<EvaluationSubject> evaluation_subjects(const SynthCohort& cohort);

struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// Seeded shuffle split. train_count is clamped to [1, n-1] so both sides
/// stay non-empty; the default fraction mirrors a 100/133 training share.
SplitSpec make_split(const std::vector<std::string>& subject_ids, std::size_t train_count,
                     std::uint64_t seed);
std::size_t default_train_count(std::size_t cohort_size);

/// Corresponds the training subjects to the template and builds all 28
/// dictionaries with consistent subject ordering.
DictionarySet build_dictionaries(const std::vector<EvaluationSubject>& cohort,
                                 const DentalTemplate& dental_template,
                                 const std::vector<std::string>& train_ids,
                                 const CpdConfig& cpd);

struct MetricsRow {
  std::string pattern;  ///< comma-joined missing FDI codes, e.g. "14,15"
  int tooth_fdi = 0;
  std::string subject_id;
  double prediction_error_mm = 0.0;
  double shape_error_mm = 0.0;
};

struct MetricsAggregate {
  std::string pattern;
  int tooth_fdi = 0;
  std::size_t count = 0;
  double prediction_mean = 0.0;
  double prediction_stddev = 0.0;
  double shape_mean = 0.0;
  double shape_stddev = 0.0;
};

/// One prediction run (a subject x pattern pair).
struct RunRecord {
  std::string pattern;
  std::string subject_id;
  std::vector<double> iteration_errors;  ///< mean ground-truth error per iteration
  bool bpdn_feasible = true;
  bool bpdn_converged = false;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<RunRecord> runs;

  /// Per (pattern, tooth) mean and sample standard deviation.
  std::vector<MetricsAggregate> aggregates() const;
  double pattern_mean_prediction_error(const std::string& pattern) const;
};

std::string pattern_name(const std::vector<ToothLabel>& pattern);

/// Removes each of the 28 tooth types in turn from every test subject
/// (subjects absent from the dictionary's id list), predicts it, and scores
/// both metrics. Rows are sorted (pattern, tooth, subject); runs likewise.
MetricsReport run_single_missing_sweep(const std::vector<EvaluationSubject>& cohort,
                                       const DentalTemplate& dental_template,
                                       const DictionarySet& dicts,
                                       const PredictionConfig& config);

/// Same, for explicit multi-missing patterns.
MetricsReport run_pattern_experiments(const std::vector<EvaluationSubject>& cohort,
                                      const DentalTemplate& dental_template,
                                      const DictionarySet& dicts,
                                      const std::vector<std::vector<ToothLabel>>& patterns,
                                      const PredictionConfig& config);

/// Same-row runs of 2..7 missing teeth ending at the upper-right corner:
/// {12,11}, {13,12,11}, ... {17,16,15,14,13,12,11}.
std::vector<std::vector<ToothLabel>> table2_patterns();

/// Symmetric upper+lower runs from {11,41} up to the 14-tooth case
/// {17..11, 41..47}.
std::vector<std::vector<ToothLabel>> table3_patterns();

/// Naive baseline: rigidly align on the remaining teeth and copy the
/// template tooth into the subject frame.
std::map<ToothLabel, CorrespondedTooth> baseline_template_copy(
    const DentalModel& model, const std::set<ToothLabel>& missing,
    const DentalTemplate& dental_template);

/// Machine-readable rows: header then one line per row, sorted.
void write_report_csv(const MetricsReport& report, std::ostream& out);

/// Human-readable per-pattern tables of per-tooth means and deviations.
void write_report_summary(const MetricsReport& report, std::ostream& out);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_EVALUATION_HPP
