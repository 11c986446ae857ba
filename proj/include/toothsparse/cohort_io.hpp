#ifndef TOOTHSPARSE_COHORT_IO_HPP
#define TOOTHSPARSE_COHORT_IO_HPP

#include <filesystem>
#include <optional>
#include <vector>

#include "toothsparse/evaluation.hpp"
#include "toothsparse/model.hpp"

namespace toothsparse {

/// One "x y z" line per point, millimeters, shortest round-trip decimal form.
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

/// Throws DataError on unreadable files, parse failures, non-finite values,
/// or an empty cloud.
PointCloud read_xyz(const std::filesystem::path& path);

/// Subject directory: <FDI>.xyz per present tooth, manifest.json naming the
/// subject and whether clouds are corresponded, optional truth/<FDI>.xyz
/// ground-truth corresponded clouds.
struct SubjectRecord {
  DentalModel model;
  bool corresponded = false;
  std::map<ToothLabel, CorrespondedTooth> truth;  // empty when absent on disk
};

void write_subject(const std::filesystem::path& dir, const DentalModel& model,
                   bool corresponded,
                   const std::map<ToothLabel, CorrespondedTooth>* truth = nullptr);
SubjectRecord read_subject(const std::filesystem::path& dir);

/// Template directory: exactly 28 <FDI>.xyz files.
void write_template(const std::filesystem::path& dir, const DentalTemplate& dental_template);
DentalTemplate read_template(const std::filesystem::path& dir);

/// Cohort root: template/ plus one directory per subject (any directory with
/// a manifest.json). Subjects are returned sorted by id.
void write_cohort(const std::filesystem::path& root, const SynthCohort& cohort);
std::vector<SubjectRecord> read_cohort_subjects(const std::filesystem::path& root);

/// Subjects adapted for the evaluation harness; throws DataError when a
/// subject lacks ground truth.
std::vector<EvaluationSubject> read_evaluation_cohort(const std::filesystem::path& root);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_COHORT_IO_HPP
