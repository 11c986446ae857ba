#include <doctest.h>

#include <sstream>

#include "support/test_util.hpp"
#include "toothsparse/errors.hpp"
#include "toothsparse/evaluation.hpp"
#include "toothsparse/metrics.hpp"
#include "toothsparse/predictor.hpp"

using namespace toothsparse;
using testutil::small_synth_config;

namespace {

PredictionConfig quick_config(double eps_rel = 0.01, int iterations = 2) {
  PredictionConfig config;
  config.iterations = iterations;
  config.bpdn.epsilon_mode = EpsilonMode::relative;
  config.bpdn.epsilon_value = eps_rel;
  return config;
}

}  // namespace

TEST_CASE("make_split is seeded, disjoint, and sized") {
  std::vector<std::string> ids;
  for (int i = 0; i < 20; ++i) ids.push_back("s" + std::to_string(i));

  const SplitSpec a = make_split(ids, 15, 42);
  const SplitSpec b = make_split(ids, 15, 42);
  CHECK(a.train_ids == b.train_ids);
  CHECK(a.test_ids == b.test_ids);
  CHECK(a.train_ids.size() == 15);
  CHECK(a.test_ids.size() == 5);

  for (const std::string& id : a.train_ids) {
    CHECK(std::find(a.test_ids.begin(), a.test_ids.end(), id) == a.test_ids.end());
  }

  const SplitSpec c = make_split(ids, 15, 43);
  CHECK(a.train_ids != c.train_ids);

  CHECK(default_train_count(133) == 100);
  CHECK(default_train_count(20) == 15);
}

TEST_CASE("table catalogs match the published pattern sizes") {
  const auto t2 = table2_patterns();
  REQUIRE(t2.size() == 6);
  for (std::size_t i = 0; i < t2.size(); ++i) CHECK(t2[i].size() == i + 2);
  CHECK(pattern_name(t2.front()) == "12,11");
  CHECK(pattern_name(t2.back()) == "17,16,15,14,13,12,11");

  const auto t3 = table3_patterns();
  REQUIRE(t3.size() == 7);
  for (std::size_t i = 0; i < t3.size(); ++i) CHECK(t3[i].size() == 2 * (i + 1));
  CHECK(pattern_name(t3.front()) == "11,41");
  CHECK(pattern_name(t3.back()) == "17,16,15,14,13,12,11,41,42,43,44,45,46,47");
}

TEST_CASE("the 14-tooth pattern resolves to the far-column support") {
  SynthConfig config = small_synth_config(6, 2, 0.0, 201);
  config.resample_fraction = 0.0;
  const SynthCohort cohort = generate_cohort(config);
  const auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> train_ids;
  for (int j = 0; j < 5; ++j) train_ids.push_back(subjects[j].model.subject_id);
  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, train_ids, CpdConfig{});

  DentalModel reduced = subjects[5].model;
  std::set<ToothLabel> missing;
  const auto patterns = table3_patterns();
  for (const ToothLabel& m : patterns.back()) {
    missing.insert(m);
    reduced.teeth.erase(m);
  }

  const PredictionResult result = predict(reduced, missing, dicts,
                                          cohort.dental_template, quick_config());
  std::vector<int> fdis;
  for (const ToothLabel& label : result.adjacent_labels) fdis.push_back(label.fdi());
  CHECK(fdis == std::vector<int>{21, 31, 27, 37});
}

TEST_CASE("single-missing sweep produces 28 x |test| rows with sane aggregates") {
  SynthConfig config = small_synth_config(8, 2, 0.05, 211);
  config.resample_fraction = 0.0;
  const SynthCohort cohort = generate_cohort(config);
  const auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> train_ids;
  for (int j = 0; j < 6; ++j) train_ids.push_back(subjects[j].model.subject_id);
  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, train_ids, CpdConfig{});

  const MetricsReport report = run_single_missing_sweep(
      subjects, cohort.dental_template, dicts, quick_config(0.02, 2));

  CHECK(report.rows.size() == 28 * 2);
  CHECK(report.runs.size() == 28 * 2);

  for (const MetricsRow& row : report.rows) {
    CHECK(row.prediction_error_mm >= 0.0);
    CHECK(std::isfinite(row.prediction_error_mm));
    CHECK(row.shape_error_mm >= 0.0);
    CHECK(std::isfinite(row.shape_error_mm));
    // shape error never exceeds prediction error
    CHECK(row.shape_error_mm <= row.prediction_error_mm + 1e-12);
  }

  // aggregates recompute from the raw rows
  for (const MetricsAggregate& agg : report.aggregates()) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const MetricsRow& row : report.rows) {
      if (row.pattern == agg.pattern && row.tooth_fdi == agg.tooth_fdi) {
        sum += row.prediction_error_mm;
        ++count;
      }
    }
    REQUIRE(count == agg.count);
    CHECK(agg.prediction_mean ==
          doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-12));
  }
}

TEST_CASE("a duplicated training subject evaluates to near-zero error") {
  SynthConfig config = small_synth_config(6, 2, 0.0, 223);
  config.resample_fraction = 0.0;
  const SynthCohort cohort = generate_cohort(config);
  auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> train_ids;
  for (const EvaluationSubject& s : subjects) train_ids.push_back(s.model.subject_id);
  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, train_ids, CpdConfig{});

  // test set = an exact copy of a training subject under a new id
  EvaluationSubject duplicate = subjects[2];
  duplicate.model.subject_id = "zz_duplicate";
  subjects.push_back(std::move(duplicate));

  const MetricsReport report = run_single_missing_sweep(
      subjects, cohort.dental_template, dicts, quick_config(1e-6, 8));

  CHECK(report.rows.size() == 28);
  for (const MetricsRow& row : report.rows) {
    CAPTURE(row.pattern);
    CHECK(row.prediction_error_mm <= 1e-3);
  }
}

TEST_CASE("pattern experiments emit one row per missing tooth") {
  SynthConfig config = small_synth_config(5, 2, 0.05, 227);
  config.resample_fraction = 0.0;
  const SynthCohort cohort = generate_cohort(config);
  const auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> train_ids;
  for (int j = 0; j < 4; ++j) train_ids.push_back(subjects[j].model.subject_id);
  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, train_ids, CpdConfig{});

  const std::vector<std::vector<ToothLabel>> patterns = {
      {ToothLabel(12), ToothLabel(11)}};
  const MetricsReport report = run_pattern_experiments(
      subjects, cohort.dental_template, dicts, patterns, quick_config(0.02, 2));

  CHECK(report.rows.size() == 2);  // one test subject x two missing teeth
  std::set<int> teeth;
  for (const MetricsRow& row : report.rows) {
    CHECK(row.pattern == "12,11");
    teeth.insert(row.tooth_fdi);
  }
  CHECK(teeth == std::set<int>{11, 12});

  // run records carry the per-iteration ground-truth trace
  REQUIRE(report.runs.size() == 1);
  CHECK(report.runs[0].iteration_errors.size() >= 1);
}

TEST_CASE("baseline_template_copy produces teeth in the subject frame") {
  SynthConfig config = small_synth_config(2, 2, 0.0, 229);
  config.resample_fraction = 0.0;
  const SynthCohort cohort = generate_cohort(config);
  const EvaluationSubject subject = evaluation_subjects(cohort)[1];

  DentalModel reduced = subject.model;
  reduced.teeth.erase(ToothLabel(11));

  const auto baseline =
      baseline_template_copy(reduced, {ToothLabel(11)}, cohort.dental_template);
  REQUIRE(baseline.count(ToothLabel(11)) == 1);
  CHECK(baseline.at(ToothLabel(11)).cloud.size() ==
        cohort.dental_template.point_count(ToothLabel(11)));

  // it should be a sane prediction, within a few mm of the truth
  const double error =
      prediction_error(baseline.at(ToothLabel(11)), subject.truth.at(ToothLabel(11)));
  CHECK(error < 10.0);
}

TEST_CASE("report writers are deterministic and structured") {
  MetricsReport report;
  report.rows = {
      {"11", 11, "s1", 0.5, 0.25},
      {"11", 11, "s2", 0.7, 0.35},
  };

  std::ostringstream csv1, csv2;
  write_report_csv(report, csv1);
  write_report_csv(report, csv2);
  CHECK(csv1.str() == csv2.str());

  std::istringstream lines(csv1.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "pattern,tooth,subject_id,prediction_error_mm,shape_error_mm");
  int count = 0;
  std::string line;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 2);

  std::ostringstream summary;
  write_report_summary(report, summary);
  CHECK(summary.str().find("pattern: 11") != std::string::npos);

  CHECK(report.pattern_mean_prediction_error("11") == doctest::Approx(0.6));
  CHECK_THROWS_AS(report.pattern_mean_prediction_error("nope"), DataError);
}

TEST_CASE("evaluation requires at least one test subject") {
  SynthConfig config = small_synth_config(3, 1, 0.0, 233);
  config.resample_fraction = 0.0;
  const SynthCohort cohort = generate_cohort(config);
  const auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> train_ids;
  for (const EvaluationSubject& s : subjects) train_ids.push_back(s.model.subject_id);
  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, train_ids, CpdConfig{});

  CHECK_THROWS_AS(run_single_missing_sweep(subjects, cohort.dental_template, dicts,
                                           quick_config()),
                  DataError);
}
