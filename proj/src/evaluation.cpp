#include "toothsparse/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "toothsparse/correspondence.hpp"
#include "toothsparse/errors.hpp"
#include "toothsparse/metrics.hpp"
#include "toothsparse/parallel.hpp"
#include "toothsparse/rng.hpp"

namespace toothsparse {

namespace {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

bool row_less(const MetricsRow& a, const MetricsRow& b) {
  if (a.pattern != b.pattern) return a.pattern < b.pattern;
  if (a.tooth_fdi != b.tooth_fdi) return a.tooth_fdi < b.tooth_fdi;
  return a.subject_id < b.subject_id;
}

MetricsReport run_experiments(const std::vector<EvaluationSubject>& cohort,
                              const DentalTemplate& dental_template,
                              const DictionarySet& dicts,
                              const std::vector<std::vector<ToothLabel>>& patterns,
                              const PredictionConfig& config) {
  config.validate();
  if (patterns.empty()) throw std::invalid_argument("run_experiments: no patterns");

  std::set<std::string> train_ids(dicts.subject_ids().begin(), dicts.subject_ids().end());
  std::vector<const EvaluationSubject*> test_subjects;
  for (const EvaluationSubject& s : cohort) {
    if (train_ids.count(s.model.subject_id) == 0) test_subjects.push_back(&s);
  }
  if (test_subjects.empty()) {
    throw DataError("run_experiments: every cohort subject is in the dictionary; "
                    "no test subjects left");
  }

  struct WorkItem {
    const EvaluationSubject* subject;
    const std::vector<ToothLabel>* pattern;
  };
  std::vector<WorkItem> items;
  items.reserve(test_subjects.size() * patterns.size());
  for (const auto& pattern : patterns) {
    for (const EvaluationSubject* s : test_subjects) {
      items.push_back(WorkItem{s, &pattern});
    }
  }

  std::vector<std::vector<MetricsRow>> row_slots(items.size());
  std::vector<RunRecord> run_slots(items.size());

  parallel_for(items.size(), [&](std::size_t i) {
    const EvaluationSubject& subject = *items[i].subject;
    const std::vector<ToothLabel>& pattern = *items[i].pattern;
    const std::string name = pattern_name(pattern);

    DentalModel reduced = subject.model;
    std::set<ToothLabel> missing;
    for (const ToothLabel& m : pattern) {
      if (reduced.teeth.erase(m) == 0) {
        throw DataError("run_experiments: subject '" + subject.model.subject_id +
                        "' lacks tooth " + std::to_string(m.fdi()) +
                        " required by pattern " + name);
      }
      missing.insert(m);
    }

    const PredictionResult prediction = predict(reduced, missing, dicts, dental_template,
                                                config, &subject.truth);

    RunRecord run;
    run.pattern = name;
    run.subject_id = subject.model.subject_id;
    for (const IterationDiagnostics& diag : prediction.per_iteration) {
      run.iteration_errors.push_back(diag.ground_truth_error.value());
    }
    run.bpdn_feasible = prediction.sparse_code.feasible;
    run.bpdn_converged = prediction.sparse_code.converged;
    run_slots[i] = std::move(run);

    for (const ToothLabel& m : pattern) {
      const CorrespondedTooth& predicted = prediction.predicted_subject_frame.at(m);
      const CorrespondedTooth& truth = subject.truth.at(m);
      MetricsRow row;
      row.pattern = name;
      row.tooth_fdi = m.fdi();
      row.subject_id = subject.model.subject_id;
      row.prediction_error_mm = prediction_error(predicted, truth);
      row.shape_error_mm = shape_error(predicted, truth);
      row_slots[i].push_back(std::move(row));
    }
  });

  MetricsReport report;
  for (auto& rows : row_slots) {
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }
  report.runs = std::move(run_slots);
  std::sort(report.rows.begin(), report.rows.end(), row_less);
  std::sort(report.runs.begin(), report.runs.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.pattern != b.pattern) return a.pattern < b.pattern;
    return a.subject_id < b.subject_id;
  });
  return report;
}

}  // namespace

std::vector<EvaluationSubject> evaluation_subjects(const SynthCohort& cohort) {
  std::vector<EvaluationSubject> out;
  out.reserve(cohort.subjects.size());
  for (const SynthSubject& s : cohort.subjects) {
    out.push_back(EvaluationSubject{s.model, s.ground_truth});
  }
  return out;
}

std::size_t default_train_count(std::size_t cohort_size) {
  const auto count = static_cast<std::size_t>(
      std::round(static_cast<double>(cohort_size) * 100.0 / 133.0));
  return std::clamp<std::size_t>(count, 1, cohort_size > 1 ? cohort_size - 1 : 1);
}

SplitSpec make_split(const std::vector<std::string>& subject_ids, std::size_t train_count,
                     std::uint64_t seed) {
  if (subject_ids.size() < 2) {
    throw DataError("make_split: need at least 2 subjects");
  }
  train_count = std::clamp<std::size_t>(train_count, 1, subject_ids.size() - 1);

  Rng rng(mix64(seed ^ 0x5bd1e995u));
  const std::vector<std::size_t> order = rng.permutation(subject_ids.size());

  SplitSpec split;
  for (std::size_t i = 0; i < subject_ids.size(); ++i) {
    (i < train_count ? split.train_ids : split.test_ids).push_back(subject_ids[order[i]]);
  }
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

DictionarySet build_dictionaries(const std::vector<EvaluationSubject>& cohort,
                                 const DentalTemplate& dental_template,
                                 const std::vector<std::string>& train_ids,
                                 const CpdConfig& cpd) {
  if (train_ids.empty()) throw DataError("build_dictionaries: no training subjects");

  std::map<std::string, const EvaluationSubject*> by_id;
  for (const EvaluationSubject& s : cohort) {
    if (!by_id.emplace(s.model.subject_id, &s).second) {
      throw DataError("build_dictionaries: duplicate subject id '" + s.model.subject_id + "'");
    }
  }

  std::vector<const EvaluationSubject*> train;
  for (const std::string& id : train_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw DataError("build_dictionaries: training subject '" + id + "' not in cohort");
    }
    train.push_back(it->second);
  }

  std::vector<std::map<ToothLabel, CorrespondedTooth>> corresponded(train.size());
  parallel_for(train.size(), [&](std::size_t j) {
    if (train[j]->model.labels().size() != all_labels().size()) {
      throw DataError("build_dictionaries: training subject '" + train_ids[j] +
                      "' does not have all 28 teeth");
    }
    corresponded[j] = correspond_model(train[j]->model, dental_template, cpd);
  });

  std::map<ToothLabel, ToothDictionary> dictionaries;
  for (const ToothLabel& label : all_labels()) {
    std::vector<CorrespondedTooth> column_teeth;
    column_teeth.reserve(train.size());
    for (std::size_t j = 0; j < train.size(); ++j) {
      column_teeth.push_back(corresponded[j].at(label));
    }
    dictionaries.emplace(label, build_dictionary(label, column_teeth, train_ids));
  }
  return DictionarySet(std::move(dictionaries), train_ids);
}

std::vector<MetricsAggregate> MetricsReport::aggregates() const {
  std::map<std::pair<std::string, int>, std::vector<const MetricsRow*>> groups;
  for (const MetricsRow& row : rows) {
    groups[{row.pattern, row.tooth_fdi}].push_back(&row);
  }

  std::vector<MetricsAggregate> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    MetricsAggregate agg;
    agg.pattern = key.first;
    agg.tooth_fdi = key.second;
    agg.count = members.size();
    double psum = 0.0;
    double ssum = 0.0;
    for (const MetricsRow* r : members) {
      psum += r->prediction_error_mm;
      ssum += r->shape_error_mm;
    }
    const double n = static_cast<double>(members.size());
    agg.prediction_mean = psum / n;
    agg.shape_mean = ssum / n;
    if (members.size() > 1) {
      double pvar = 0.0;
      double svar = 0.0;
      for (const MetricsRow* r : members) {
        pvar += (r->prediction_error_mm - agg.prediction_mean) *
                (r->prediction_error_mm - agg.prediction_mean);
        svar += (r->shape_error_mm - agg.shape_mean) * (r->shape_error_mm - agg.shape_mean);
      }
      agg.prediction_stddev = std::sqrt(pvar / (n - 1.0));
      agg.shape_stddev = std::sqrt(svar / (n - 1.0));
    }
    out.push_back(std::move(agg));
  }
  return out;
}

double MetricsReport::pattern_mean_prediction_error(const std::string& pattern) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const MetricsRow& row : rows) {
    if (row.pattern == pattern) {
      sum += row.prediction_error_mm;
      ++count;
    }
  }
  if (count == 0) throw DataError("pattern_mean_prediction_error: no rows for '" + pattern + "'");
  return sum / static_cast<double>(count);
}

std::string pattern_name(const std::vector<ToothLabel>& pattern) {
  std::string out;
  for (const ToothLabel& label : pattern) {
    if (!out.empty()) out += ',';
    out += std::to_string(label.fdi());
  }
  return out;
}

MetricsReport run_single_missing_sweep(const std::vector<EvaluationSubject>& cohort,
                                       const DentalTemplate& dental_template,
                                       const DictionarySet& dicts,
                                       const PredictionConfig& config) {
  std::vector<std::vector<ToothLabel>> patterns;
  for (const ToothLabel& label : all_labels()) patterns.push_back({label});
  return run_experiments(cohort, dental_template, dicts, patterns, config);
}

MetricsReport run_pattern_experiments(const std::vector<EvaluationSubject>& cohort,
                                      const DentalTemplate& dental_template,
                                      const DictionarySet& dicts,
                                      const std::vector<std::vector<ToothLabel>>& patterns,
                                      const PredictionConfig& config) {
  return run_experiments(cohort, dental_template, dicts, patterns, config);
}

std::vector<std::vector<ToothLabel>> table2_patterns() {
  std::vector<std::vector<ToothLabel>> out;
  for (int first = 12; first <= 17; ++first) {
    std::vector<ToothLabel> pattern;
    for (int fdi = first; fdi >= 11; --fdi) pattern.emplace_back(fdi);
    out.push_back(std::move(pattern));
  }
  return out;
}

std::vector<std::vector<ToothLabel>> table3_patterns() {
  std::vector<std::vector<ToothLabel>> out;
  for (int extent = 1; extent <= 7; ++extent) {
    std::vector<ToothLabel> pattern;
    for (int p = extent; p >= 1; --p) pattern.emplace_back(10 + p);  // upper 1x
    for (int p = 1; p <= extent; ++p) pattern.emplace_back(40 + p);  // lower 4x
    out.push_back(std::move(pattern));
  }
  return out;
}

std::map<ToothLabel, CorrespondedTooth> baseline_template_copy(
    const DentalModel& model, const std::set<ToothLabel>& missing,
    const DentalTemplate& dental_template) {
  const RigidTransform to_template =
      align_model_to_template(model, dental_template, model.labels());
  const RigidTransform to_subject = inverse(to_template);

  std::map<ToothLabel, CorrespondedTooth> out;
  for (const ToothLabel& m : missing) {
    out.emplace(m, CorrespondedTooth{
                       m, apply_transform(to_subject, dental_template.tooth(m))});
  }
  return out;
}

void write_report_csv(const MetricsReport& report, std::ostream& out) {
  out << "pattern,tooth,subject_id,prediction_error_mm,shape_error_mm\n";
  for (const MetricsRow& row : report.rows) {
    out << '"' << row.pattern << "\"," << row.tooth_fdi << ',' << row.subject_id << ','
        << format_double(row.prediction_error_mm) << ','
        << format_double(row.shape_error_mm) << '\n';
  }
}

void write_report_summary(const MetricsReport& report, std::ostream& out) {
  std::map<std::string, std::vector<const MetricsAggregate*>> by_pattern;
  const std::vector<MetricsAggregate> aggregates = report.aggregates();
  for (const MetricsAggregate& agg : aggregates) {
    by_pattern[agg.pattern].push_back(&agg);
  }

  for (const auto& [pattern, aggs] : by_pattern) {
    out << "pattern: " << pattern << "\n";
    std::ostringstream teeth_line;
    std::ostringstream pred_line;
    std::ostringstream shape_line;
    teeth_line << "  tooth         ";
    pred_line << "  prediction mm ";
    shape_line << "  shape mm      ";
    for (const MetricsAggregate* agg : aggs) {
      teeth_line << std::setw(14) << agg->tooth_fdi;
      std::ostringstream p;
      p << std::fixed << std::setprecision(3) << agg->prediction_mean << "±"
        << std::setprecision(2) << agg->prediction_stddev;
      pred_line << std::setw(14) << p.str();
      std::ostringstream s;
      s << std::fixed << std::setprecision(3) << agg->shape_mean << "±"
        << std::setprecision(2) << agg->shape_stddev;
      shape_line << std::setw(14) << s.str();
    }
    out << teeth_line.str() << "\n" << pred_line.str() << "\n" << shape_line.str() << "\n";
    out << "  mean prediction error: " << std::fixed << std::setprecision(4)
        << report.pattern_mean_prediction_error(pattern) << " mm\n";
  }
}

}  // namespace toothsparse
