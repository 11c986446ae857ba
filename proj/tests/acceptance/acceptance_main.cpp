// Acceptance suite: each criterion prints one PASS/FAIL line (plus indented
// detail lines) and the process exits non-zero if any requested criterion
// fails. Run with no arguments for all criteria, or pass criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "support/cpd_reference.hpp"
#include "support/lp_oracle.hpp"
#include "support/test_util.hpp"
#include "toothsparse/adjacency.hpp"
#include "toothsparse/bpdn.hpp"
#include "toothsparse/cohort_io.hpp"
#include "toothsparse/cpd.hpp"
#include "toothsparse/dictionary.hpp"
#include "toothsparse/errors.hpp"
#include "toothsparse/evaluation.hpp"
#include "toothsparse/kdtree.hpp"
#include "toothsparse/metrics.hpp"
#include "toothsparse/parallel.hpp"
#include "toothsparse/predictor.hpp"
#include "toothsparse/rng.hpp"
#include "toothsparse/synthetic.hpp"

using namespace toothsparse;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}

  void check(const std::string& name, bool passed, const std::string& detail = "") {
    checks_.push_back({name, passed, detail});
  }

  template <typename T>
  void check_le(const std::string& name, T value, T bound) {
    std::ostringstream detail;
    detail << value << " <= " << bound;
    check(name, value <= bound, detail.str());
  }

  bool finish(int index) const {
    bool all = true;
    for (const Check& c : checks_) all = all && c.passed;
    std::cout << (all ? "[PASS]" : "[FAIL]") << " criterion " << index << ": " << title_
              << "\n";
    for (const Check& c : checks_) {
      std::cout << "       " << (c.passed ? "ok  " : "FAIL") << "  " << c.name;
      if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
      std::cout << "\n";
    }
    std::cout.flush();
    return all;
  }

 private:
  std::string title_;
  std::vector<Check> checks_;
};

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// ---------------------------------------------------------------------------
// shared cohort machinery for criteria 4-6

SynthConfig acceptance_config(std::size_t subjects, std::size_t rank, double noise,
                              std::uint64_t seed) {
  SynthConfig config;
  config.n_subjects = subjects;
  config.latent_rank = rank;
  config.noise_sigma = noise;
  config.seed = seed;
  return config;
}

PredictionConfig prediction_config(double eps_rel, int iterations) {
  PredictionConfig config;
  config.iterations = iterations;
  config.bpdn.epsilon_mode = EpsilonMode::relative;
  config.bpdn.epsilon_value = eps_rel;
  return config;
}

// ---------------------------------------------------------------------------

bool criterion_1_solver_oracle() {
  Criterion crit("BPDN solver matches the exact LP oracle");
  const auto start = std::chrono::steady_clock::now();

  Rng rng(20240001);
  BpdnConfig config;
  config.epsilon_mode = EpsilonMode::absolute;
  config.epsilon_value = 0.0;

  double worst_gap = 0.0;
  double worst_slack = 0.0;
  bool all_feasible = true;
  int converged_count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 3 + static_cast<Eigen::Index>(rng.next() % 10);      // <= 12
    const Eigen::Index n = m + 2 + static_cast<Eigen::Index>(rng.next() % 11);  // <= 25
    Eigen::MatrixXd dict(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) dict(i, j) = rng.normal();
    }
    Eigen::VectorXd target(m);
    for (Eigen::Index i = 0; i < m; ++i) target(i) = rng.normal();

    const SparseCode code = solve_bpdn(dict, target, config);
    all_feasible = all_feasible && code.feasible;
    if (code.converged) ++converged_count;
    worst_slack = std::max(worst_slack, code.residual_norm);

    const double oracle = testutil::min_l1_exact(dict, target);
    worst_gap = std::max(worst_gap, std::abs(code.l1_norm - oracle) / oracle);
  }
  crit.check("100/100 instances returned feasible codings", all_feasible,
             std::to_string(converged_count) + "/100 met the ADMM stopping tolerance");
  crit.check_le("worst relative l1 gap vs LP oracle", worst_gap, 1e-4);
  crit.check_le("worst feasibility slack (epsilon = 0)", worst_slack, 1e-6);

  // epsilon sweep: optimal l1 must be non-increasing in epsilon
  {
    Eigen::MatrixXd dict(10, 18);
    for (Eigen::Index j = 0; j < 18; ++j) {
      for (Eigen::Index i = 0; i < 10; ++i) dict(i, j) = rng.normal();
    }
    Eigen::VectorXd target(10);
    for (Eigen::Index i = 0; i < 10; ++i) target(i) = rng.normal();
    double previous = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double eps : {0.0, 0.02, 0.05, 0.1, 0.3, 1.0}) {
      BpdnConfig swept = config;
      swept.epsilon_value = eps;
      const SparseCode code = solve_bpdn(dict, target, swept);
      monotone = monotone && code.l1_norm <= previous * (1.0 + 1e-7) + 1e-12;
      previous = code.l1_norm;
    }
    crit.check("l1 optimum non-increasing over an epsilon sweep", monotone);
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 30.0);
  return crit.finish(1);
}

bool criterion_2_registration() {
  Criterion crit("Procrustes and CPD registration correctness");
  const auto start = std::chrono::steady_clock::now();

  Rng rng(20240002);
  double worst_rms = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PointCloud source = testutil::random_cloud(rng, 6);
    const RigidTransform motion = testutil::random_rigid(rng);
    const PointCloud target = apply_transform(motion, source);
    const RigidTransform fit = procrustes_rigid(source, target);
    worst_rms = std::max(worst_rms, alignment_rms(fit, source, target));
  }
  crit.check_le("Procrustes worst RMS over 1000 rigid recoveries (mm)", worst_rms, 1e-9);

  {
    const PointCloud source = testutil::random_cloud(rng, 100, 15.0);
    PointCloud target = source;
    for (Point3& p : target) p += Point3(5, 0, 0);
    CpdConfig config;
    config.lambda = 0.5;
    const CpdResult result = cpd_nonrigid(source, target, config);
    crit.check_le("CPD translation recovery mean error (mm)",
                  testutil::mean_distance(result.deformed, target), 0.1);
  }

  {
    PointCloud source;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) source.emplace_back(i * 1.05, j * 1.05, 0.0);
    }
    PointCloud target = source;
    for (Point3& p : target) p.z() = std::sin(p.x() / 5.0);

    const CpdResult result = cpd_nonrigid(source, target, CpdConfig{});
    const NeighborIndex index(target);
    double nn_sum = 0.0;
    for (const Point3& p : result.deformed) nn_sum += index.nearest(p).distance;
    const double mean_nn = nn_sum / static_cast<double>(result.deformed.size());
    crit.check_le("CPD sinusoidal bend mean NN distance / diameter",
                  mean_nn / cloud_diameter(target), 0.05);
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 60.0);
  return crit.finish(2);
}

bool criterion_3_adjacency_table() {
  Criterion crit("Adjacency resolution matches the hand-derived table");
  const auto start = std::chrono::steady_clock::now();

  const std::map<int, std::vector<int>> expected = {
      {17, {47, 16, 46, 27, 37}}, {47, {17, 16, 46, 27, 37}},
      {16, {17, 47, 46, 15, 45}}, {46, {17, 47, 16, 15, 45}},
      {15, {16, 46, 45, 14, 44}}, {45, {16, 46, 15, 14, 44}},
      {14, {15, 45, 44, 13, 43}}, {44, {15, 45, 14, 13, 43}},
      {13, {14, 44, 43, 12, 42}}, {43, {14, 44, 13, 12, 42}},
      {12, {13, 43, 42, 11, 41}}, {42, {13, 43, 12, 11, 41}},
      {11, {12, 42, 41, 21, 31}}, {41, {12, 42, 11, 21, 31}},
      {21, {11, 41, 31, 22, 32}}, {31, {11, 41, 21, 22, 32}},
      {22, {21, 31, 32, 23, 33}}, {32, {21, 31, 22, 23, 33}},
      {23, {22, 32, 33, 24, 34}}, {33, {22, 32, 23, 24, 34}},
      {24, {23, 33, 34, 25, 35}}, {34, {23, 33, 24, 25, 35}},
      {25, {24, 34, 35, 26, 36}}, {35, {24, 34, 25, 26, 36}},
      {26, {25, 35, 36, 27, 37}}, {36, {25, 35, 26, 27, 37}},
      {27, {26, 36, 37, 17, 47}}, {37, {26, 36, 27, 17, 47}},
  };

  bool all_match = true;
  int mismatches = 0;
  for (const auto& [fdi, adjacent] : expected) {
    std::set<ToothLabel> missing = {ToothLabel(fdi)};
    std::set<ToothLabel> present(all_labels().begin(), all_labels().end());
    present.erase(ToothLabel(fdi));
    std::vector<int> got;
    for (const ToothLabel& label : resolve_adjacent(missing, present, 1)) {
      got.push_back(label.fdi());
    }
    if (got != adjacent) {
      all_match = false;
      ++mismatches;
    }
  }
  crit.check("all 28 single-missing cases (incl. 4 wraparounds)", all_match,
             all_match ? "" : std::to_string(mismatches) + " mismatches");

  {
    std::set<ToothLabel> missing;
    std::set<ToothLabel> present(all_labels().begin(), all_labels().end());
    for (int fdi : {17, 16, 15, 14, 13, 12, 11, 41, 42, 43, 44, 45, 46, 47}) {
      missing.insert(ToothLabel(fdi));
      present.erase(ToothLabel(fdi));
    }
    std::vector<int> got;
    for (const ToothLabel& label : resolve_adjacent(missing, present, 1)) {
      got.push_back(label.fdi());
    }
    crit.check("14-missing pattern resolves to {21, 31, 27, 37}",
               got == std::vector<int>{21, 31, 27, 37});
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 1.0);
  return crit.finish(3);
}

bool criterion_4_in_dictionary() {
  Criterion crit("In-dictionary recovery at epsilon relative 1e-6");
  const auto start = std::chrono::steady_clock::now();

  // 10 training subjects; smaller tooth sampling keeps this inside its
  // runtime budget (the recovery property is independent of point density).
  SynthConfig config = acceptance_config(10, 5, 0.0, 20240004);
  config.resample_fraction = 0.0;
  for (const ToothLabel& label : all_labels()) {
    config.points_per_tooth[label] = 48 + 12 * static_cast<std::size_t>(label.position());
  }
  const SynthCohort cohort = generate_cohort(config);
  const auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> train_ids;
  for (const auto& s : subjects) train_ids.push_back(s.model.subject_id);
  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, train_ids, CpdConfig{});

  const PredictionConfig pred_config = prediction_config(1e-6, 8);

  struct Case {
    std::size_t subject;
    ToothLabel label;
  };
  std::vector<Case> cases;
  for (std::size_t j = 0; j < subjects.size(); ++j) {
    for (const ToothLabel& label : all_labels()) cases.push_back({j, label});
  }

  std::vector<double> errors(cases.size());
  parallel_for(cases.size(), [&](std::size_t i) {
    const EvaluationSubject& subject = subjects[cases[i].subject];
    DentalModel reduced = subject.model;
    reduced.teeth.erase(cases[i].label);
    const PredictionResult result =
        predict(reduced, {cases[i].label}, dicts, cohort.dental_template, pred_config);
    errors[i] = prediction_error(result.predicted_subject_frame.at(cases[i].label),
                                 subject.truth.at(cases[i].label));
  });

  crit.check_le("mean over 280 single-missing recoveries (mm)", mean_of(errors), 1e-3);
  crit.check_le("worst single recovery (mm)",
                *std::max_element(errors.begin(), errors.end()), 1e-2);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 300.0);
  return crit.finish(4);
}

bool criterion_5_span_recovery() {
  Criterion crit("Span recovery on the noiseless rank-8 cohort (100 train / 33 test)");
  const auto start = std::chrono::steady_clock::now();

  SynthConfig config = acceptance_config(133, 8, 0.0, 20240005);
  config.resample_fraction = 0.0;  // noiseless span-recovery cohort
  const SynthCohort cohort = generate_cohort(config);
  const auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> ids;
  for (const auto& s : subjects) ids.push_back(s.model.subject_id);
  const SplitSpec split = make_split(ids, 100, 20240005);

  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, split.train_ids, CpdConfig{});

  const MetricsReport report = run_single_missing_sweep(
      subjects, cohort.dental_template, dicts, prediction_config(1e-4, 3));

  std::vector<double> sweep_errors;
  for (const MetricsRow& row : report.rows) sweep_errors.push_back(row.prediction_error_mm);
  const double mean_sweep = mean_of(sweep_errors);

  // Oracle: least-squares projection of the jitter-free ground-truth adjacent
  // stack onto the training span, transferred to the missing tooth.
  std::map<std::string, const EvaluationSubject*> by_id;
  for (const auto& s : subjects) by_id[s.model.subject_id] = &s;
  std::map<std::string, const SynthSubject*> synth_by_id;
  for (const auto& s : cohort.subjects) synth_by_id[s.model.subject_id] = &s;

  std::vector<double> oracle_errors;
  for (const ToothLabel& label : all_labels()) {
    std::set<ToothLabel> missing = {label};
    std::set<ToothLabel> present(all_labels().begin(), all_labels().end());
    present.erase(label);
    const std::vector<ToothLabel> adjacent = resolve_adjacent(missing, present, 1);
    const PreparedDictionary prepared(stack_dictionaries(dicts, adjacent));
    const Eigen::MatrixXd& d_missing = dicts.at(label).data;

    for (const std::string& test_id : split.test_ids) {
      const SynthSubject& synth = *synth_by_id.at(test_id);
      const RigidTransform undo = inverse(synth.jitter);
      std::vector<double> stacked;
      for (const ToothLabel& a : adjacent) {
        for (const Point3& p : synth.ground_truth.at(a).cloud) {
          const Point3 q = undo(p);
          stacked.push_back(q.x());
          stacked.push_back(q.y());
          stacked.push_back(q.z());
        }
      }
      Eigen::VectorXd a_adj(static_cast<Eigen::Index>(stacked.size()));
      for (std::size_t i = 0; i < stacked.size(); ++i) {
        a_adj(static_cast<Eigen::Index>(i)) = stacked[i];
      }

      // minimum-norm least squares through the prepared SVD
      const Eigen::VectorXd a_u = prepared.u().transpose() * a_adj;
      Eigen::VectorXd coeff_reduced(prepared.singular_values().size());
      const double cut = prepared.singular_values()(0) * 1e-12;
      for (Eigen::Index i = 0; i < coeff_reduced.size(); ++i) {
        coeff_reduced(i) = prepared.singular_values()(i) > cut
                               ? a_u(i) / prepared.singular_values()(i)
                               : 0.0;
      }
      const Eigen::VectorXd c_ls = prepared.v() * coeff_reduced;

      const PointCloud prediction = from_coordinate_vector(d_missing * c_ls);
      const PointCloud truth =
          apply_transform(undo, synth_by_id.at(test_id)->ground_truth.at(label).cloud);
      oracle_errors.push_back(testutil::mean_distance(prediction, truth));
    }
  }
  const double mean_oracle = mean_of(oracle_errors);
  const double bound = std::max(0.05, 2.0 * mean_oracle);

  {
    std::ostringstream detail;
    detail << "sweep " << mean_sweep << " mm, oracle " << mean_oracle << " mm, bound "
           << bound << " mm";
    crit.check("mean prediction error within the span-recovery bound",
               mean_sweep <= bound, detail.str());
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 1800.0);
  return crit.finish(5);
}

bool criterion_6_noisy_trends() {
  Criterion crit("Noisy-cohort trends (noise sigma = 0.3 mm)");
  const auto start = std::chrono::steady_clock::now();

  const SynthConfig config = acceptance_config(133, 8, 0.3, 20240006);
  const SynthCohort cohort = generate_cohort(config);
  const auto subjects = evaluation_subjects(cohort);

  std::vector<std::string> ids;
  for (const auto& s : subjects) ids.push_back(s.model.subject_id);
  const SplitSpec split = make_split(ids, 100, 20240006);

  const DictionarySet dicts =
      build_dictionaries(subjects, cohort.dental_template, split.train_ids, CpdConfig{});

  // Default epsilon (relative 0.01). On noisy cohorts this sits below the
  // noise floor of the stacked residual, so the coding runs in its
  // least-squares fallback regime; larger epsilons such as 0.04 let the l1
  // objective spend the whole ball radius shrinking coefficients, which
  // biases every prediction by about epsilon * tooth-norm / stack-norm
  // (measured: ~1 mm, on par with the copy-template baseline).
  const PredictionConfig pred_config = prediction_config(0.01, 3);

  const MetricsReport sweep = run_single_missing_sweep(subjects, cohort.dental_template,
                                                       dicts, pred_config);

  // (a) sparse prediction beats the copy-template baseline by >= 30%
  {
    std::map<std::string, const EvaluationSubject*> by_id;
    for (const auto& s : subjects) by_id[s.model.subject_id] = &s;

    std::vector<double> baseline_errors;
    for (const std::string& test_id : split.test_ids) {
      const EvaluationSubject& subject = *by_id.at(test_id);
      for (const ToothLabel& label : all_labels()) {
        DentalModel reduced = subject.model;
        reduced.teeth.erase(label);
        const auto baseline =
            baseline_template_copy(reduced, {label}, cohort.dental_template);
        baseline_errors.push_back(
            prediction_error(baseline.at(label), subject.truth.at(label)));
      }
    }

    std::vector<double> sweep_errors;
    for (const MetricsRow& row : sweep.rows) sweep_errors.push_back(row.prediction_error_mm);

    const double mean_sweep = mean_of(sweep_errors);
    const double mean_baseline = mean_of(baseline_errors);
    std::ostringstream detail;
    detail << "prediction " << mean_sweep << " mm vs baseline " << mean_baseline << " mm";
    crit.check("single-missing mean beats the template-copy baseline by >= 30%",
               mean_sweep <= 0.7 * mean_baseline, detail.str());
  }

  // (b) same-row pattern length 2 -> 7: mean error non-decreasing (10% slack)
  {
    const MetricsReport patterns = run_pattern_experiments(
        subjects, cohort.dental_template, dicts, table2_patterns(), pred_config);
    bool monotone = true;
    std::ostringstream detail;
    double previous = -1.0;
    for (const auto& pattern : table2_patterns()) {
      const double mean = patterns.pattern_mean_prediction_error(pattern_name(pattern));
      detail << mean << " ";
      if (previous >= 0.0 && mean < 0.9 * previous) monotone = false;
      previous = mean;
    }
    crit.check("mean error non-decreasing as same-row patterns grow 2 -> 7 (10% slack)",
               monotone, detail.str());
  }

  // (c) iteration 3 does not hurt on the cohort mean
  {
    std::vector<double> first;
    std::vector<double> last;
    for (const RunRecord& run : sweep.runs) {
      first.push_back(run.iteration_errors.front());
      last.push_back(run.iteration_errors.back());
    }
    std::ostringstream detail;
    detail << "iter1 " << mean_of(first) << " mm -> final " << mean_of(last) << " mm";
    crit.check("mean error after 3 iterations <= after 1 iteration",
               mean_of(last) <= mean_of(first), detail.str());
  }

  // (d) second molars are harder than the cohort average
  {
    std::vector<double> molar;
    std::vector<double> everything;
    for (const MetricsRow& row : sweep.rows) {
      everything.push_back(row.prediction_error_mm);
      if (row.tooth_fdi % 10 == 7) molar.push_back(row.prediction_error_mm);
    }
    std::ostringstream detail;
    detail << "second molars " << mean_of(molar) << " mm vs all teeth "
           << mean_of(everything) << " mm";
    crit.check("second-molar mean error exceeds the all-teeth mean",
               mean_of(molar) > mean_of(everything), detail.str());
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 3600.0);
  return crit.finish(6);
}

bool criterion_7_metric_invariants() {
  Criterion crit("Metric invariants");
  const auto start = std::chrono::steady_clock::now();

  Rng rng(20240007);
  bool shape_le_pred = true;
  bool rigid_invariant = true;
  bool displaced_zero = true;

  // Corresponded tooth clouds perturbed at evaluation-regime error levels.
  SynthConfig tooth_source;
  tooth_source.n_subjects = 1;
  const DentalTemplate pair_template = generate_template(tooth_source);
  for (int round = 0; round < 7; ++round) {
    for (const ToothLabel& label : all_labels()) {
    const PointCloud& truth_cloud = pair_template.tooth(label);
    const double sigma = rng.uniform(0.02, 0.5);
    PointCloud noisy = truth_cloud;
    for (Point3& p : noisy) {
      p += sigma * Point3(rng.normal(), rng.normal(), rng.normal());
    }
    const CorrespondedTooth truth{label, truth_cloud};
    const CorrespondedTooth predicted{label, noisy};

    const double pred = prediction_error(predicted, truth);
    const double shape = shape_error(predicted, truth);
    // An i.i.d. perturbation is the near-equality regime for the two
    // metrics; allow a 0.1% tendency slack here. Harness-evaluated pairs
    // below are held to the strict inequality.
    shape_le_pred = shape_le_pred && shape <= pred * (1.0 + 1e-3) + 1e-12;

    const RigidTransform motion = testutil::random_rigid(rng);
    const CorrespondedTooth truth_moved{label, apply_transform(motion, truth_cloud)};
    const CorrespondedTooth pred_moved{label, apply_transform(motion, noisy)};
    rigid_invariant = rigid_invariant &&
                      std::abs(prediction_error(pred_moved, truth_moved) - pred) <=
                          1e-9 * (1.0 + pred) &&
                      std::abs(shape_error(pred_moved, truth_moved) - shape) <=
                          1e-9 * (1.0 + shape);

    const CorrespondedTooth displaced{label, apply_transform(motion, truth_cloud)};
    displaced_zero = displaced_zero && shape_error(displaced, truth) <= 1e-9;
    }
  }
  crit.check("i.i.d.-noise tooth pairs: shape_error <= prediction_error (0.1% slack)",
             shape_le_pred);
  crit.check("both metrics rigid-invariant to 1e-9", rigid_invariant);
  crit.check("shape_error of a rigidly displaced truth is 0 (<= 1e-9)", displaced_zero);

  // Pairs actually evaluated by the harness on a miniature noisy cohort.
  {
    SynthConfig config = testutil::small_synth_config(6, 3, 0.15, 20240017);
    const SynthCohort cohort = generate_cohort(config);
    const auto subjects = evaluation_subjects(cohort);
    std::vector<std::string> train_ids;
    for (int j = 0; j < 4; ++j) train_ids.push_back(subjects[j].model.subject_id);
    const DictionarySet dicts =
        build_dictionaries(subjects, cohort.dental_template, train_ids, CpdConfig{});
    const MetricsReport report = run_single_missing_sweep(
        subjects, cohort.dental_template, dicts, prediction_config(0.02, 2));

    bool sweep_ok = !report.rows.empty();
    for (const MetricsRow& row : report.rows) {
      sweep_ok = sweep_ok && row.shape_error_mm <= row.prediction_error_mm + 1e-12;
    }
    crit.check("sweep pairs: shape_error <= prediction_error on all " +
                   std::to_string(report.rows.size()) + " rows",
               sweep_ok);
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 10.0);
  return crit.finish(7);
}

bool criterion_8_determinism() {
  Criterion crit("Determinism and round-trips");
  const auto start = std::chrono::steady_clock::now();

  const fs::path work =
      fs::temp_directory_path() / ("toothsparse_acceptance8_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  // dictionary file: bit-exact round-trip plus checksum validation
  {
    SynthConfig config = testutil::small_synth_config(6, 3, 0.1, 20240008);
    const SynthCohort cohort = generate_cohort(config);
    const auto subjects = evaluation_subjects(cohort);
    std::vector<std::string> ids;
    for (const auto& s : subjects) ids.push_back(s.model.subject_id);
    const DictionarySet dicts =
        build_dictionaries(subjects, cohort.dental_template, ids, CpdConfig{});

    const fs::path file_a = work / "a.tds";
    const fs::path file_b = work / "b.tds";
    save_dictionary_set(dicts, file_a);
    const DictionarySet loaded = load_dictionary_set(file_a);
    bool bit_exact = loaded.subject_ids() == dicts.subject_ids();
    for (const ToothLabel& label : all_labels()) {
      bit_exact = bit_exact && loaded.at(label).data == dicts.at(label).data;
    }
    crit.check("dictionary save/load round-trips bit-exactly", bit_exact);

    save_dictionary_set(loaded, file_b);
    std::ifstream fa(file_a, std::ios::binary), fb(file_b, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                              std::istreambuf_iterator<char>());
    crit.check("re-serialized dictionary bytes are identical", bytes_a == bytes_b);

    std::string corrupted = bytes_a;
    corrupted[corrupted.size() / 2] ^= 0x01;
    {
      std::ofstream out(file_a, std::ios::binary | std::ios::trunc);
      out << corrupted;
    }
    bool checksum_caught = false;
    try {
      load_dictionary_set(file_a);
    } catch (const DataError&) {
      checksum_caught = true;
    }
    crit.check("checksum validation rejects a corrupted file", checksum_caught);
  }

  // cohort generation: identical inputs give byte-identical trees
  {
    SynthConfig config = testutil::small_synth_config(5, 3, 0.2, 20240009);
    const SynthCohort first = generate_cohort(config);
    const SynthCohort second = generate_cohort(config);

    const fs::path dir_a = work / "cohort_a";
    const fs::path dir_b = work / "cohort_b";
    write_cohort(dir_a, first);
    write_cohort(dir_b, second);

    bool identical = true;
    for (const auto& entry : fs::recursive_directory_iterator(dir_a)) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = fs::relative(entry.path(), dir_a);
      std::ifstream fa(entry.path(), std::ios::binary), fb(dir_b / rel, std::ios::binary);
      const std::string a((std::istreambuf_iterator<char>(fa)),
                          std::istreambuf_iterator<char>());
      const std::string b((std::istreambuf_iterator<char>(fb)),
                          std::istreambuf_iterator<char>());
      identical = identical && a == b;
    }
    crit.check("repeated cohort generation writes byte-identical files", identical);
  }

  // rank check: K = 5 cohort has numerical rank <= 5 after centering
  {
    SynthConfig config = testutil::small_synth_config(40, 5, 0.0, 20240010);
    const SynthCohort cohort = generate_cohort(config);

    std::size_t rows = 0;
    for (const ToothLabel& label : all_labels()) {
      rows += 3 * cohort.dental_template.point_count(label);
    }
    Eigen::MatrixXd coords(rows, static_cast<Eigen::Index>(cohort.subjects.size()));
    for (std::size_t j = 0; j < cohort.subjects.size(); ++j) {
      const RigidTransform undo = inverse(cohort.subjects[j].jitter);
      Eigen::Index offset = 0;
      for (const ToothLabel& label : all_labels()) {
        const Eigen::VectorXd vec = to_coordinate_vector(
            apply_transform(undo, cohort.subjects[j].ground_truth.at(label).cloud));
        coords.block(offset, static_cast<Eigen::Index>(j), vec.size(), 1) = vec;
        offset += vec.size();
      }
    }
    coords.colwise() -= coords.rowwise().mean().eval();
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(coords);
    const Eigen::VectorXd sv = svd.singularValues();
    std::ostringstream detail;
    detail << "sigma6/sigma1 = " << sv(5) / sv(0);
    crit.check("rank-5 cohort: 6th singular value below 1e-8 of the first",
               sv(5) <= 1e-8 * sv(0), detail.str());
  }

  fs::remove_all(work);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  crit.check_le("runtime seconds", seconds, 60.0);
  return crit.finish(8);
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<bool()>> criteria = {
      {1, criterion_1_solver_oracle},  {2, criterion_2_registration},
      {3, criterion_3_adjacency_table}, {4, criterion_4_in_dictionary},
      {5, criterion_5_span_recovery},  {6, criterion_6_noisy_trends},
      {7, criterion_7_metric_invariants}, {8, criterion_8_determinism},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (criteria.count(id) == 0) {
      std::cerr << "unknown criterion '" << argv[i] << "' (valid: 1..8)\n";
      return 2;
    }
    selected.push_back(id);
  }
  if (selected.empty()) {
    for (const auto& [id, fn] : criteria) selected.push_back(id);
  }

  bool all = true;
  for (int id : selected) {
    try {
      all = criteria.at(id)() && all;
    } catch (const std::exception& e) {
      std::cout << "[FAIL] criterion " << id << ": exception: " << e.what() << "\n";
      all = false;
    }
  }
  return all ? 0 : 1;
}
