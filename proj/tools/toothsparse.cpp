// toothsparse: predict the 3D position and shape of missing teeth from the
// remaining teeth of a dental model, using per-tooth coordinate dictionaries
// and l1 sparse coding; includes a synthetic cohort generator so the whole
// pipeline can be exercised end to end.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <string>

#include "toothsparse/cohort_io.hpp"
#include "toothsparse/correspondence.hpp"
#include "toothsparse/dictionary.hpp"
#include "toothsparse/errors.hpp"
#include "toothsparse/evaluation.hpp"
#include "toothsparse/predictor.hpp"
#include "toothsparse/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toothsparse;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

void emit_error(const std::string& category, const std::string& message) {
  json record;
  record["error"] = category;
  record["message"] = message;
  std::cerr << record.dump() << std::endl;
}

/// Every run leaves a manifest beside its outputs with enough to re-run it.
struct RunManifest {
  std::string command;
  json config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_at = now_iso8601();

  void write(const fs::path& path) const {
    json manifest;
    manifest["tool"] = "toothsparse";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["started_at"] = started_at;
    manifest["finished_at"] = now_iso8601();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
    out << manifest.dump(2) << '\n';
  }
};

std::set<ToothLabel> parse_missing_list(const std::string& csv) {
  std::set<ToothLabel> out;
  std::string token;
  std::istringstream stream(csv);
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    int fdi = 0;
    try {
      fdi = std::stoi(token);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--missing", "bad FDI code '" + token + "'");
    }
    try {
      out.insert(ToothLabel(fdi));
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--missing", e.what());
    }
  }
  if (out.empty()) {
    throw CLI::ValidationError("--missing", "needs at least one FDI code");
  }
  return out;
}

std::vector<std::vector<ToothLabel>> load_patterns(const std::string& spec) {
  if (spec == "table2") return table2_patterns();
  if (spec == "table3") return table3_patterns();

  std::ifstream in(spec);
  if (!in) throw DataError("cannot open pattern file '" + spec + "'");
  std::vector<std::vector<ToothLabel>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<ToothLabel> pattern;
    std::string token;
    std::istringstream stream(line);
    while (std::getline(stream, token, ',')) {
      if (token.empty()) continue;
      try {
        pattern.emplace_back(std::stoi(token));
      } catch (const std::exception&) {
        throw DataError("bad FDI code '" + token + "' in '" + spec + "'");
      }
    }
    if (!pattern.empty()) out.push_back(std::move(pattern));
  }
  if (out.empty()) throw DataError("no patterns in '" + spec + "'");
  return out;
}

json cpd_config_json(const CpdConfig& cpd) {
  return json{{"beta", cpd.beta},
              {"lambda", cpd.lambda},
              {"outlier_weight", cpd.outlier_weight},
              {"max_iterations", cpd.max_iterations},
              {"tolerance", cpd.tolerance}};
}

json bpdn_config_json(const BpdnConfig& bpdn) {
  return json{{"epsilon_mode", bpdn.epsilon_mode == EpsilonMode::relative ? "relative" : "absolute"},
              {"epsilon_value", bpdn.epsilon_value},
              {"max_iterations", bpdn.max_iterations},
              {"tol_abs", bpdn.tol_abs},
              {"tol_rel", bpdn.tol_rel}};
}

int run_synth(const fs::path& out_dir, const SynthConfig& config) {
  const SynthCohort cohort = generate_cohort(config);
  fs::create_directories(out_dir);
  write_cohort(out_dir, cohort);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.config = json{{"subjects", config.n_subjects},
                         {"rank", config.latent_rank},
                         {"noise", config.noise_sigma},
                         {"seed", config.seed},
                         {"permute", config.permute_points},
                         {"resample", config.resample_fraction},
                         {"jitter_rotation_deg", config.jitter_rotation_deg},
                         {"jitter_translation_mm", config.jitter_translation_mm}};
  manifest.outputs = {out_dir.string()};
  manifest.write(out_dir / "run_manifest.json");
  std::cout << "wrote " << config.n_subjects << " subjects + template to " << out_dir
            << std::endl;
  return kExitOk;
}

int run_correspond(const fs::path& cohort_dir, const fs::path& template_dir,
                   const fs::path& out_dir, const CpdConfig& cpd) {
  const DentalTemplate dental_template = read_template(template_dir);
  const std::vector<SubjectRecord> subjects = read_cohort_subjects(cohort_dir);

  fs::create_directories(out_dir);
  for (const SubjectRecord& record : subjects) {
    const auto corresponded = correspond_model(record.model, dental_template, cpd);
    DentalModel output;
    output.subject_id = record.model.subject_id;
    for (const auto& [label, tooth] : corresponded) output.teeth.emplace(label, tooth.cloud);
    write_subject(out_dir / output.subject_id, output, /*corresponded=*/true);
  }

  RunManifest manifest;
  manifest.command = "correspond";
  manifest.config = json{{"cpd", cpd_config_json(cpd)}};
  manifest.inputs = {cohort_dir.string(), template_dir.string()};
  manifest.outputs = {out_dir.string()};
  manifest.write(out_dir / "run_manifest.json");
  std::cout << "corresponded " << subjects.size() << " subjects into " << out_dir
            << std::endl;
  return kExitOk;
}

int run_build_dict(const fs::path& corresponded_dir, const fs::path& out_file,
                   std::size_t train_count, std::uint64_t split_seed) {
  const std::vector<SubjectRecord> subjects = read_cohort_subjects(corresponded_dir);

  std::vector<std::string> ids;
  for (const SubjectRecord& record : subjects) {
    if (!record.corresponded) {
      throw DataError("build-dict: subject '" + record.model.subject_id +
                      "' is not corresponded; run `correspond` first");
    }
    ids.push_back(record.model.subject_id);
  }

  std::vector<std::string> train_ids = ids;
  if (train_count > 0 && train_count < ids.size()) {
    train_ids = make_split(ids, train_count, split_seed).train_ids;
  }
  std::set<std::string> train_set(train_ids.begin(), train_ids.end());

  std::map<ToothLabel, std::vector<CorrespondedTooth>> per_label;
  for (const SubjectRecord& record : subjects) {
    if (train_set.count(record.model.subject_id) == 0) continue;
    if (record.model.teeth.size() != all_labels().size()) {
      throw DataError("build-dict: subject '" + record.model.subject_id +
                      "' does not have all 28 teeth");
    }
    for (const auto& [label, cloud] : record.model.teeth) {
      per_label[label].push_back(CorrespondedTooth{label, cloud});
    }
  }

  std::map<ToothLabel, ToothDictionary> dictionaries;
  for (const auto& [label, teeth] : per_label) {
    dictionaries.emplace(label, build_dictionary(label, teeth, train_ids));
  }
  const DictionarySet set(std::move(dictionaries), train_ids);
  save_dictionary_set(set, out_file);

  RunManifest manifest;
  manifest.command = "build-dict";
  manifest.config = json{{"train", train_count}, {"split_seed", split_seed},
                         {"train_ids", train_ids}};
  manifest.inputs = {corresponded_dir.string()};
  manifest.outputs = {out_file.string()};
  manifest.write(out_file.parent_path().empty()
                     ? fs::path(out_file.string() + ".manifest.json")
                     : out_file.parent_path() / (out_file.filename().string() +
                                                 ".manifest.json"));
  std::cout << "built dictionaries over " << train_ids.size() << " subjects into "
            << out_file << std::endl;
  return kExitOk;
}

int run_predict(const fs::path& model_dir, const std::set<ToothLabel>& missing,
                const fs::path& dict_file, const fs::path& template_dir,
                const fs::path& out_dir, const PredictionConfig& config) {
  const SubjectRecord record = read_subject(model_dir);
  const DictionarySet dicts = load_dictionary_set(dict_file);
  const DentalTemplate dental_template = read_template(template_dir);

  DentalModel model = record.model;
  for (const ToothLabel& m : missing) model.teeth.erase(m);

  const PredictionResult result =
      predict(model, missing, dicts, dental_template, config,
              record.truth.empty() ? nullptr : &record.truth);

  fs::create_directories(out_dir / "predicted");
  fs::create_directories(out_dir / "predicted_template_frame");
  for (const auto& [label, tooth] : result.predicted_subject_frame) {
    write_xyz(out_dir / "predicted" / (std::to_string(label.fdi()) + ".xyz"), tooth.cloud);
  }
  for (const auto& [label, tooth] : result.predicted_template_frame) {
    write_xyz(out_dir / "predicted_template_frame" / (std::to_string(label.fdi()) + ".xyz"),
              tooth.cloud);
  }

  json sparse;
  sparse["l1_norm"] = result.sparse_code.l1_norm;
  sparse["residual_norm"] = result.sparse_code.residual_norm;
  sparse["least_squares_residual"] = result.sparse_code.least_squares_residual;
  sparse["iterations_used"] = result.sparse_code.iterations_used;
  sparse["converged"] = result.sparse_code.converged;
  sparse["feasible"] = result.sparse_code.feasible;
  sparse["coefficient_sum"] = result.sparse_code.coefficient_sum;
  sparse["coefficients"] = std::vector<double>(
      result.sparse_code.coefficients.data(),
      result.sparse_code.coefficients.data() + result.sparse_code.coefficients.size());
  {
    std::ofstream out(out_dir / "sparse_code.json", std::ios::trunc);
    out << sparse.dump(2) << '\n';
  }

  json diagnostics;
  std::vector<int> adjacent;
  for (const ToothLabel& label : result.adjacent_labels) adjacent.push_back(label.fdi());
  diagnostics["adjacent_teeth"] = adjacent;
  json iterations = json::array();
  for (const IterationDiagnostics& diag : result.per_iteration) {
    json item;
    item["residual_norm"] = diag.residual_norm;
    item["bpdn_feasible"] = diag.bpdn_feasible;
    item["bpdn_converged"] = diag.bpdn_converged;
    if (diag.mean_movement) item["mean_movement_mm"] = *diag.mean_movement;
    if (diag.ground_truth_error) item["ground_truth_error_mm"] = *diag.ground_truth_error;
    iterations.push_back(std::move(item));
  }
  diagnostics["iterations"] = iterations;
  {
    std::ofstream out(out_dir / "diagnostics.json", std::ios::trunc);
    out << diagnostics.dump(2) << '\n';
  }

  RunManifest manifest;
  manifest.command = "predict";
  std::vector<int> missing_fdi;
  for (const ToothLabel& m : missing) missing_fdi.push_back(m.fdi());
  manifest.config = json{{"missing", missing_fdi},
                         {"iterations", config.iterations},
                         {"t", config.adjacency_radius},
                         {"cpd", cpd_config_json(config.cpd)},
                         {"bpdn", bpdn_config_json(config.bpdn)}};
  manifest.inputs = {model_dir.string(), dict_file.string(), template_dir.string()};
  manifest.outputs = {out_dir.string()};
  manifest.write(out_dir / "run_manifest.json");

  if (!result.sparse_code.feasible || !result.sparse_code.converged) {
    emit_error("numerical",
               "sparse coding did not converge at the configured epsilon "
               "(least-squares residual " +
                   std::to_string(result.sparse_code.least_squares_residual) +
                   " mm); predictions written as best effort");
    return kExitNumerical;
  }
  std::cout << "predicted " << missing.size() << " teeth into " << out_dir << std::endl;
  return kExitOk;
}

int run_evaluate(const std::string& mode, const std::string& patterns_spec,
                 const fs::path& cohort_dir, const fs::path& dict_file,
                 const fs::path& out_dir, const PredictionConfig& config) {
  const std::vector<EvaluationSubject> cohort = read_evaluation_cohort(cohort_dir);
  const DictionarySet dicts = load_dictionary_set(dict_file);
  const DentalTemplate dental_template = read_template(cohort_dir / "template");

  MetricsReport report;
  if (mode == "single-sweep") {
    report = run_single_missing_sweep(cohort, dental_template, dicts, config);
  } else {
    report = run_pattern_experiments(cohort, dental_template, dicts,
                                     load_patterns(patterns_spec), config);
  }

  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "report.csv", std::ios::trunc);
    write_report_csv(report, out);
  }
  {
    std::ofstream out(out_dir / "summary.txt", std::ios::trunc);
    write_report_summary(report, out);
  }

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config = json{{"mode", mode},
                         {"patterns", patterns_spec},
                         {"iterations", config.iterations},
                         {"t", config.adjacency_radius},
                         {"cpd", cpd_config_json(config.cpd)},
                         {"bpdn", bpdn_config_json(config.bpdn)}};
  manifest.inputs = {cohort_dir.string(), dict_file.string()};
  manifest.outputs = {(out_dir / "report.csv").string(), (out_dir / "summary.txt").string()};
  manifest.write(out_dir / "run_manifest.json");
  std::cout << "evaluated " << report.rows.size() << " prediction rows into " << out_dir
            << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missing-teeth prediction from per-tooth sparse coding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort + template");
  std::string synth_out;
  SynthConfig synth_config;
  double points_scale = 1.0;
  bool no_permute = false;
  synth->add_option("--out", synth_out, "output cohort directory")->required();
  synth->add_option("--subjects", synth_config.n_subjects, "number of subjects");
  synth->add_option("--rank", synth_config.latent_rank, "latent deformation rank K");
  synth->add_option("--noise", synth_config.noise_sigma, "per-point noise sigma (mm)");
  synth->add_option("--seed", synth_config.seed, "generator seed");
  synth->add_option("--resample", synth_config.resample_fraction,
                    "fraction of raw points dropped per tooth");
  synth->add_flag("--no-permute", no_permute, "keep raw point order");
  synth->add_option("--points-scale", points_scale,
                    "scale factor on per-type point counts");

  // correspond
  auto* correspond = app.add_subcommand("correspond", "correspond a cohort to a template");
  std::string corr_cohort, corr_template, corr_out;
  CpdConfig corr_cpd;
  correspond->add_option("--cohort", corr_cohort, "cohort directory")->required();
  correspond->add_option("--template", corr_template, "template directory")->required();
  correspond->add_option("--out", corr_out, "output directory")->required();
  correspond->add_option("--beta", corr_cpd.beta, "CPD kernel width");
  correspond->add_option("--lambda", corr_cpd.lambda, "CPD coherence weight");

  // build-dict
  auto* build = app.add_subcommand("build-dict", "build tooth dictionaries");
  std::string build_in, build_out;
  std::size_t build_train = 0;
  std::uint64_t build_seed = 0;
  build->add_option("--corresponded", build_in, "corresponded cohort directory")->required();
  build->add_option("--out", build_out, "output dictionary file (.tds)")->required();
  build->add_option("--train", build_train,
                    "training subject count (0 = all subjects)");
  build->add_option("--split-seed", build_seed, "seed for the train/test split");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "predict missing teeth for one model");
  std::string pred_model, pred_missing, pred_dict, pred_template, pred_out;
  PredictionConfig pred_config;
  double eps_rel = 0.01;
  double eps_abs = -1.0;
  predict_cmd->add_option("--model", pred_model, "subject directory")->required();
  predict_cmd->add_option("--missing", pred_missing, "comma-separated FDI codes")->required();
  predict_cmd->add_option("--dict", pred_dict, "dictionary file")->required();
  predict_cmd->add_option("--template", pred_template, "template directory")->required();
  predict_cmd->add_option("--out", pred_out, "output directory")->required();
  predict_cmd->add_option("--iters", pred_config.iterations, "prediction iterations");
  predict_cmd->add_option("--t", pred_config.adjacency_radius, "adjacency radius");
  predict_cmd->add_option("--eps-rel", eps_rel, "epsilon as a fraction of ||target||");
  predict_cmd->add_option("--eps-abs", eps_abs, "absolute epsilon in mm (overrides --eps-rel)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run experiment catalogs over a cohort");
  std::string eval_mode, eval_patterns = "table2", eval_cohort, eval_dict, eval_out;
  PredictionConfig eval_config;
  double eval_eps_rel = 0.01;
  evaluate->add_option("--mode", eval_mode, "single-sweep | patterns")
      ->required()
      ->check(CLI::IsMember({"single-sweep", "patterns"}));
  evaluate->add_option("--patterns", eval_patterns, "pattern file, or table2 / table3");
  evaluate->add_option("--cohort", eval_cohort, "cohort directory (with ground truth)")
      ->required();
  evaluate->add_option("--dict", eval_dict, "dictionary file")->required();
  evaluate->add_option("--out", eval_out, "output directory")->required();
  evaluate->add_option("--iters", eval_config.iterations, "prediction iterations");
  evaluate->add_option("--t", eval_config.adjacency_radius, "adjacency radius");
  evaluate->add_option("--eps-rel", eval_eps_rel, "epsilon as a fraction of ||target||");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    emit_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      synth_config.permute_points = !no_permute;
      if (points_scale != 1.0) {
        if (points_scale <= 0.0) throw DataError("--points-scale must be > 0");
        for (const ToothLabel& label : all_labels()) {
          const auto scaled = static_cast<std::size_t>(
              std::max(4.0, std::round(points_scale * static_cast<double>(
                                                          synth_config.tooth_point_count(label)))));
          synth_config.points_per_tooth[label] = scaled;
        }
      }
      return run_synth(synth_out, synth_config);
    }
    if (correspond->parsed()) {
      return run_correspond(corr_cohort, corr_template, corr_out, corr_cpd);
    }
    if (build->parsed()) {
      return run_build_dict(build_in, build_out, build_train, build_seed);
    }
    if (predict_cmd->parsed()) {
      const std::set<ToothLabel> missing = parse_missing_list(pred_missing);
      if (eps_abs >= 0.0) {
        pred_config.bpdn.epsilon_mode = EpsilonMode::absolute;
        pred_config.bpdn.epsilon_value = eps_abs;
      } else {
        pred_config.bpdn.epsilon_mode = EpsilonMode::relative;
        pred_config.bpdn.epsilon_value = eps_rel;
      }
      return run_predict(pred_model, missing, pred_dict, pred_template, pred_out,
                         pred_config);
    }
    if (evaluate->parsed()) {
      eval_config.bpdn.epsilon_mode = EpsilonMode::relative;
      eval_config.bpdn.epsilon_value = eval_eps_rel;
      if (eval_mode == "patterns" && eval_patterns.empty()) {
        emit_error("usage", "--patterns is required with --mode patterns");
        return kExitUsage;
      }
      return run_evaluate(eval_mode, eval_patterns, eval_cohort, eval_dict, eval_out,
                          eval_config);
    }
  } catch (const CLI::ValidationError& e) {
    emit_error("usage", e.what());
    return kExitUsage;
  } catch (const NumericalError& e) {
    emit_error("numerical", e.what());
    return kExitNumerical;
  } catch (const DataError& e) {
    emit_error("data", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    emit_error("data", e.what());
    return kExitData;
  }
  return kExitUsage;
}
