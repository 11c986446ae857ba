#include "toothsparse/cohort_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "toothsparse/errors.hpp"

namespace toothsparse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_coord(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_coord(std::string_view token, const fs::path& path) {
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    throw DataError("read_xyz: bad coordinate '" + std::string(token) + "' in '" +
                    path.string() + "'");
  }
  return value;
}

}  // namespace

void write_xyz(const fs::path& path, const PointCloud& cloud) {
  require_valid_cloud(cloud, "write_xyz");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("write_xyz: cannot open '" + path.string() + "'");
  for (const Point3& p : cloud) {
    out << format_coord(p.x()) << ' ' << format_coord(p.y()) << ' '
        << format_coord(p.z()) << '\n';
  }
  if (!out) throw DataError("write_xyz: write failed for '" + path.string() + "'");
}

PointCloud read_xyz(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_xyz: cannot open '" + path.string() + "'");

  PointCloud cloud;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream words(line);
    std::string x, y, z, extra;
    if (!(words >> x >> y >> z) || (words >> extra)) {
      throw DataError("read_xyz: expected 'x y z' per line in '" + path.string() + "'");
    }
    cloud.emplace_back(parse_coord(x, path), parse_coord(y, path), parse_coord(z, path));
  }
  if (cloud.empty()) throw DataError("read_xyz: no points in '" + path.string() + "'");
  return cloud;
}

void write_subject(const fs::path& dir, const DentalModel& model, bool corresponded,
                   const std::map<ToothLabel, CorrespondedTooth>* truth) {
  model.validate();
  fs::create_directories(dir);

  json manifest;
  manifest["subject_id"] = model.subject_id;
  manifest["corresponded"] = corresponded;
  std::vector<int> labels;
  for (const auto& [label, cloud] : model.teeth) {
    labels.push_back(label.fdi());
    write_xyz(dir / (std::to_string(label.fdi()) + ".xyz"), cloud);
  }
  manifest["labels"] = labels;

  if (truth != nullptr && !truth->empty()) {
    fs::create_directories(dir / "truth");
    std::vector<int> truth_labels;
    for (const auto& [label, tooth] : *truth) {
      truth_labels.push_back(label.fdi());
      write_xyz(dir / "truth" / (std::to_string(label.fdi()) + ".xyz"), tooth.cloud);
    }
    manifest["truth_labels"] = truth_labels;
  }

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw DataError("write_subject: cannot open manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << '\n';
}

SubjectRecord read_subject(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("read_subject: no manifest.json in '" + dir.string() + "'");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("read_subject: bad manifest in '" + dir.string() + "': " + e.what());
  }

  SubjectRecord record;
  record.model.subject_id = manifest.at("subject_id").get<std::string>();
  record.corresponded = manifest.value("corresponded", false);

  for (const int fdi : manifest.at("labels").get<std::vector<int>>()) {
    ToothLabel label{fdi};
    record.model.teeth.emplace(label,
                               read_xyz(dir / (std::to_string(fdi) + ".xyz")));
  }
  record.model.validate();

  if (manifest.contains("truth_labels")) {
    for (const int fdi : manifest.at("truth_labels").get<std::vector<int>>()) {
      ToothLabel label{fdi};
      record.truth.emplace(
          label, CorrespondedTooth{
                     label, read_xyz(dir / "truth" / (std::to_string(fdi) + ".xyz"))});
    }
  }
  return record;
}

void write_template(const fs::path& dir, const DentalTemplate& dental_template) {
  fs::create_directories(dir);
  for (const auto& [label, cloud] : dental_template.teeth()) {
    write_xyz(dir / (std::to_string(label.fdi()) + ".xyz"), cloud);
  }
}

DentalTemplate read_template(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw DataError("read_template: '" + dir.string() + "' is not a directory");
  }
  std::map<ToothLabel, PointCloud> teeth;
  for (const ToothLabel& label : all_labels()) {
    const fs::path file = dir / (std::to_string(label.fdi()) + ".xyz");
    if (!fs::exists(file)) {
      throw DataError("read_template: missing tooth file '" + file.string() + "'");
    }
    teeth.emplace(label, read_xyz(file));
  }
  return DentalTemplate(std::move(teeth));
}

void write_cohort(const fs::path& root, const SynthCohort& cohort) {
  fs::create_directories(root);
  write_template(root / "template", cohort.dental_template);
  for (const SynthSubject& subject : cohort.subjects) {
    write_subject(root / subject.model.subject_id, subject.model,
                  /*corresponded=*/false, &subject.ground_truth);
  }
}

std::vector<SubjectRecord> read_cohort_subjects(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw DataError("read_cohort_subjects: '" + root.string() + "' is not a directory");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());

  std::vector<SubjectRecord> subjects;
  subjects.reserve(dirs.size());
  for (const fs::path& dir : dirs) subjects.push_back(read_subject(dir));
  std::sort(subjects.begin(), subjects.end(),
            [](const SubjectRecord& a, const SubjectRecord& b) {
              return a.model.subject_id < b.model.subject_id;
            });
  if (subjects.empty()) {
    throw DataError("read_cohort_subjects: no subject directories under '" +
                    root.string() + "'");
  }
  return subjects;
}

std::vector<EvaluationSubject> read_evaluation_cohort(const fs::path& root) {
  std::vector<EvaluationSubject> out;
  for (SubjectRecord& record : read_cohort_subjects(root)) {
    if (record.truth.empty()) {
      throw DataError("read_evaluation_cohort: subject '" + record.model.subject_id +
                      "' has no ground-truth clouds");
    }
    out.push_back(EvaluationSubject{std::move(record.model), std::move(record.truth)});
  }
  return out;
}

}  // namespace toothsparse
