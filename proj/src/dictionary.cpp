#include "toothsparse/dictionary.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "toothsparse/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "dictionary file writer assumes a little-endian host");
static_assert(sizeof(double) == 8, "dictionary file format needs 64-bit doubles");

namespace toothsparse {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'T', 'D', 'S', '1'};

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size,
                      std::uint64_t hash = 0xcbf29ce484222325ull) {
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= data[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t read_u64(const std::uint8_t* bytes) {
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

DictionarySet::DictionarySet(std::map<ToothLabel, ToothDictionary> dictionaries,
                             std::vector<std::string> subject_ids)
    : dictionaries_(std::move(dictionaries)), subject_ids_(std::move(subject_ids)) {
  if (dictionaries_.size() != all_labels().size()) {
    throw DataError("DictionarySet: expected 28 dictionaries, got " +
                    std::to_string(dictionaries_.size()));
  }
  if (subject_ids_.empty()) throw DataError("DictionarySet: no subjects");
  for (const auto& [label, dict] : dictionaries_) {
    if (dict.label != label) {
      throw DataError("DictionarySet: dictionary keyed under wrong label " +
                      std::to_string(label.fdi()));
    }
    if (dict.subject_ids != subject_ids_) {
      throw DataError("DictionarySet: subject ordering differs for tooth " +
                      std::to_string(label.fdi()));
    }
    if (dict.data.rows() != static_cast<Eigen::Index>(3 * dict.t_points) ||
        dict.data.cols() != static_cast<Eigen::Index>(subject_ids_.size())) {
      throw DataError("DictionarySet: bad matrix shape for tooth " +
                      std::to_string(label.fdi()));
    }
    if (!dict.data.allFinite()) {
      throw DataError("DictionarySet: non-finite entries for tooth " +
                      std::to_string(label.fdi()));
    }
  }
}

const ToothDictionary& DictionarySet::at(ToothLabel label) const {
  return dictionaries_.at(label);
}

Eigen::VectorXd to_coordinate_vector(const PointCloud& cloud) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(3 * cloud.size()));
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    out.segment<3>(static_cast<Eigen::Index>(3 * k)) = cloud[k];
  }
  return out;
}

PointCloud from_coordinate_vector(const Eigen::VectorXd& coords) {
  if (coords.size() % 3 != 0) {
    throw DataError("from_coordinate_vector: length not a multiple of 3");
  }
  PointCloud out;
  out.reserve(static_cast<std::size_t>(coords.size() / 3));
  for (Eigen::Index k = 0; k < coords.size(); k += 3) {
    out.push_back(coords.segment<3>(k));
  }
  return out;
}

ToothDictionary build_dictionary(ToothLabel label,
                                 const std::vector<CorrespondedTooth>& cohort,
                                 const std::vector<std::string>& subject_ids) {
  if (cohort.empty()) throw DataError("build_dictionary: empty cohort");
  if (cohort.size() != subject_ids.size()) {
    throw DataError("build_dictionary: cohort and subject id counts differ");
  }
  const std::size_t t_points = cohort.front().cloud.size();
  if (t_points == 0) throw DataError("build_dictionary: empty tooth cloud");

  ToothDictionary dict{label, t_points,
                       Eigen::MatrixXd(static_cast<Eigen::Index>(3 * t_points),
                                       static_cast<Eigen::Index>(cohort.size())),
                       subject_ids};
  for (std::size_t j = 0; j < cohort.size(); ++j) {
    if (cohort[j].label != label) {
      throw DataError("build_dictionary: subject '" + subject_ids[j] +
                      "' carries label " + std::to_string(cohort[j].label.fdi()) +
                      ", expected " + std::to_string(label.fdi()));
    }
    if (cohort[j].cloud.size() != t_points) {
      throw DataError("build_dictionary: subject '" + subject_ids[j] + "' has " +
                      std::to_string(cohort[j].cloud.size()) + " points, expected " +
                      std::to_string(t_points));
    }
    dict.data.col(static_cast<Eigen::Index>(j)) = to_coordinate_vector(cohort[j].cloud);
  }
  return dict;
}

Eigen::MatrixXd stack_dictionaries(const DictionarySet& set,
                                   const std::vector<ToothLabel>& labels) {
  if (labels.empty()) throw std::invalid_argument("stack_dictionaries: no labels");
  Eigen::Index rows = 0;
  for (const ToothLabel& label : labels) rows += set.at(label).data.rows();

  Eigen::MatrixXd stacked(rows, static_cast<Eigen::Index>(set.subject_ids().size()));
  Eigen::Index offset = 0;
  for (const ToothLabel& label : labels) {
    const Eigen::MatrixXd& block = set.at(label).data;
    stacked.middleRows(offset, block.rows()) = block;
    offset += block.rows();
  }
  return stacked;
}

void save_dictionary_set(const DictionarySet& set, const std::filesystem::path& path) {
  json manifest;
  manifest["version"] = 1;
  manifest["subject_ids"] = set.subject_ids();

  std::vector<int> labels;
  std::vector<std::size_t> t_points;
  std::vector<std::uint64_t> offsets;  // bytes from the start of the data section
  std::uint64_t offset = 0;
  for (const auto& [label, dict] : set.dictionaries()) {
    labels.push_back(label.fdi());
    t_points.push_back(dict.t_points);
    offsets.push_back(offset);
    offset += static_cast<std::uint64_t>(dict.data.size()) * sizeof(double);
  }
  manifest["labels"] = labels;
  manifest["t_points"] = t_points;
  manifest["offsets"] = offsets;

  const std::string manifest_text = manifest.dump();

  std::vector<std::uint8_t> bytes;
  bytes.reserve(4 + 8 + manifest_text.size() + offset + 8);
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  append_u64(bytes, manifest_text.size());
  bytes.insert(bytes.end(), manifest_text.begin(), manifest_text.end());

  for (const auto& [label, dict] : set.dictionaries()) {
    // Row-major so corresponding points stay contiguous per subject triple.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        row_major = dict.data;
    const auto* raw = reinterpret_cast<const std::uint8_t*>(row_major.data());
    bytes.insert(bytes.end(), raw, raw + sizeof(double) * row_major.size());
  }

  append_u64(bytes, fnv1a64(bytes.data(), bytes.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("save_dictionary_set: cannot open '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("save_dictionary_set: write failed for '" + path.string() + "'");
}

DictionarySet load_dictionary_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_dictionary_set: cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 4 + 8 + 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("load_dictionary_set: not a TDS1 file: '" + path.string() + "'");
  }

  const std::uint64_t stored_sum = read_u64(bytes.data() + bytes.size() - 8);
  if (fnv1a64(bytes.data(), bytes.size() - 8) != stored_sum) {
    throw DataError("load_dictionary_set: checksum mismatch in '" + path.string() + "'");
  }

  const std::uint64_t manifest_size = read_u64(bytes.data() + 4);
  const std::size_t manifest_start = 12;
  if (manifest_start + manifest_size + 8 > bytes.size()) {
    throw DataError("load_dictionary_set: truncated manifest in '" + path.string() + "'");
  }

  json manifest;
  try {
    manifest = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(manifest_start),
                           bytes.begin() + static_cast<std::ptrdiff_t>(manifest_start +
                                                                       manifest_size));
  } catch (const json::exception& e) {
    throw DataError(std::string("load_dictionary_set: bad manifest: ") + e.what());
  }
  if (manifest.value("version", 0) != 1) {
    throw DataError("load_dictionary_set: unsupported version in '" + path.string() + "'");
  }

  const auto subject_ids = manifest.at("subject_ids").get<std::vector<std::string>>();
  const auto labels = manifest.at("labels").get<std::vector<int>>();
  const auto t_points = manifest.at("t_points").get<std::vector<std::size_t>>();
  const auto offsets = manifest.at("offsets").get<std::vector<std::uint64_t>>();
  if (labels.size() != all_labels().size() || t_points.size() != labels.size() ||
      offsets.size() != labels.size()) {
    throw DataError("load_dictionary_set: manifest must describe exactly 28 teeth");
  }

  const std::size_t data_start = manifest_start + manifest_size;
  const std::size_t data_size = bytes.size() - 8 - data_start;

  std::map<ToothLabel, ToothDictionary> dictionaries;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const ToothLabel label{labels[i]};
    const std::size_t rows = 3 * t_points[i];
    const std::size_t count = rows * subject_ids.size();
    if (offsets[i] + count * sizeof(double) > data_size) {
      throw DataError("load_dictionary_set: truncated data block for tooth " +
                      std::to_string(labels[i]));
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(
        static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(subject_ids.size()));
    std::memcpy(row_major.data(), bytes.data() + data_start + offsets[i],
                count * sizeof(double));
    ToothDictionary dict{label, t_points[i], row_major, subject_ids};
    dictionaries.emplace(label, std::move(dict));
  }

  return DictionarySet(std::move(dictionaries), subject_ids);
}

}  // namespace toothsparse
