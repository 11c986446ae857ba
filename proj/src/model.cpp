#include "toothsparse/model.hpp"

#include <string>

#include "toothsparse/errors.hpp"

namespace toothsparse {

DentalTemplate::DentalTemplate(std::map<ToothLabel, PointCloud> teeth)
    : teeth_(std::move(teeth)) {
  if (teeth_.size() != all_labels().size()) {
    throw DataError("DentalTemplate: expected 28 teeth, got " +
                    std::to_string(teeth_.size()));
  }
  for (const auto& [label, cloud] : teeth_) {
    if (cloud.empty() || !cloud_is_finite(cloud)) {
      throw DataError("DentalTemplate: tooth " + std::to_string(label.fdi()) +
                      " has an empty or non-finite cloud");
    }
  }
}

const PointCloud& DentalTemplate::tooth(ToothLabel label) const {
  return teeth_.at(label);
}

std::size_t DentalTemplate::point_count(ToothLabel label) const {
  return teeth_.at(label).size();
}

std::set<ToothLabel> DentalModel::labels() const {
  std::set<ToothLabel> out;
  for (const auto& [label, cloud] : teeth) out.insert(label);
  return out;
}

void DentalModel::validate() const {
  if (teeth.empty()) {
    throw DataError("DentalModel '" + subject_id + "': no teeth present");
  }
  for (const auto& [label, cloud] : teeth) {
    if (cloud.empty() || !cloud_is_finite(cloud)) {
      throw DataError("DentalModel '" + subject_id + "': tooth " +
                      std::to_string(label.fdi()) + " has an empty or non-finite cloud");
    }
  }
}

}  // namespace toothsparse
