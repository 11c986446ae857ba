#include "toothsparse/correspondence.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "toothsparse/errors.hpp"
#include "toothsparse/kdtree.hpp"
#include "toothsparse/parallel.hpp"

namespace toothsparse {

RigidTransform align_model_to_template(const DentalModel& model,
                                       const DentalTemplate& dental_template,
                                       const std::set<ToothLabel>& use_labels) {
  if (use_labels.size() < 2) {
    throw DataError("align_model_to_template: need at least 2 common teeth, got " +
                    std::to_string(use_labels.size()));
  }
  PointCloud model_centroids;
  PointCloud template_centroids;
  for (const ToothLabel& label : use_labels) {
    const auto it = model.teeth.find(label);
    if (it == model.teeth.end()) {
      throw std::invalid_argument("align_model_to_template: tooth " +
                                  std::to_string(label.fdi()) + " not present in model");
    }
    model_centroids.push_back(centroid(it->second));
    template_centroids.push_back(centroid(dental_template.tooth(label)));
  }
  return procrustes_rigid(model_centroids, template_centroids);
}

PointCloud correspond_tooth(const PointCloud& template_tooth,
                            const PointCloud& subject_tooth, const CpdConfig& cfg) {
  const CpdResult deformed = cpd_nonrigid(template_tooth, subject_tooth, cfg);
  const NeighborIndex subject_index(subject_tooth);

  PointCloud out;
  out.reserve(template_tooth.size());
  for (const Point3& p : deformed.deformed) {
    out.push_back(subject_tooth[subject_index.nearest(p).index]);
  }
  return out;
}

std::map<ToothLabel, CorrespondedTooth> correspond_model(
    const DentalModel& model, const DentalTemplate& dental_template,
    const CpdConfig& cfg) {
  model.validate();
  if (model.teeth.size() < 2) {
    throw DataError("correspond_model: model needs at least 2 teeth");
  }

  const RigidTransform to_template =
      align_model_to_template(model, dental_template, model.labels());

  std::vector<ToothLabel> labels;
  labels.reserve(model.teeth.size());
  for (const auto& [label, cloud] : model.teeth) labels.push_back(label);

  std::vector<PointCloud> corresponded(labels.size());
  parallel_for(labels.size(), [&](std::size_t i) {
    const ToothLabel label = labels[i];
    const PointCloud aligned = apply_transform(to_template, model.teeth.at(label));
    corresponded[i] = correspond_tooth(dental_template.tooth(label), aligned, cfg);
  });

  std::map<ToothLabel, CorrespondedTooth> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.emplace(labels[i], CorrespondedTooth{labels[i], std::move(corresponded[i])});
  }
  return out;
}

}  // namespace toothsparse
