#include "toothsparse/predictor.hpp"

#include <cassert>
#include <stdexcept>
#include <string>

#include "toothsparse/adjacency.hpp"
#include "toothsparse/correspondence.hpp"
#include "toothsparse/errors.hpp"

namespace toothsparse {

namespace {

constexpr double kMovementStop = 1e-3;  // mm

double mean_point_distance(const std::map<ToothLabel, PointCloud>& a,
                           const std::map<ToothLabel, PointCloud>& b) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [label, cloud] : a) {
    const PointCloud& other = b.at(label);
    for (std::size_t k = 0; k < cloud.size(); ++k) {
      sum += (cloud[k] - other[k]).norm();
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace

void PredictionConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("PredictionConfig: iterations must be >= 1");
  if (adjacency_radius < 1) {
    throw std::invalid_argument("PredictionConfig: adjacency radius must be >= 1");
  }
  cpd.validate();
  bpdn.validate();
}

PredictionResult predict(const DentalModel& model, const std::set<ToothLabel>& missing,
                         const DictionarySet& dicts, const DentalTemplate& dental_template,
                         const PredictionConfig& config,
                         const std::map<ToothLabel, CorrespondedTooth>* ground_truth) {
  config.validate();
  if (missing.empty()) throw std::invalid_argument("predict: missing set is empty");

  const std::set<ToothLabel> present = model.labels();
  for (const ToothLabel& m : missing) {
    if (present.count(m) != 0) {
      throw std::invalid_argument("predict: tooth " + std::to_string(m.fdi()) +
                                  " marked missing but present in the model");
    }
  }

  PredictionResult result;
  result.adjacent_labels = resolve_adjacent(missing, present, config.adjacency_radius);
  model.validate();

  // The dictionaries must have been built against this template, or the
  // stacked rows below would not line up point-for-point.
  for (const ToothLabel& label : all_labels()) {
    if (dicts.at(label).t_points != dental_template.point_count(label)) {
      throw DataError("predict: dictionary for tooth " + std::to_string(label.fdi()) +
                      " has " + std::to_string(dicts.at(label).t_points) +
                      " points but the template tooth has " +
                      std::to_string(dental_template.point_count(label)));
    }
  }

  // Stacked adjacent dictionary rows follow the resolver's canonical order,
  // and the stacked target below is assembled in the same order.
  const Eigen::MatrixXd d_adj = stack_dictionaries(dicts, result.adjacent_labels);
  const PreparedDictionary prepared(d_adj);

  Eigen::Index adj_rows = 0;
  for (const ToothLabel& label : result.adjacent_labels) {
    adj_rows += static_cast<Eigen::Index>(3 * dental_template.point_count(label));
  }

  std::map<ToothLabel, PointCloud> predictions_template;
  std::map<ToothLabel, PointCloud> predictions_subject;
  RigidTransform to_template;

  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    if (iteration == 0) {
      to_template = align_model_to_template(model, dental_template, present);
    } else {
      // Re-align the model merged with the current predictions against the
      // full template; predicted teeth weigh the same as real ones.
      PointCloud model_centroids;
      PointCloud template_centroids;
      for (const ToothLabel& label : present) {
        model_centroids.push_back(centroid(model.teeth.at(label)));
        template_centroids.push_back(centroid(dental_template.tooth(label)));
      }
      for (const auto& [label, cloud] : predictions_subject) {
        model_centroids.push_back(centroid(cloud));
        template_centroids.push_back(centroid(dental_template.tooth(label)));
      }
      to_template = procrustes_rigid(model_centroids, template_centroids);
    }

    Eigen::VectorXd a_adj(adj_rows);
    Eigen::Index offset = 0;
    for (const ToothLabel& label : result.adjacent_labels) {
      const PointCloud aligned = apply_transform(to_template, model.teeth.at(label));
      const PointCloud corresponded =
          correspond_tooth(dental_template.tooth(label), aligned, config.cpd);
      const Eigen::VectorXd coords = to_coordinate_vector(corresponded);
      a_adj.segment(offset, coords.size()) = coords;
      offset += coords.size();
    }
    assert(offset == d_adj.rows());

    const SparseCode code = solve_bpdn(prepared, a_adj, config.bpdn);

    // One shared coefficient vector transfers to every missing dictionary.
    const RigidTransform to_subject = inverse(to_template);
    std::map<ToothLabel, PointCloud> fresh_template;
    std::map<ToothLabel, PointCloud> fresh_subject;
    for (const ToothLabel& m : missing) {
      const Eigen::VectorXd coords = dicts.at(m).data * code.coefficients;
      PointCloud cloud = from_coordinate_vector(coords);
      fresh_subject.emplace(m, apply_transform(to_subject, cloud));
      fresh_template.emplace(m, std::move(cloud));
    }

    IterationDiagnostics diag;
    diag.alignment = to_template;
    diag.residual_norm = code.residual_norm;
    diag.bpdn_feasible = code.feasible;
    diag.bpdn_converged = code.converged;
    if (!predictions_subject.empty()) {
      // Movement is judged on the subject-frame predictions: alignment
      // refinement still moves them even when the template-frame clouds
      // have settled.
      diag.mean_movement = mean_point_distance(fresh_subject, predictions_subject);
    }
    if (ground_truth != nullptr) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& [label, cloud] : fresh_subject) {
        const PointCloud& truth = ground_truth->at(label).cloud;
        for (std::size_t k = 0; k < cloud.size(); ++k) {
          sum += (cloud[k] - truth[k]).norm();
          ++count;
        }
      }
      diag.ground_truth_error = sum / static_cast<double>(count);
    }

    predictions_template = std::move(fresh_template);
    predictions_subject = std::move(fresh_subject);
    result.sparse_code = code;
    result.per_iteration.push_back(std::move(diag));

    if (result.per_iteration.back().mean_movement.has_value() &&
        *result.per_iteration.back().mean_movement < kMovementStop) {
      break;
    }
  }

  for (auto& [label, cloud] : predictions_template) {
    result.predicted_template_frame.emplace(label, CorrespondedTooth{label, std::move(cloud)});
  }
  for (auto& [label, cloud] : predictions_subject) {
    result.predicted_subject_frame.emplace(label, CorrespondedTooth{label, std::move(cloud)});
  }
  return result;
}

}  // namespace toothsparse
