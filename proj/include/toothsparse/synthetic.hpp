#ifndef TOOTHSPARSE_SYNTHETIC_HPP
#define TOOTHSPARSE_SYNTHETIC_HPP

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <vector>

#include "toothsparse/model.hpp"

namespace toothsparse {

/// Dental arch shape: tooth centers sit on x = (width/2) u,
/// y = depth (1 - |u|^curve_exponent) for u in [-1, 1], upper and lower rows
/// offset vertically.
struct ArchParams {
  double width = 50.0;           ///< mm, molar-to-molar
  double depth = 42.0;           ///< mm, front-to-back
  double curve_exponent = 1.8;
  double row_gap = 8.0;          ///< vertical distance between row centers
};

struct SynthConfig {
  std::size_t n_subjects = 20;
  std::size_t latent_rank = 5;  ///< K, number of deformation modes in play
  double noise_sigma = 0.0;     ///< mm, i.i.d. per-point Gaussian noise
  ArchParams arch;
  double jitter_rotation_deg = 5.0;
  double jitter_translation_mm = 3.0;
  bool permute_points = true;       ///< shuffle raw point order per tooth
  double resample_fraction = 0.10;  ///< fraction of raw points dropped per tooth
  std::uint64_t seed = 0;
  /// T_i per label. Empty entries fall back to per-type defaults:
  /// incisors 150, canines 180, premolars 220, molars 300.
  std::map<ToothLabel, std::size_t> points_per_tooth;

  std::size_t tooth_point_count(ToothLabel label) const;

  /// Throws std::invalid_argument on out-of-range fields, including
  /// latent_rank > mode_catalog_size().
  void validate() const;
};

/// One generated subject. The model holds raw clouds (permuted/resampled,
/// noisy, rigidly jittered). Ground truth is the deformed template in the
/// subject's frame, template point order, noise-free.
struct SynthSubject {
  DentalModel model;
  std::map<ToothLabel, CorrespondedTooth> ground_truth;
  Eigen::VectorXd latent;
  RigidTransform jitter;  ///< template frame -> subject frame
};

struct SynthCohort {
  DentalTemplate dental_template;
  std::vector<SynthSubject> subjects;
};

/// Number of deformation modes available to the generator.
std::size_t mode_catalog_size();

/// Displacement of mode k (0-based) evaluated at a template-frame point.
/// Every mode is a smooth field that moves all teeth coherently.
Point3 mode_displacement(std::size_t mode, const Point3& p, const ArchParams& arch);

/// 28 superellipsoid teeth placed along the arch, deterministic per config;
/// tooth clouds of mirrored columns are exact x-mirrors of each other when
/// their point counts match (always true with the per-type defaults).
DentalTemplate generate_template(const SynthConfig& config);

/// Template plus n_subjects models drawn from the rank-K generative process.
/// Deterministic per seed; subjects use independent sub-seeds.
SynthCohort generate_cohort(const SynthConfig& config);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_SYNTHETIC_HPP
