#include "toothsparse/synthetic.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "toothsparse/rng.hpp"

namespace toothsparse {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t subject_seed(std::uint64_t seed, std::size_t subject) {
  return mix64(seed ^ mix64(0x7355608dull + static_cast<std::uint64_t>(subject)));
}

// Per-type superellipsoid crown proportions (semi-axes in mm and the two
// shape exponents). Position 1 = central incisor .. 7 = second molar.
struct ToothShape {
  double a, b, c;    // mesiodistal, buccolingual, vertical semi-axes
  double e1, e2;
};

ToothShape shape_for_position(int position) {
  switch (position) {
    case 1: return {4.2, 3.6, 5.2, 0.8, 0.7};
    case 2: return {3.4, 3.3, 4.8, 0.8, 0.7};
    case 3: return {3.9, 4.0, 5.4, 0.9, 0.8};
    case 4: return {4.4, 4.3, 4.6, 0.9, 0.9};
    case 5: return {4.5, 4.4, 4.4, 0.9, 0.9};
    case 6: return {5.4, 5.2, 4.1, 0.8, 1.0};
    default: return {5.1, 5.0, 3.9, 0.8, 1.0};
  }
}

double superellipsoid_implicit(const ToothShape& s, const Point3& p) {
  const double xa = std::pow(std::abs(p.x() / s.a), 2.0 / s.e2);
  const double yb = std::pow(std::abs(p.y() / s.b), 2.0 / s.e2);
  const double zc = std::pow(std::abs(p.z() / s.c), 2.0 / s.e1);
  return std::pow(xa + yb, s.e2 / s.e1) + zc;
}

/// Quasi-uniform deterministic surface sampling: Fibonacci sphere directions
/// pushed onto the superellipsoid surface by bisection along each ray.
PointCloud sample_superellipsoid(const ToothShape& s, std::size_t count) {
  PointCloud out;
  out.reserve(count);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  const double t_max = 2.0 * std::max({s.a, s.b, s.c});
  for (std::size_t k = 0; k < count; ++k) {
    const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(k);
    const Point3 dir(rho * std::cos(phi), rho * std::sin(phi), z);

    double lo = 0.0;
    double hi = t_max;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (superellipsoid_implicit(s, mid * dir) < 1.0 ? lo : hi) = mid;
    }
    out.push_back(0.5 * (lo + hi) * dir);
  }
  return out;
}

struct ToothPlacement {
  Point3 center;
  double yaw;  // rotation about z aligning the mesiodistal axis to the arch
};

ToothPlacement place_tooth(const ArchParams& arch, ToothRow row, int column) {
  const double u = (static_cast<double>(column) - 7.5) / 6.5;
  const double row_scale = (row == ToothRow::upper) ? 1.0 : 0.94;
  const double half_width = 0.5 * arch.width * row_scale;
  const double depth = arch.depth * ((row == ToothRow::upper) ? 1.0 : 0.96);
  const double p = arch.curve_exponent;

  const double x = half_width * u;
  const double y = depth * (1.0 - std::pow(std::abs(u), p));
  const double z = (row == ToothRow::upper) ? 0.5 * arch.row_gap : -0.5 * arch.row_gap;

  const double dxdu = half_width;
  const double dydu = (u == 0.0) ? 0.0
                                 : -depth * p * std::pow(std::abs(u), p - 1.0) *
                                       (u > 0.0 ? 1.0 : -1.0);
  return ToothPlacement{Point3(x, y, z), std::atan2(dydu, dxdu)};
}

Point3 mirror_x(const Point3& p) { return Point3(-p.x(), p.y(), p.z()); }

}  // namespace

std::size_t SynthConfig::tooth_point_count(ToothLabel label) const {
  const auto it = points_per_tooth.find(label);
  if (it != points_per_tooth.end()) return it->second;
  switch (label.position()) {
    case 1:
    case 2: return 150;
    case 3: return 180;
    case 4:
    case 5: return 220;
    default: return 300;
  }
}

void SynthConfig::validate() const {
  if (n_subjects < 1) throw std::invalid_argument("SynthConfig: n_subjects must be >= 1");
  if (latent_rank > mode_catalog_size()) {
    throw std::invalid_argument("SynthConfig: latent_rank " + std::to_string(latent_rank) +
                                " exceeds the " + std::to_string(mode_catalog_size()) +
                                " available deformation modes");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SynthConfig: noise_sigma must be >= 0");
  if (!(resample_fraction >= 0.0 && resample_fraction < 1.0)) {
    throw std::invalid_argument("SynthConfig: resample_fraction must be in [0, 1)");
  }
  if (!(arch.width > 0.0 && arch.depth > 0.0 && arch.curve_exponent > 0.0 && arch.row_gap >= 0.0)) {
    throw std::invalid_argument("SynthConfig: arch parameters must be positive");
  }
  if (!(jitter_rotation_deg >= 0.0 && jitter_translation_mm >= 0.0)) {
    throw std::invalid_argument("SynthConfig: jitter magnitudes must be >= 0");
  }
  for (const ToothLabel& label : all_labels()) {
    if (tooth_point_count(label) < 4) {
      throw std::invalid_argument("SynthConfig: tooth " + std::to_string(label.fdi()) +
                                  " needs at least 4 points");
    }
  }
}

std::size_t mode_catalog_size() { return 10; }

Point3 mode_displacement(std::size_t mode, const Point3& p, const ArchParams& arch) {
  const double y_mid = 0.5 * arch.depth;
  const double x = p.x();
  const double yc = p.y() - y_mid;
  const double z = p.z();
  switch (mode) {
    case 0:  // arch widening
      return Point3(0.040 * x, 0.0, 0.0);
    case 1:  // arch deepening
      return Point3(0.0, 0.045 * yc, 0.0);
    case 2:  // anterior vertical rise
      return Point3(0.0, 0.0, 0.035 * yc);
    case 3:  // mesiodistal shear
      return Point3(0.035 * yc, 0.0, 0.0);
    case 4: {  // differential upper/lower (per-quadrant) scaling
      const double gain = 0.018 * (1.2 + std::tanh(z / 4.0));
      return Point3(gain * x, gain * yc, 0.0);
    }
    case 5: {  // curvature change
      const double x_half = 0.5 * arch.width;
      return Point3(0.0, 0.0016 * (x * x - x_half * x_half / 3.0), 0.0);
    }
    case 6:  // twist about the vertical axis
      return Point3(-0.035 * yc, 0.035 * x, 0.0);
    case 7:  // molar flare
      return Point3(0.000030 * x * x * x, 0.0, 0.0);
    case 8: {  // local bulge around the arch center
      const double gain = 0.055 * std::exp(-(x * x + yc * yc) / (2.0 * 15.0 * 15.0));
      return Point3(gain * x, gain * yc, 0.0);
    }
    case 9:  // vertical wave along the arch
      return Point3(0.0, 0.0, 0.42 * std::sin(x / 7.0));
    default:
      throw std::invalid_argument("mode_displacement: mode " + std::to_string(mode) +
                                  " outside the catalog");
  }
}

DentalTemplate generate_template(const SynthConfig& config) {
  config.validate();

  std::map<ToothLabel, PointCloud> teeth;
  for (ToothRow row : {ToothRow::upper, ToothRow::lower}) {
    for (int column = 1; column <= 7; ++column) {
      const ToothLabel label = pos_to_label(TeethMatrixPos{row, column});
      const ToothLabel mirror_label = pos_to_label(TeethMatrixPos{row, 15 - column});

      const ToothShape shape = shape_for_position(label.position());
      const ToothPlacement placement = place_tooth(config.arch, row, column);
      const Eigen::Matrix3d yaw =
          Eigen::AngleAxisd(placement.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();

      PointCloud cloud = sample_superellipsoid(shape, config.tooth_point_count(label));
      for (Point3& p : cloud) p = placement.center + yaw * p;

      if (config.tooth_point_count(mirror_label) == cloud.size()) {
        PointCloud mirrored;
        mirrored.reserve(cloud.size());
        for (const Point3& p : cloud) mirrored.push_back(mirror_x(p));
        teeth.emplace(mirror_label, std::move(mirrored));
      } else {
        // Point counts differ: sample the mirrored tooth independently.
        const ToothPlacement m = place_tooth(config.arch, row, 15 - column);
        const Eigen::Matrix3d myaw =
            Eigen::AngleAxisd(m.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        PointCloud mirrored =
            sample_superellipsoid(shape, config.tooth_point_count(mirror_label));
        for (Point3& p : mirrored) p = m.center + myaw * p;
        teeth.emplace(mirror_label, std::move(mirrored));
      }
      teeth.emplace(label, std::move(cloud));
    }
  }
  return DentalTemplate(std::move(teeth));
}

SynthCohort generate_cohort(const SynthConfig& config) {
  config.validate();
  DentalTemplate dental_template = generate_template(config);

  std::vector<SynthSubject> subjects;
  subjects.reserve(config.n_subjects);

  for (std::size_t j = 0; j < config.n_subjects; ++j) {
    Rng rng(subject_seed(config.seed, j));

    Eigen::VectorXd latent(static_cast<Eigen::Index>(config.latent_rank));
    for (Eigen::Index k = 0; k < latent.size(); ++k) latent(k) = rng.normal();

    RigidTransform jitter;
    {
      const double zc = rng.uniform(-1.0, 1.0);
      const double phi = rng.uniform(0.0, 2.0 * kPi);
      const double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      const Eigen::Vector3d axis(rho * std::cos(phi), rho * std::sin(phi), zc);
      const double angle =
          rng.uniform(-config.jitter_rotation_deg, config.jitter_rotation_deg) * kPi / 180.0;
      jitter.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
      for (int i = 0; i < 3; ++i) {
        jitter.translation(i) =
            rng.uniform(-config.jitter_translation_mm, config.jitter_translation_mm);
      }
    }

    SynthSubject subject;
    subject.latent = latent;
    subject.jitter = jitter;
    subject.model.subject_id = "subj_" + std::to_string(j);

    for (const ToothLabel& label : all_labels()) {
      const PointCloud& base = dental_template.tooth(label);

      PointCloud truth_template;
      truth_template.reserve(base.size());
      for (const Point3& p : base) {
        Point3 moved = p;
        for (std::size_t k = 0; k < config.latent_rank; ++k) {
          moved += latent(static_cast<Eigen::Index>(k)) *
                   mode_displacement(k, p, config.arch);
        }
        truth_template.push_back(moved);
      }

      PointCloud raw;
      raw.reserve(truth_template.size());
      for (const Point3& p : truth_template) {
        Point3 noisy = p;
        if (config.noise_sigma > 0.0) {
          noisy += config.noise_sigma * Point3(rng.normal(), rng.normal(), rng.normal());
        }
        raw.push_back(jitter(noisy));
      }

      const std::size_t drop =
          static_cast<std::size_t>(config.resample_fraction *
                                   static_cast<double>(raw.size()));
      if (drop > 0) {
        const std::vector<std::size_t> order = rng.permutation(raw.size());
        std::vector<bool> dropped(raw.size(), false);
        for (std::size_t d = 0; d < drop; ++d) dropped[order[d]] = true;
        PointCloud kept;
        kept.reserve(raw.size() - drop);
        for (std::size_t i = 0; i < raw.size(); ++i) {
          if (!dropped[i]) kept.push_back(raw[i]);
        }
        raw = std::move(kept);
      }

      if (config.permute_points) {
        const std::vector<std::size_t> order = rng.permutation(raw.size());
        PointCloud shuffled;
        shuffled.reserve(raw.size());
        for (std::size_t i : order) shuffled.push_back(raw[i]);
        raw = std::move(shuffled);
      }

      subject.model.teeth.emplace(label, std::move(raw));
      subject.ground_truth.emplace(
          label, CorrespondedTooth{label, apply_transform(jitter, truth_template)});
    }
    subjects.push_back(std::move(subject));
  }

  return SynthCohort{std::move(dental_template), std::move(subjects)};
}

}  // namespace toothsparse
