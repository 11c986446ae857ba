#include "toothsparse/cpd.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "toothsparse/errors.hpp"

namespace toothsparse {

namespace {

constexpr double kSigma2Floor = 1e-12;  // unit-diameter frame
constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::MatrixXd to_matrix(const PointCloud& cloud) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(cloud.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.row(i) = cloud[static_cast<std::size_t>(i)].transpose();
  }
  return m;
}

// Squared pairwise distances, rows index a, columns index b.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace

void CpdConfig::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("CpdConfig: beta must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("CpdConfig: lambda must be > 0");
  if (!(outlier_weight >= 0.0 && outlier_weight < 1.0)) {
    throw std::invalid_argument("CpdConfig: outlier weight must be in [0, 1)");
  }
  if (max_iterations < 1) throw std::invalid_argument("CpdConfig: max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("CpdConfig: tolerance must be > 0");
}

CpdResult cpd_nonrigid(const PointCloud& source, const PointCloud& target,
                       const CpdConfig& config, const CpdObserver& observer) {
  config.validate();
  require_valid_cloud(source, "cpd_nonrigid source");
  require_valid_cloud(target, "cpd_nonrigid target");

  const Eigen::Index m = static_cast<Eigen::Index>(source.size());
  const Eigen::Index n = static_cast<Eigen::Index>(target.size());

  // Joint unit-diameter normalization keeps beta scale-free.
  Point3 center = Point3::Zero();
  for (const Point3& p : source) center += p;
  for (const Point3& p : target) center += p;
  center /= static_cast<double>(m + n);

  PointCloud joint = source;
  joint.insert(joint.end(), target.begin(), target.end());
  double scale = cloud_diameter(joint);
  if (scale <= 0.0) scale = 1.0;

  Eigen::MatrixXd y = to_matrix(source);
  Eigen::MatrixXd x = to_matrix(target);
  y.rowwise() -= center.transpose();
  x.rowwise() -= center.transpose();
  y /= scale;
  x /= scale;

  const Eigen::MatrixXd gram =
      (-squared_distances(y, y) / (2.0 * config.beta * config.beta)).array().exp().matrix();

  double sigma2 = squared_distances(y, x).sum() / static_cast<double>(3 * m * n);
  sigma2 = std::max(sigma2, kSigma2Floor);

  Eigen::MatrixXd w_coeff = Eigen::MatrixXd::Zero(m, 3);
  Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(m, 3);
  Eigen::MatrixXd moved = y;

  const double w_out = config.outlier_weight;
  const double nll_const =
      static_cast<double>(n) * std::log(static_cast<double>(m) / (1.0 - w_out));

  CpdResult result;
  result.objective_trace.reserve(static_cast<std::size_t>(config.max_iterations) + 1);

  Eigen::MatrixXd posterior(m, n);
  double previous_objective = std::numeric_limits<double>::infinity();

  for (int em = 0; em <= config.max_iterations; ++em) {
    // E-step at the current parameters; also evaluates the objective they achieve.
    const Eigen::MatrixXd kernel =
        (-squared_distances(moved, x) / (2.0 * sigma2)).array().exp().matrix();
    const double outlier_const = std::pow(kTwoPi * sigma2, 1.5) * w_out / (1.0 - w_out) *
                                 static_cast<double>(m) / static_cast<double>(n);
    Eigen::VectorXd denom = kernel.colwise().sum().transpose();
    denom.array() += outlier_const;
    denom = denom.cwiseMax(1e-300);

    const double penalty = 0.5 * config.lambda * (w_coeff.cwiseProduct(gw)).sum();
    const double objective = -denom.array().log().sum() +
                             static_cast<double>(n) * 1.5 * std::log(kTwoPi * sigma2) +
                             nll_const + penalty;
    result.objective_trace.push_back(objective);

    if (observer) {
      CpdIterationStats stats;
      stats.iteration = em;
      stats.sigma2 = sigma2;
      stats.objective = objective;
      stats.posterior_column_sums =
          (kernel.array().rowwise() / denom.transpose().array()).colwise().sum().transpose();
      stats.outlier_mass = (outlier_const / denom.array()).matrix();
      observer(stats);
    }

    const bool tol_reached =
        em > 0 && std::abs(previous_objective - objective) <=
                      config.tolerance * (std::abs(objective) + 1e-30);
    if (tol_reached || sigma2 <= kSigma2Floor || em == config.max_iterations) break;
    previous_objective = objective;

    posterior = kernel.array().rowwise() / denom.transpose().array();

    // M-step: solve (diag(p1) G + lambda sigma2 I) W = PX - diag(p1) Y,
    // symmetrized as (G + lambda sigma2 diag(1/p1)) W = diag(1/p1) PX - Y.
    const Eigen::VectorXd p1 = posterior.rowwise().sum().cwiseMax(1e-300);
    const Eigen::MatrixXd px = posterior * x;
    Eigen::MatrixXd system = gram;
    system.diagonal() += (config.lambda * sigma2) * p1.cwiseInverse();
    const Eigen::LDLT<Eigen::MatrixXd> solver(system);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("cpd_nonrigid: singular M-step system (lambda*sigma2 = " +
                           std::to_string(config.lambda * sigma2) + ")");
    }
    const Eigen::MatrixXd rhs = (px.array().colwise() / p1.array() - y.array()).matrix();
    w_coeff = solver.solve(rhs);
    if (!w_coeff.allFinite()) {
      throw NumericalError("cpd_nonrigid: M-step solution not finite (lambda*sigma2 = " +
                           std::to_string(config.lambda * sigma2) + ")");
    }
    gw = gram * w_coeff;
    moved = y + gw;
    ++result.iterations_used;

    const double np = p1.sum();
    const Eigen::VectorXd pt1 = posterior.colwise().sum().transpose();
    const double fit = pt1.dot(x.rowwise().squaredNorm()) -
                       2.0 * (px.cwiseProduct(moved)).sum() +
                       p1.dot(moved.rowwise().squaredNorm());
    sigma2 = std::max(fit / (3.0 * np), kSigma2Floor);
  }

  result.deformed.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    result.deformed.push_back(moved.row(i).transpose() * scale + center);
  }
  result.final_variance = sigma2 * scale * scale;
  return result;
}

}  // namespace toothsparse
