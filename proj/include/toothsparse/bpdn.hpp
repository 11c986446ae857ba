#ifndef TOOTHSPARSE_BPDN_HPP
#define TOOTHSPARSE_BPDN_HPP

#include <Eigen/Core>

namespace toothsparse {

enum class EpsilonMode {
  absolute,  ///< epsilon_value is a residual bound in mm
  relative   ///< epsilon_value is a fraction of ||target||_2
};

struct BpdnConfig {
  EpsilonMode epsilon_mode = EpsilonMode::relative;
  double epsilon_value = 0.01;
  int max_iterations = 20000;
  /// Absolute ADMM residual tolerance. Zero by default: relative-only
  /// stopping keeps solves equivariant under problem rescaling.
  double tol_abs = 0.0;
  double tol_rel = 1e-9;  ///< relative ADMM residual tolerance

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  /// The absolute epsilon for a given target norm.
  double resolve_epsilon(double target_norm) const;
};

struct SparseCode {
  Eigen::VectorXd coefficients;
  double residual_norm = 0.0;  ///< ||D c - a||_2 of the returned coefficients
  double l1_norm = 0.0;
  int iterations_used = 0;
  bool converged = false;
  /// False when even the least-squares residual exceeds epsilon; the
  /// coefficients are then the minimum-norm least-squares solution.
  bool feasible = true;
  double least_squares_residual = 0.0;
  double coefficient_sum = 0.0;  ///< diagnostic only, no constraint imposed
};

/// Dictionary factorization (thin SVD) reusable across solves against the
/// same matrix. Read-only after construction.
class PreparedDictionary {
 public:
  /// Throws std::invalid_argument for empty or non-finite matrices.
  explicit PreparedDictionary(const Eigen::MatrixXd& dict);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  const Eigen::MatrixXd& u() const { return u_; }
  const Eigen::MatrixXd& v() const { return v_; }
  const Eigen::VectorXd& singular_values() const { return sigma_; }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Eigen::MatrixXd u_;      // rows x r
  Eigen::MatrixXd v_;      // cols x r
  Eigen::VectorXd sigma_;  // r
};

/// Solves min ||c||_1 subject to ||D c - target||_2 <= epsilon by ADMM
/// (Euclidean-ball projection composed with soft thresholding), warm-started
/// from the minimum-norm least-squares solution. Deterministic.
///
/// When epsilon is unattainable the least-squares solution is returned with
/// feasible = false so callers can inspect least_squares_residual.
SparseCode solve_bpdn(const PreparedDictionary& dict, const Eigen::VectorXd& target,
                      const BpdnConfig& config);

SparseCode solve_bpdn(const Eigen::MatrixXd& dict, const Eigen::VectorXd& target,
                      const BpdnConfig& config);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_BPDN_HPP
