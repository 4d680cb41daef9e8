#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace scbf::numerics {

/// Tolerances shared by the numeric kernels. Kept in one place so callers and
/// tests agree on what "converged" means.
namespace tol {
inline constexpr double kEigenResidual = 1e-10;      // relative Frobenius residual
inline constexpr double kIncBetaInverse = 1e-12;     // |I_x(a,b) - p|
inline constexpr double kLogBinomialRel = 1e-12;     // relative, n <= 1e6
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr int kIncBetaMaxIter = 20000;
inline constexpr int kInverseMaxIter = 400;
}  // namespace tol

/// Dense symmetric matrix stored as its upper triangle, row-major.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim);
  /// Copies the upper triangle of `m`; the lower triangle is ignored.
  static SymMatrix from_dense(const Eigen::MatrixXd& m);
  static SymMatrix identity(int dim);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }
  double& operator()(int i, int j) { return data_[index(i, j)]; }

  Eigen::MatrixXd to_dense() const;
  std::span<const double> packed() const { return data_; }

  bool is_finite() const;
  double frobenius_norm() const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t index(int i, int j) const;

  int dim_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi eigen-decomposition. Throws std::invalid_argument on
/// non-finite input.
EigenDecomposition sym_eigen(const SymMatrix& a);
EigenDecomposition sym_eigen(const Eigen::MatrixXd& a);

/// Smallest / largest eigenvalue helpers built on sym_eigen.
double min_eigenvalue(const Eigen::MatrixXd& a);
double max_eigenvalue(const Eigen::MatrixXd& a);
/// Spectral norm of a symmetric matrix.
double spectral_norm(const Eigen::MatrixXd& a);

/// Regularized incomplete beta function I_x(a, b).
double reg_inc_beta(double x, double a, double b);

/// Inverse of I_x(a, b) in x. Throws ConvergenceError when the bracketed
/// Newton iteration does not settle within tol::kInverseMaxIter steps.
double inv_reg_inc_beta(double p, double a, double b);

/// ln C(n, k).
double log_binomial(std::int64_t n, std::int64_t k);

/// Numerically stable log(sum(exp(v))). Returns -inf for an empty span.
double log_sum_exp(std::span<const double> values);

}  // namespace scbf::numerics
