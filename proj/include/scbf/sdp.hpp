#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace scbf::sdp {

/// coeffs . z + offset >= 0
struct AffineRow {
  Eigen::VectorXd coeffs;
  double offset = 0.0;
};

/// maximize objective . z
/// s.t.  F0 + sum_i z_i F_i  is PSD          (one block, may have dimension 0)
///       coeffs . z + offset >= 0            for every affine row
///       lower <= z <= upper                 when bounds are given
struct LmiProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;
  Eigen::MatrixXd psd_offset;               // F0, d x d
  std::vector<Eigen::MatrixXd> psd_coeffs;  // F_1 .. F_num_vars, empty or one per variable
  std::vector<AffineRow> affine;
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;

  explicit LmiProgram(int vars = 0, int psd_dim = 0);

  int psd_dim() const { return static_cast<int>(psd_offset.rows()); }
  Eigen::MatrixXd psd_value(const Eigen::VectorXd& z) const;
  /// Slack of every affine row followed by the bound rows.
  Eigen::VectorXd affine_slacks(const Eigen::VectorXd& z) const;
  /// Throws std::invalid_argument on inconsistent sizes, asymmetric or non-finite data.
  void validate() const;
  /// JSON dump for offline cross-checking.
  void dump(std::ostream& os) const;
};

enum class SdpStatus { Optimal, Infeasible, MaxIter, NumericalError };
std::string to_string(SdpStatus s);

struct SdpSolution {
  Eigen::VectorXd z;
  SdpStatus status = SdpStatus::MaxIter;
  double kkt_residual = 0.0;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  /// Optimal: dual multipliers. Infeasible: a Farkas certificate (X PSD, y >= 0,
  /// <F_i, X> + a_i . y = 0, <F0, X> + b . y < 0). Rows follow affine_slacks.
  Eigen::MatrixXd dual_psd;
  Eigen::VectorXd dual_affine;
  std::string message;
};

struct SolverOptions {
  double tolerance = 1e-9;       // target for the scaled KKT residual
  double accept = 1e-6;          // residual still reported as optimal when progress stalls
  int max_iter = 100;
  double step_fraction = 0.98;
  /// Strictly feasible starting point; phase I runs when absent or not interior.
  std::optional<Eigen::VectorXd> initial_point;
};

/// Primal-dual interior point, HKM direction with Mehrotra predictor-corrector.
SdpSolution solve(const LmiProgram& program, const SolverOptions& options = {});

}  // namespace scbf::sdp
