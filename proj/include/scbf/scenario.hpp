#pragma once

#include "scbf/robot.hpp"
#include "scbf/sdfield.hpp"
#include "scbf/sdp.hpp"

#include <cstdint>
#include <vector>

namespace scbf::scenario {

using robot::JointConfig;
using robot::ReachableBall;

struct ScenarioBatch {
  ReachableBall ball;
  std::vector<JointConfig> samples;
  std::vector<sdfield::SdfSample> sdf;
  std::uint64_t rng_seed = 0;
};

/// I.i.d. uniform samples in the ball: Gaussian direction, radius r * U^(1/n).
/// Deterministic for a fixed seed.
std::vector<JointConfig> sample_ball(const ReachableBall& ball, int n_samples, std::uint64_t seed);

/// The two nonnegative roots of the risk polynomial in xi, and the risk
/// interval they induce.
struct PolyRoots {
  double xi_lo = 0.0;
  double xi_hi = 0.0;
  double eps_lo() const;
  double eps_hi() const;
};

/// Roots for sample count n_bar, complexity k and confidence parameter beta.
/// Throws ConvergenceError when the roots cannot be bracketed.
PolyRoots scen_poly_roots(std::int64_t n_bar, std::int64_t k, double beta);

/// log(leading term) - log(sum of the remaining terms) at xi = exp(s). Zero at
/// both roots, concave in s.
double scen_poly_log_gap(std::int64_t n_bar, std::int64_t k, double beta, double s);

enum class RiskCriterion {
  Midpoint,  // (eps_lo(e) + eps_hi(e)) / 2
  Upper,     // eps_hi(e)
};

struct SampleCount {
  std::int64_t n_bar = 0;
  double eps_lo = 0.0;
  double eps_hi = 0.0;
  double achieved = 0.0;  // the risk value compared against eps
  bool met = false;       // false: n_max too small, n_bar is the best found
};

/// Smallest n_bar in (e, n_max] whose risk (per `criterion`, evaluated at
/// complexity e) is at most eps + eps_p.
SampleCount required_samples(std::int64_t e, double eps, double beta, std::int64_t n_max = 1000000,
                             double eps_p = 1e-9, RiskCriterion criterion = RiskCriterion::Midpoint);

/// e = m + n^2 + 2 for n states and m inputs.
inline std::int64_t complexity_bound(int n, int m) { return m + static_cast<std::int64_t>(n) * n + 2; }

struct RiskBound {
  double eps_lo = 0.0;
  double eps_hi = 1.0;
  double beta = 0.05;
  std::int64_t complexity = 0;
  std::int64_t n_bar = 0;
};

RiskBound posterior_risk(std::int64_t c_star, std::int64_t n_bar, double beta);

/// A solved convex program whose scenario constraints come in groups: removing
/// a scenario removes all of its rows.
struct ScenarioProgram {
  sdp::LmiProgram base;  // deterministic constraints only
  std::vector<std::vector<sdp::AffineRow>> scenarios;

  sdp::LmiProgram assemble(int skip = -1) const;
  /// Index of the first row of scenario i inside assemble().affine.
  std::vector<int> row_offsets() const;
};

struct SupportOptions {
  double active_tol = 1e-6;   // scaled slack below which a row counts as active
  double change_tol = 1e-7;   // objective gain, scaled by 1 + |objective|
  bool exhaustive = false;    // re-solve every scenario, not only active ones
  sdp::SolverOptions solver;
};

struct SupportCount {
  int c_star = 0;
  std::vector<bool> active;
  std::vector<bool> support;
  int resolves = 0;
};

/// Leave-one-out support counting. A scenario is support when removing it
/// raises the optimal value by more than change_tol. The program must have a
/// unique optimizer, so a gain in value is the same as a moved optimizer.
/// Failed re-solves count as support.
SupportCount count_support_constraints(const ScenarioProgram& program, const sdp::SdpSolution& solution,
                                       const SupportOptions& options = {});

}  // namespace scbf::scenario
