#pragma once

#include "scbf/numerics.hpp"
#include "scbf/robot.hpp"
#include "scbf/scenario.hpp"
#include "scbf/sdfield.hpp"
#include "scbf/sdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scbf::cbfsyn {

using robot::JointConfig;
using robot::ReachableBall;
using robot::RobotModel;

/// b(x) = (x - center)^T H (x - center) + d_b
struct QuadraticCBF {
  JointConfig center;
  numerics::SymMatrix h_matrix;
  double d_b = 0.0;
  double alpha = 1.0;
  double sigma1 = 0.0;
  double radius = 0.0;       // reachable-ball radius the set was certified in
  double input_scale = 1.0;  // fraction of the robot's input bounds assumed

  /// Throws std::invalid_argument when H is not negative definite with
  /// ||H|| <= 1, d_b < margin, or dimensions disagree.
  void validate(double margin = 1e-6) const;
};

struct CbfValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

CbfValue evaluate_cbf(const QuadraticCBF& cbf, const JointConfig& x);

/// How the input in the invariance rows is chosen.
enum class InvarianceMode {
  SharedInput,     // one candidate input for every sample
  PerSampleInput,  // per sample, each coordinate at full speed towards the center of H
};

struct SynthesisConfig {
  double alpha = 1.0;
  double margin = 1e-6;      // mu in H <= -mu I, d_b >= mu
  double tie_break = 1e-3;   // weight of r^2 sigma in the objective
  int rounds = 1;
  InvarianceMode mode = InvarianceMode::PerSampleInput;
  bool count_support = false;
  double beta = 0.05;
  int max_shrink = 6;        // halvings of the input bounds before giving up
  int threads = 1;
  sdp::SolverOptions solver;
};

/// Layout of the decision vector z = [upper triangle of H (row-major), d_b, sigma1].
struct Layout {
  int n = 0;
  int num_vars() const { return n * (n + 1) / 2 + 2; }
  int h(int i, int j) const;
  int d() const { return n * (n + 1) / 2; }
  int sigma() const { return d() + 1; }
};

/// Program with explicit per-sample inputs (`inputs[i]` pairs with sample i).
/// Scenario i carries its envelope row (omitted for sentinel distances) and
/// its invariance row.
scenario::ScenarioProgram assemble_scenario_program(const ReachableBall& ball, const scenario::ScenarioBatch& batch,
                                                     const std::vector<Eigen::VectorXd>& inputs,
                                                     const SynthesisConfig& config);

/// Single shared candidate input. Throws std::invalid_argument on an empty batch.
sdp::LmiProgram assemble_program(const RobotModel& model, const JointConfig& x_k, const ReachableBall& ball,
                                 const scenario::ScenarioBatch& batch, const Eigen::VectorXd& u_candidate,
                                 double alpha);

/// Inputs chosen coordinate-wise: u_j = bound_j * sign((H x~)_j).
std::vector<Eigen::VectorXd> select_inputs(const numerics::SymMatrix& h, const scenario::ScenarioBatch& batch,
                                           const Eigen::VectorXd& bounds);

QuadraticCBF decode(const Eigen::VectorXd& z, const JointConfig& center, double radius, double alpha);

struct SynthesisReport {
  bool feasible = false;
  QuadraticCBF cbf;
  int n_samples = 0;
  std::vector<bool> active;
  int c_star = 0;
  bool support_counted = false;
  scenario::RiskBound risk;
  sdp::SdpStatus status = sdp::SdpStatus::MaxIter;
  int sdp_iterations = 0;
  int shrink_level = 0;
  double solve_ms = 0.0;
  double sdf_ms = 0.0;
  double total_ms = 0.0;
  std::string message;
  sdp::LmiProgram program;  // the final program, for dumps
};

/// Samples the reachable ball, evaluates distances, solves the program and
/// attaches a risk certificate. When no invariant set can be certified the
/// input bounds are halved (up to max_shrink times) and the attempt repeated.
SynthesisReport synthesize(const RobotModel& model, const sdfield::Scene& scene, const JointConfig& x_k, double dt,
                           int n_bar, std::uint64_t seed, const Eigen::VectorXd& u_candidate,
                           const SynthesisConfig& config, double scene_time = 0.0);

/// True when the scenario constraint of a sample is violated by `cbf`: either
/// the envelope b(x) <= sd_ov(x) or the invariance condition with the
/// per-sample input u_j = bound_j * sign(center_j - x_j) fails. `bounds` is
/// the input box the certificate assumed. Sentinel distances have no envelope.
bool violates_scenario(const QuadraticCBF& cbf, const JointConfig& x, const sdfield::SdfSample& sdf,
                       const Eigen::VectorXd& bounds);

struct ViolationEstimate {
  int samples = 0;
  int violations = 0;
  int envelope_violations = 0;
  double rate = 0.0;  // violations / samples
};

/// Monte-Carlo estimate of the violation probability of `cbf` under the
/// uniform distribution on its reachable ball.
ViolationEstimate estimate_violation(const RobotModel& model, const sdfield::Scene& scene, const QuadraticCBF& cbf,
                                     int n_mc, std::uint64_t seed, double scene_time = 0.0, int threads = 1);

}  // namespace scbf::cbfsyn
