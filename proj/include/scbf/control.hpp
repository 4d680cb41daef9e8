#pragma once

#include "scbf/cbfsyn.hpp"
#include "scbf/robot.hpp"
#include "scbf/sdfield.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace scbf::control {

using robot::JointConfig;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Box symmetric(const Eigen::VectorXd& u_max) { return {-u_max, u_max}; }
  Eigen::VectorXd clamp(const Eigen::VectorXd& u) const { return u.cwiseMax(lower).cwiseMin(upper); }
};

/// Input box that also keeps x + u h inside the joint limits.
Box joint_limited_box(const robot::RobotModel& model, const JointConfig& x, double h, double input_scale = 1.0);

// ---------------------------------------------------------------------------
// Waypoint tracking

struct WaypointPlan {
  std::vector<JointConfig> waypoints;
  double gain = 1.0;            // 1/s
  double switch_radius = 0.05;  // rad
  int stall_window = 50;        // steps
  double stall_eps = 1e-3;      // rad

  void validate(int dof) const;
};

/// P controller towards the active waypoint with the arrival and stall switches.
class WaypointTracker {
 public:
  explicit WaypointTracker(WaypointPlan plan);

  /// u_des = clamp(k_p (w - x)); then advances on arrival. The last waypoint
  /// only completes by arrival.
  Eigen::VectorXd desired_input(const JointConfig& x, const Box& bounds);
  /// Feeds the state reached after a step; advances on stall.
  void observe(const JointConfig& x);

  int active() const { return active_; }
  bool finished() const { return finished_; }
  const WaypointPlan& plan() const { return plan_; }

 private:
  void advance();

  WaypointPlan plan_;
  int active_ = 0;
  bool finished_ = false;
  std::deque<JointConfig> history_;
};

// ---------------------------------------------------------------------------
// Safety filter

enum class FilterStatus { Inactive, Active, Infeasible };
std::string to_string(FilterStatus s);

struct FilterResult {
  Eigen::VectorXd u;
  FilterStatus status = FilterStatus::Inactive;
  double multiplier = 0.0;    // on the barrier constraint
  double constraint = 0.0;    // g.u + lambda b at the returned u
};

/// argmin 1/2 |u - u_des|^2  s.t.  g.u + lambda b >= 0,  u in box,
/// with g, b from the CBF at x. Exact dual breakpoint search.
FilterResult filter_input(const cbfsyn::QuadraticCBF& cbf, const JointConfig& x, const Eigen::VectorXd& u_des,
                          double lambda, const Box& bounds);
/// Same QP for explicit g and b.
FilterResult filter_halfspace(const Eigen::VectorXd& g, double b, const Eigen::VectorXd& u_des, double lambda,
                              const Box& bounds);

// ---------------------------------------------------------------------------
// Simulation

struct SimConfig {
  double dt = 0.01;
  int horizon = 3000;           // steps
  double alpha = 1.0;
  double lambda = 1.0;
  int n_samples = 0;            // 0: derive from eps and beta
  double eps = 0.1;
  double beta = 0.05;
  std::uint64_t seed = 0;
  int infeasible_budget = 50;
  double tracking_tau = 0.0;    // first-order velocity lag; 0 tracks ideally
  bool count_support = false;
  int rounds = 1;
  int substeps = 0;             // 0: chosen from dt and the input bounds
  double collision_tol = 1e-6;
  int threads = 1;
};

enum class Outcome { GoalReached, Collision, Stuck, Horizon };
std::string to_string(Outcome o);
int exit_code(Outcome o);

struct StepRecord {
  int step = 0;
  double t = 0.0;
  JointConfig x;
  Eigen::VectorXd u_des;
  Eigen::VectorXd u_star;
  double sd_ov = 0.0;
  double b_value = 0.0;  // step CBF at x
  double b_next = 0.0;   // step CBF at the next state
  double d_b = 0.0;
  std::string qp_status;
  int active_waypoint = 0;
  int c_star = 0;
  double eps_lo = 0.0;
  double eps_hi = 1.0;
  int shrink_level = 0;
  int substeps = 0;
  double min_constraint = 0.0;  // smallest g.u + lambda b over the substeps
  double synth_time_ms = 0.0;
  double filter_time_ms = 0.0;
};

struct RunSummary {
  Outcome outcome = Outcome::Horizon;
  int steps = 0;
  double min_sd_ov = sdfield::kSentinel;
  JointConfig final_state;
  int final_waypoint = 0;
  int infeasible_steps = 0;
  int n_samples = 0;
  double median_synth_ms = 0.0;
  double median_filter_ms = 0.0;
  double total_ms = 0.0;
};

struct RunResult {
  RunSummary summary;
  std::vector<StepRecord> trace;
};

/// splitmix64 of (seed, step): the per-step sampling seed.
std::uint64_t step_seed(std::uint64_t seed, std::uint64_t step);

/// Sample count used when config.n_samples is 0.
int default_sample_count(const robot::RobotModel& model, const SimConfig& config);

RunResult simulate(const robot::RobotModel& model, const sdfield::Scene& scene, const JointConfig& start,
                   const WaypointPlan& plan, const SimConfig& config);

/// Smallest sd_ov over the logged states, recomputed from scratch.
double verify_trace(const robot::RobotModel& model, const sdfield::Scene& scene, const std::vector<StepRecord>& trace,
                    double dt);

}  // namespace scbf::control
