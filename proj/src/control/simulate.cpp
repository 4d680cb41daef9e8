#include "scbf/control.hpp"

#include "scbf/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace scbf::control {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::GoalReached: return "goal_reached";
    case Outcome::Collision: return "collision";
    case Outcome::Stuck: return "failed_stuck";
    case Outcome::Horizon: return "horizon";
  }
  return "unknown";
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::GoalReached: return 0;
    case Outcome::Collision: return 3;
    case Outcome::Stuck: return 4;
    case Outcome::Horizon: return 5;
  }
  return 1;
}

std::uint64_t step_seed(std::uint64_t seed, std::uint64_t step) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (step + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int default_sample_count(const robot::RobotModel& model, const SimConfig& config) {
  const int n = model.dof();
  const auto sc = scenario::required_samples(scenario::complexity_bound(n, n), config.eps, config.beta);
  return static_cast<int>(sc.n_bar);
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

// Enough substeps that the discretization loss of the barrier over one period,
// bounded by dt^2 |u|^2 / m, stays below 1e-7.
int auto_substeps(const Eigen::VectorXd& u_max, double dt) {
  const double need = std::ceil(dt * dt * u_max.squaredNorm() / 1e-7);
  return static_cast<int>(std::clamp(need, 1.0, 4096.0));
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunResult simulate(const robot::RobotModel& model, const sdfield::Scene& scene, const JointConfig& start,
                   const WaypointPlan& plan, const SimConfig& cfg) {
  const auto t_run = std::chrono::steady_clock::now();
  const int n = model.dof();
  if (start.size() != n) throw std::invalid_argument("simulate: start state has the wrong dimension");
  plan.validate(n);
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
  if (cfg.horizon < 1) throw std::invalid_argument("simulate: horizon must be positive");

  const int n_bar = cfg.n_samples > 0 ? cfg.n_samples : default_sample_count(model, cfg);
  const Eigen::VectorXd u_max = model.input_bounds();
  const int m = cfg.substeps > 0 ? cfg.substeps : auto_substeps(u_max, cfg.dt);
  const double h = cfg.dt / m;

  cbfsyn::SynthesisConfig scfg;
  scfg.alpha = cfg.alpha;
  scfg.rounds = cfg.rounds;
  scfg.count_support = cfg.count_support;
  scfg.beta = cfg.beta;
  scfg.threads = cfg.threads;

  RunResult res;
  RunSummary& sum = res.summary;
  sum.n_samples = n_bar;
  WaypointTracker tracker(plan);
  JointConfig x = start;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(n);
  int stuck = 0;
  std::vector<double> synth_ms, filter_ms;

  for (int k = 0; k < cfg.horizon; ++k) {
    const double t = k * cfg.dt;
    StepRecord rec;
    rec.step = k;
    rec.t = t;
    rec.x = x;
    rec.u_des = rec.u_star = Eigen::VectorXd::Zero(n);
    rec.sd_ov = sdfield::overall_sdf(model, x, scene, t).sd_ov;
    sum.min_sd_ov = std::min(sum.min_sd_ov, rec.sd_ov);
    rec.active_waypoint = tracker.active();

    if (rec.sd_ov < -cfg.collision_tol) {
      rec.qp_status = "collision";
      res.trace.push_back(rec);
      sum.outcome = Outcome::Collision;
      break;
    }

    rec.u_des = tracker.desired_input(x, Box::symmetric(u_max));
    if (tracker.finished()) {
      rec.u_des.setZero();
      rec.qp_status = "goal";
      res.trace.push_back(rec);
      sum.outcome = Outcome::GoalReached;
      break;
    }

    const auto rep = cbfsyn::synthesize(model, scene, x, cfg.dt, n_bar, step_seed(cfg.seed, k), rec.u_des, scfg,
                                        t + cfg.dt);
    rec.synth_time_ms = rep.total_ms;
    synth_ms.push_back(rep.total_ms);

    JointConfig x_next = x;
    if (!rep.feasible) {
      rec.qp_status = "synth_infeasible";
      velocity.setZero();
      ++stuck;
      ++sum.infeasible_steps;
    } else {
      const auto& cbf = rep.cbf;
      rec.d_b = cbf.d_b;
      rec.c_star = rep.c_star;
      rec.eps_lo = rep.risk.eps_lo;
      rec.eps_hi = rep.risk.eps_hi;
      rec.shrink_level = rep.shrink_level;
      rec.b_value = cbfsyn::evaluate_cbf(cbf, x).value;
      rec.substeps = m;

      // Continuous-time filter: the QP is re-solved on a fine grid inside the
      // control period with this step's barrier.
      const auto t_filter = std::chrono::steady_clock::now();
      bool active = false, infeasible = false;
      double min_c = std::numeric_limits<double>::infinity();
      for (int j = 0; j < m; ++j) {
        const Box box = joint_limited_box(model, x_next, h, cbf.input_scale);
        const FilterResult f = filter_input(cbf, x_next, rec.u_des, cfg.lambda, box);
        min_c = std::min(min_c, f.constraint);
        if (f.status == FilterStatus::Infeasible) {
          infeasible = true;
          velocity.setZero();
          break;
        }
        active = active || f.status == FilterStatus::Active;
        if (cfg.tracking_tau > 0.0) {
          velocity += (f.u - velocity) * std::min(1.0, h / cfg.tracking_tau);
        } else {
          velocity = f.u;
        }
        x_next += velocity * h;
      }
      rec.filter_time_ms = ms_since(t_filter);
      filter_ms.push_back(rec.filter_time_ms / m);
      rec.min_constraint = min_c;
      rec.qp_status = infeasible ? "qp_infeasible" : (active ? "active" : "inactive");
      rec.b_next = cbfsyn::evaluate_cbf(cbf, x_next).value;
      if (infeasible) {
        ++stuck;
        ++sum.infeasible_steps;
      } else {
        stuck = 0;
      }
    }
    rec.u_star = (x_next - x) / cfg.dt;
    res.trace.push_back(rec);
    x = x_next;
    tracker.observe(x);

    if (stuck >= cfg.infeasible_budget) {
      sum.outcome = Outcome::Stuck;
      break;
    }
  }

  sum.steps = static_cast<int>(res.trace.size());
  sum.final_state = x;
  sum.final_waypoint = tracker.active();
  sum.median_synth_ms = median(synth_ms);
  sum.median_filter_ms = median(filter_ms);
  sum.total_ms = ms_since(t_run);
  return res;
}

double verify_trace(const robot::RobotModel& model, const sdfield::Scene& scene, const std::vector<StepRecord>& trace,
                    double dt) {
  double worst = sdfield::kSentinel;
  for (const auto& r : trace) worst = std::min(worst, sdfield::overall_sdf(model, r.x, scene, r.step * dt).sd_ov);
  return worst;
}

}  // namespace scbf::control
