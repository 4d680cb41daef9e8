// Command-line front end: simulate, samples, synth, check, bench.
//
// Exit codes: 0 goal reached (or command succeeded), 1 usage or runtime
// error, 2 parse error, 3 collision, 4 stuck, 5 horizon reached.

#include "scbf/cbfsyn.hpp"
#include "scbf/control.hpp"
#include "scbf/errors.hpp"
#include "scbf/io.hpp"
#include "scbf/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#ifndef SCBF_DATA_DIR
#define SCBF_DATA_DIR "data"
#endif

namespace {

using namespace scbf;

struct SimArgs {
  std::string robot, scene, plan, out, summary;
  std::optional<int> n_samples, horizon, threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, alpha, lambda, eps, beta, tau;
  bool count_support = false, timings = false;
  int runs = 1, jobs = 1;
};

std::string with_seed(const std::string& path, std::uint64_t seed) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? path.substr(0, dot) : path;
  return stem + "_seed" + std::to_string(seed) + (has_ext ? path.substr(dot) : std::string());
}

int run_simulate(const SimArgs& a) {
  const auto model = io::load_robot(a.robot);
  const auto scene = io::load_scene(a.scene);
  auto pf = io::load_plan(a.plan);
  auto& c = pf.config;
  if (a.n_samples) c.n_samples = *a.n_samples;
  if (a.horizon) c.horizon = *a.horizon;
  if (a.threads) c.threads = *a.threads;
  if (a.seed) c.seed = *a.seed;
  if (a.dt) c.dt = *a.dt;
  if (a.alpha) c.alpha = *a.alpha;
  if (a.lambda) c.lambda = *a.lambda;
  if (a.eps) c.eps = *a.eps;
  if (a.beta) c.beta = *a.beta;
  if (a.tau) c.tracking_tau = *a.tau;
  if (a.count_support) c.count_support = true;
  if (pf.start.size() != model.dof()) throw ParseError(a.plan, 0, "start", "joint count differs from the robot");

  if (a.runs <= 1) {
    const auto res = control::simulate(model, scene, pf.start, pf.plan, c);
    if (!a.out.empty()) io::write_trace(a.out, res.trace, model.dof(), a.timings);
    const std::string js = io::summary_to_json(res.summary);
    if (!a.summary.empty()) {
      std::ofstream(a.summary) << js << '\n';
    } else {
      std::cout << js << '\n';
    }
    return control::exit_code(res.summary.outcome);
  }

  // Independent seeded runs; each run's result depends only on its seed.
  std::vector<control::RunSummary> sums(static_cast<std::size_t>(a.runs));
  std::vector<double> verified(sums.size());
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < a.runs; i = next++) {
      control::SimConfig ci = c;
      ci.seed = c.seed + static_cast<std::uint64_t>(i);
      const auto res = control::simulate(model, scene, pf.start, pf.plan, ci);
      if (!a.out.empty()) io::write_trace(with_seed(a.out, ci.seed), res.trace, model.dof(), a.timings);
      sums[static_cast<std::size_t>(i)] = res.summary;
      verified[static_cast<std::size_t>(i)] = control::verify_trace(model, scene, res.trace, ci.dt);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, a.jobs); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int goals = 0, collisions = 0, code = 0;
  double worst = sdfield::kSentinel;
  std::printf("%-8s %-14s %6s %14s %14s\n", "seed", "outcome", "steps", "min_sd_ov", "verified");
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const auto& s = sums[i];
    std::printf("%-8llu %-14s %6d %14.6e %14.6e\n", static_cast<unsigned long long>(c.seed + i),
                control::to_string(s.outcome).c_str(), s.steps, s.min_sd_ov, verified[i]);
    goals += s.outcome == control::Outcome::GoalReached;
    collisions += s.outcome == control::Outcome::Collision || verified[i] < -c.collision_tol;
    worst = std::min(worst, verified[i]);
    if (code == 0 && s.outcome != control::Outcome::GoalReached) code = control::exit_code(s.outcome);
  }
  std::printf("runs %d  goal %d  collisions %d  worst verified sd_ov %.6e\n", a.runs, goals, collisions, worst);
  return code;
}

int run_samples(std::optional<std::int64_t> e, int n, int m, std::vector<double> eps, double beta,
                const std::string& criterion) {
  const std::int64_t ee = e ? *e : scenario::complexity_bound(n, m);
  const auto crit = criterion == "upper" ? scenario::RiskCriterion::Upper : scenario::RiskCriterion::Midpoint;
  if (eps.empty()) eps = {0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
  std::printf("e = %lld, beta = %g, criterion = %s\n", static_cast<long long>(ee), beta, criterion.c_str());
  std::printf("%8s %10s %12s %12s %12s\n", "eps", "N_bar", "eps_lo", "eps_hi", "time_ms");
  for (double x : eps) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sc = scenario::required_samples(ee, x, beta, 1000000, 1e-9, crit);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%8g %10lld %12.6f %12.6f %12.2f%s\n", x, static_cast<long long>(sc.n_bar), sc.eps_lo, sc.eps_hi, ms,
                sc.met ? "" : "  (n_max reached)");
  }
  return 0;
}

struct SynthArgs {
  std::string robot, scene, state, out, dump;
  double dt = 0.01, alpha = 1.0, time = 0.0, eps = 0.1, beta = 0.05;
  int n_samples = 0, threads = 1;
  std::uint64_t seed = 0;
  bool count_support = false;
};

int run_synth(const SynthArgs& a) {
  const auto model = io::load_robot(a.robot);
  const auto scene = io::load_scene(a.scene);
  const Eigen::VectorXd x = io::parse_vector(a.state);
  if (x.size() != model.dof()) throw ParseError("", 0, "state", "joint count differs from the robot");
  control::SimConfig sc;
  sc.eps = a.eps;
  sc.beta = a.beta;
  const int n_bar = a.n_samples > 0 ? a.n_samples : control::default_sample_count(model, sc);
  cbfsyn::SynthesisConfig cfg;
  cfg.alpha = a.alpha;
  cfg.beta = a.beta;
  cfg.count_support = a.count_support;
  cfg.threads = a.threads;
  const auto rep = cbfsyn::synthesize(model, scene, x, a.dt, n_bar, a.seed, Eigen::VectorXd::Zero(model.dof()), cfg,
                                      a.time);
  if (!a.dump.empty()) {
    std::ofstream os(a.dump);
    rep.program.dump(os);
  }
  std::printf("feasible: %s (%s)\n", rep.feasible ? "yes" : "no", rep.message.c_str());
  std::printf("samples: %d  sdp iterations: %d  shrink level: %d\n", rep.n_samples, rep.sdp_iterations,
              rep.shrink_level);
  if (!rep.feasible) return 4;
  const std::string js = io::cbf_to_json(rep.cbf);
  std::printf("%s\n", js.c_str());
  if (!a.out.empty()) std::ofstream(a.out) << js << '\n';
  std::string act;
  for (std::size_t i = 0; i < rep.active.size(); ++i)
    if (rep.active[i]) act += (act.empty() ? "" : ",") + std::to_string(i);
  std::printf("active scenarios: [%s]\n", act.c_str());
  std::printf("c*: %d (%s)\n", rep.c_star, rep.support_counted ? "counted" : "complexity bound");
  std::printf("risk interval: [%.6f, %.6f] at beta = %g\n", rep.risk.eps_lo, rep.risk.eps_hi, rep.risk.beta);
  std::printf("time: total %.3f ms, distances %.3f ms, solve %.3f ms\n", rep.total_ms, rep.sdf_ms, rep.solve_ms);
  return 0;
}

int run_check(const std::string& robot, const std::string& scene_path, const std::string& cbf_path, int mc,
              std::uint64_t seed, double time, int threads) {
  const auto model = io::load_robot(robot);
  const auto scene = io::load_scene(scene_path);
  const auto cbf = io::load_cbf(cbf_path);
  if (cbf.center.size() != model.dof()) throw ParseError(cbf_path, 0, "center", "joint count differs from the robot");
  const auto est = cbfsyn::estimate_violation(model, scene, cbf, mc, seed, time, threads);
  // Wilson score interval at 95%.
  const double z = 1.959963984540054, p = est.rate, nn = est.samples;
  const double den = 1.0 + z * z / nn;
  const double mid = (p + z * z / (2 * nn)) / den;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / den;
  std::printf("samples: %d\nviolations: %d (envelope %d)\nV_hat: %.6f  95%% CI [%.6f, %.6f]\n", est.samples,
              est.violations, est.envelope_violations, est.rate, std::max(0.0, mid - half), std::min(1.0, mid + half));
  return 0;
}

struct BenchArgs {
  std::string robot = std::string(SCBF_DATA_DIR) + "/robot_7dof.json";
  std::string scene = std::string(SCBF_DATA_DIR) + "/scene_7dof.json";
  std::string state = "0,0.6,0,-1.2,0,0.9,0";
  std::vector<double> eps;
  double dt = 0.01, beta = 0.05, lambda = 1.0;
  int reps = 20, threads = 1;
};

int run_bench(BenchArgs a) {
  const auto model = io::load_robot(a.robot);
  const auto scene = io::load_scene(a.scene);
  const Eigen::VectorXd x = io::parse_vector(a.state);
  if (x.size() != model.dof()) throw ParseError("", 0, "state", "joint count differs from the robot");
  if (a.eps.empty()) a.eps = {0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
  const auto e = scenario::complexity_bound(model.dof(), model.dof());
  cbfsyn::SynthesisConfig cfg;
  cfg.threads = a.threads;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0.0 : (v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
  };
  std::printf("n = %d, e = %lld, beta = %g, %d repetitions per row\n", model.dof(), static_cast<long long>(e), a.beta,
              a.reps);
  std::printf("%6s %8s %16s %16s %12s\n", "eps", "N_bar", "synthesize_ms", "filter_input_ms", "feasible");
  for (double ep : a.eps) {
    const auto n_bar = scenario::required_samples(e, ep, a.beta).n_bar;
    std::vector<double> ts, tf;
    int feas = 0;
    for (int r = 0; r < a.reps; ++r) {
      const auto rep = cbfsyn::synthesize(model, scene, x, a.dt, static_cast<int>(n_bar),
                                          control::step_seed(1, static_cast<std::uint64_t>(r)),
                                          Eigen::VectorXd::Zero(model.dof()), cfg);
      ts.push_back(rep.total_ms);
      if (!rep.feasible) continue;
      ++feas;
      Eigen::VectorXd u(model.dof());
      for (auto& v : u) v = uni(rng);
      const auto box = control::joint_limited_box(model, x, a.dt, rep.cbf.input_scale);
      const auto t0 = std::chrono::steady_clock::now();
      const auto f = control::filter_input(rep.cbf, x, u, a.lambda, box);
      tf.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      (void)f;
    }
    std::printf("%6g %8lld %16.3f %16.5f %9d/%d\n", ep, static_cast<long long>(n_bar), median(ts), median(tf), feas,
                a.reps);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampled control barrier function synthesis and safety filtering"};
  app.require_subcommand(1);

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Run the closed loop and write the trace");
  s->add_option("--robot", sim.robot, "Robot file")->required();
  s->add_option("--scene", sim.scene, "Scene file")->required();
  s->add_option("--plan", sim.plan, "Plan file")->required();
  s->add_option("--out", sim.out, "Trace CSV path");
  s->add_option("--summary", sim.summary, "Summary JSON path (stdout otherwise)");
  s->add_option("--n-samples", sim.n_samples, "Samples per synthesis (default from eps and beta)");
  s->add_option("--seed", sim.seed, "Base seed");
  s->add_option("--dt", sim.dt, "Control period [s]");
  s->add_option("--alpha", sim.alpha, "Class-K gain of the certificate");
  s->add_option("--lambda", sim.lambda, "Gain of the filter constraint");
  s->add_option("--eps", sim.eps, "Target violation probability");
  s->add_option("--beta", sim.beta, "Confidence parameter");
  s->add_option("--horizon", sim.horizon, "Maximum number of steps");
  s->add_option("--tau", sim.tau, "First-order tracking lag [s]");
  s->add_option("--threads", sim.threads, "Threads for distance batches");
  s->add_flag("--count-support", sim.count_support, "Count support constraints for the risk bound");
  s->add_flag("--timings", sim.timings, "Add wall-time columns to the trace");
  s->add_option("--runs", sim.runs, "Independent runs with seeds seed, seed+1, ...")->check(CLI::PositiveNumber);
  s->add_option("--jobs", sim.jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::optional<std::int64_t> e;
  int n_dim = 7, m_dim = 7;
  std::vector<double> eps;
  double beta = 0.05;
  std::string criterion = "midpoint";
  auto* sm = app.add_subcommand("samples", "Sample count for a target risk");
  sm->add_option("--e", e, "Complexity bound (default m + n^2 + 2)");
  sm->add_option("--n", n_dim, "State dimension");
  sm->add_option("--m", m_dim, "Input dimension");
  sm->add_option("--eps", eps, "Target risk values")->check(CLI::Range(0.0, 1.0));
  sm->add_option("--beta", beta, "Confidence parameter")->check(CLI::Range(0.0, 1.0));
  sm->add_option("--criterion", criterion, "midpoint or upper")->check(CLI::IsMember({"midpoint", "upper"}));

  SynthArgs sy;
  auto* sn = app.add_subcommand("synth", "Synthesize one certificate");
  sn->add_option("--robot", sy.robot, "Robot file")->required();
  sn->add_option("--scene", sy.scene, "Scene file")->required();
  sn->add_option("--state", sy.state, "Joint configuration q1,...,qn")->required();
  sn->add_option("--dt", sy.dt, "Control period [s]");
  sn->add_option("--n-samples", sy.n_samples, "Number of samples (default from eps and beta)");
  sn->add_option("--eps", sy.eps, "Target risk when deriving the sample count");
  sn->add_option("--beta", sy.beta, "Confidence parameter");
  sn->add_option("--seed", sy.seed, "Sampling seed");
  sn->add_option("--alpha", sy.alpha, "Class-K gain");
  sn->add_option("--time", sy.time, "Scene time [s]");
  sn->add_option("--threads", sy.threads, "Threads for distance batches");
  sn->add_flag("--count-support", sy.count_support, "Count support constraints");
  sn->add_option("--out", sy.out, "Write the certificate JSON here");
  sn->add_option("--dump", sy.dump, "Write the program JSON here");

  std::string c_robot, c_scene, c_cbf;
  int mc = 10000, c_threads = 1;
  std::uint64_t c_seed = 12345;
  double c_time = 0.0;
  auto* ck = app.add_subcommand("check", "Estimate the violation probability of a certificate");
  ck->add_option("--robot", c_robot, "Robot file")->required();
  ck->add_option("--scene", c_scene, "Scene file")->required();
  ck->add_option("--cbf", c_cbf, "Certificate file")->required();
  ck->add_option("--mc", mc, "Fresh samples")->check(CLI::PositiveNumber);
  ck->add_option("--seed", c_seed, "Sampling seed");
  ck->add_option("--time", c_time, "Scene time [s]");
  ck->add_option("--threads", c_threads, "Threads for distance batches");

  BenchArgs bn;
  auto* bc = app.add_subcommand("bench", "Per-step timing table");
  bc->add_option("--robot", bn.robot, "Robot file");
  bc->add_option("--scene", bn.scene, "Scene file");
  bc->add_option("--state", bn.state, "Joint configuration");
  bc->add_option("--eps", bn.eps, "Target risk values");
  bc->add_option("--reps", bn.reps, "Repetitions per row")->check(CLI::PositiveNumber);
  bc->add_option("--lambda", bn.lambda, "Filter gain");
  bc->add_option("--threads", bn.threads, "Threads for distance batches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*s) return run_simulate(sim);
    if (*sm) return run_samples(e, n_dim, m_dim, eps, beta, criterion);
    if (*sn) return run_synth(sy);
    if (*ck) return run_check(c_robot, c_scene, c_cbf, mc, c_seed, c_time, c_threads);
    if (*bc) return run_bench(bn);
  } catch (const ParseError& err) {
    std::fprintf(stderr, "parse error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 1;
}
