#include "scbf/cbfsyn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace scbf::cbfsyn {

void QuadraticCBF::validate(double margin) const {
  const int n = static_cast<int>(center.size());
  if (h_matrix.dim() != n) throw std::invalid_argument("QuadraticCBF: H and center dimensions differ");
  if (!h_matrix.is_finite() || !std::isfinite(d_b)) throw std::invalid_argument("QuadraticCBF: non-finite data");
  const auto eig = numerics::sym_eigen(h_matrix);
  if (eig.values[n - 1] > -margin * (1.0 - 1e-9))
    throw std::invalid_argument("QuadraticCBF: H is not negative definite with the required margin");
  if (eig.values[0] < -1.0 - 1e-9) throw std::invalid_argument("QuadraticCBF: ||H|| exceeds 1");
  if (d_b < margin * (1.0 - 1e-9)) throw std::invalid_argument("QuadraticCBF: d_b below margin");
  if (!(alpha > 0.0)) throw std::invalid_argument("QuadraticCBF: alpha must be positive");
}

CbfValue evaluate_cbf(const QuadraticCBF& cbf, const JointConfig& x) {
  if (x.size() != cbf.center.size()) throw std::invalid_argument("evaluate_cbf: dimension mismatch");
  const Eigen::VectorXd xt = x - cbf.center;
  const Eigen::MatrixXd h = cbf.h_matrix.to_dense();
  const Eigen::VectorXd hx = h * xt;
  return {xt.dot(hx) + cbf.d_b, 2.0 * hx};
}

int Layout::h(int i, int j) const {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

namespace {

// The program is posed in scaled coordinates y = x~ / r with the decision
// d' = d_b / r^2, which keeps every coefficient of order one.
sdp::LmiProgram base_program(int n, double radius, const SynthesisConfig& cfg) {
  const Layout L{n};
  const int nv = L.num_vars();
  const int dim = 3 * n + 1;
  sdp::LmiProgram p(nv, dim);
  const double r2 = radius * radius;

  p.objective[L.d()] = 1.0;
  p.objective[L.sigma()] = cfg.tie_break;

  // Block A: [[-H - sigma I, 0], [0, sigma - d']]   (containment in the ball)
  // Block B: -H - mu I                               (strict negativity)
  // Block C: I + H                                   (||H|| <= 1)
  const int ob = n + 1, oc = 2 * n + 1;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      auto& f = p.psd_coeffs[static_cast<std::size_t>(L.h(i, j))];
      f(i, j) = f(j, i) = -1.0;
      f(ob + i, ob + j) = f(ob + j, ob + i) = -1.0;
      f(oc + i, oc + j) = f(oc + j, oc + i) = 1.0;
    }
  auto& fs = p.psd_coeffs[static_cast<std::size_t>(L.sigma())];
  for (int i = 0; i < n; ++i) fs(i, i) = -1.0;
  fs(n, n) = 1.0;
  p.psd_coeffs[static_cast<std::size_t>(L.d())](n, n) = -1.0;
  for (int i = 0; i < n; ++i) {
    p.psd_offset(ob + i, ob + i) = -cfg.margin;
    p.psd_offset(oc + i, oc + i) = 1.0;
  }

  sdp::AffineRow dmin{Eigen::VectorXd::Zero(nv), -cfg.margin / r2};
  dmin.coeffs[L.d()] = 1.0;
  p.affine.push_back(dmin);
  return p;
}

// Coefficients of y^T H v in the packed H variables.
void add_bilinear(const Layout& L, const Eigen::VectorXd& y, const Eigen::VectorXd& v, double w, Eigen::VectorXd& row) {
  for (int i = 0; i < L.n; ++i) {
    row[L.h(i, i)] += w * y[i] * v[i];
    for (int j = i + 1; j < L.n; ++j) row[L.h(i, j)] += w * (y[i] * v[j] + y[j] * v[i]);
  }
}

Eigen::VectorXd initial_point(int n, const scenario::ScenarioBatch& batch, double radius, const SynthesisConfig& cfg) {
  const Layout L{n};
  Eigen::VectorXd z = Eigen::VectorXd::Zero(L.num_vars());
  for (int i = 0; i < n; ++i) z[L.h(i, i)] = -0.5;
  z[L.sigma()] = 0.25;
  const double r2 = radius * radius;
  double cap = 0.1;
  for (std::size_t i = 0; i < batch.samples.size(); ++i) {
    const auto& s = batch.sdf[i];
    if (s.is_sentinel()) continue;
    const double y2 = (batch.samples[i] - batch.ball.center).squaredNorm() / r2;
    cap = std::min(cap, 0.5 * (s.sd_ov / r2 + 0.5 * y2));
  }
  z[L.d()] = std::max(cap, 2.0 * cfg.margin / r2);
  return z;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

scenario::ScenarioProgram assemble_scenario_program(const ReachableBall& ball, const scenario::ScenarioBatch& batch,
                                                     const std::vector<Eigen::VectorXd>& inputs,
                                                     const SynthesisConfig& cfg) {
  if (batch.samples.empty()) throw std::invalid_argument("assemble_program: empty scenario batch");
  if (batch.sdf.size() != batch.samples.size() || inputs.size() != batch.samples.size())
    throw std::invalid_argument("assemble_program: samples, distances and inputs must align");
  if (!(ball.radius > 0.0)) throw std::invalid_argument("assemble_program: ball radius must be positive");
  const int n = static_cast<int>(ball.center.size());
  const Layout L{n};
  const double r = ball.radius, r2 = r * r;

  scenario::ScenarioProgram prog{base_program(n, r, cfg), {}};
  prog.scenarios.reserve(batch.samples.size());
  for (std::size_t i = 0; i < batch.samples.size(); ++i) {
    const Eigen::VectorXd y = (batch.samples[i] - ball.center) / r;
    std::vector<sdp::AffineRow> rows;
    if (!batch.sdf[i].is_sentinel()) {
      // sd / r^2 - y^T H y - d' >= 0. Since y^T H y + d' lies in [-1, 1] on
      // the feasible set, clamping the offset to [-2, 2] keeps the feasible set
      // and avoids badly scaled rows when r is small.
      const double off = std::clamp(batch.sdf[i].sd_ov / r2, -2.0, 2.0);
      sdp::AffineRow env{Eigen::VectorXd::Zero(L.num_vars()), off};
      add_bilinear(L, y, y, -1.0, env.coeffs);
      env.coeffs[L.d()] = -1.0;
      rows.push_back(std::move(env));
    }
    // (2 / r) y^T H u + alpha (y^T H y + d') >= 0
    sdp::AffineRow inv{Eigen::VectorXd::Zero(L.num_vars()), 0.0};
    add_bilinear(L, y, inputs[i], 2.0 / r, inv.coeffs);
    add_bilinear(L, y, y, cfg.alpha, inv.coeffs);
    inv.coeffs[L.d()] = cfg.alpha;
    rows.push_back(std::move(inv));
    prog.scenarios.push_back(std::move(rows));
  }
  return prog;
}

sdp::LmiProgram assemble_program(const RobotModel& model, const JointConfig& x_k, const ReachableBall& ball,
                                 const scenario::ScenarioBatch& batch, const Eigen::VectorXd& u_candidate,
                                 double alpha) {
  if (x_k.size() != model.dof() || u_candidate.size() != model.dof())
    throw std::invalid_argument("assemble_program: dimension mismatch");
  SynthesisConfig cfg;
  cfg.alpha = alpha;
  const std::vector<Eigen::VectorXd> inputs(batch.samples.size(), u_candidate);
  return assemble_scenario_program(ball, batch, inputs, cfg).assemble();
}

std::vector<Eigen::VectorXd> select_inputs(const numerics::SymMatrix& h, const scenario::ScenarioBatch& batch,
                                           const Eigen::VectorXd& bounds) {
  const Eigen::MatrixXd hd = h.to_dense();
  std::vector<Eigen::VectorXd> out;
  out.reserve(batch.samples.size());
  for (const auto& x : batch.samples) {
    const Eigen::VectorXd g = hd * (x - batch.ball.center);
    Eigen::VectorXd u(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) u[j] = g[j] > 0.0 ? bounds[j] : (g[j] < 0.0 ? -bounds[j] : 0.0);
    out.push_back(u);
  }
  return out;
}

QuadraticCBF decode(const Eigen::VectorXd& z, const JointConfig& center, double radius, double alpha) {
  const int n = static_cast<int>(center.size());
  const Layout L{n};
  if (z.size() != L.num_vars()) throw std::invalid_argument("decode: decision vector has the wrong size");
  QuadraticCBF c;
  c.center = center;
  c.h_matrix = numerics::SymMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) c.h_matrix(i, j) = z[L.h(i, j)];
  c.d_b = z[L.d()] * radius * radius;
  c.sigma1 = z[L.sigma()];
  c.radius = radius;
  c.alpha = alpha;
  return c;
}

SynthesisReport synthesize(const RobotModel& model, const sdfield::Scene& scene, const JointConfig& x_k, double dt,
                           int n_bar, std::uint64_t seed, const Eigen::VectorXd& u_candidate,
                           const SynthesisConfig& cfg, double scene_time) {
  const auto t_start = std::chrono::steady_clock::now();
  if (n_bar < 1) throw std::invalid_argument("synthesize: n_bar must be positive");
  if (x_k.size() != model.dof()) throw std::invalid_argument("synthesize: state dimension mismatch");
  const int n = model.dof();
  const Eigen::VectorXd u_max = model.input_bounds();

  SynthesisReport rep;
  rep.n_samples = n_bar;
  for (int level = 0; level <= cfg.max_shrink; ++level) {
    const double scale = std::ldexp(1.0, -level);
    const Eigen::VectorXd bounds = u_max * scale;
    const ReachableBall ball = robot::reachable_ball(bounds, x_k, dt);
    if (ball.radius * ball.radius < 2.0 * cfg.margin) break;

    scenario::ScenarioBatch batch;
    batch.ball = ball;
    batch.rng_seed = seed;
    batch.samples = scenario::sample_ball(ball, n_bar, seed);
    const auto t_sdf = std::chrono::steady_clock::now();
    batch.sdf = sdfield::overall_sdf_batch(model, batch.samples, scene, scene_time, cfg.threads);
    rep.sdf_ms += ms_since(t_sdf);

    std::vector<Eigen::VectorXd> inputs;
    if (cfg.mode == InvarianceMode::SharedInput) {
      if (u_candidate.size() != n) throw std::invalid_argument("synthesize: u_candidate dimension mismatch");
      inputs.assign(batch.samples.size(), u_candidate.cwiseMax(-bounds).cwiseMin(bounds));
    } else {
      inputs = select_inputs(-1.0 * numerics::SymMatrix::identity(n), batch, bounds);
    }

    sdp::SolverOptions sopt = cfg.solver;
    sopt.initial_point = initial_point(n, batch, ball.radius, cfg);
    bool solved = false;
    scenario::ScenarioProgram prog;
    sdp::SdpSolution sol;
    const auto t_solve = std::chrono::steady_clock::now();
    for (int round = 0; round < std::max(1, cfg.rounds); ++round) {
      scenario::ScenarioProgram trial = assemble_scenario_program(ball, batch, inputs, cfg);
      sdp::SdpSolution s = sdp::solve(trial.assemble(), sopt);
      rep.sdp_iterations += s.iterations;
      rep.status = s.status;
      if (s.status != sdp::SdpStatus::Optimal) break;
      solved = true;
      prog = std::move(trial);
      sol = std::move(s);
      if (round + 1 < cfg.rounds && cfg.mode == InvarianceMode::PerSampleInput) {
        const QuadraticCBF c = decode(sol.z, x_k, ball.radius, cfg.alpha);
        inputs = select_inputs(c.h_matrix, batch, bounds);
      }
    }
    rep.solve_ms += ms_since(t_solve);
    if (!solved) {
      rep.message = "no certified invariant set (" + sdp::to_string(rep.status) + ")";
      continue;
    }

    rep.feasible = true;
    rep.status = sdp::SdpStatus::Optimal;
    rep.shrink_level = level;
    rep.cbf = decode(sol.z, x_k, ball.radius, cfg.alpha);
    rep.cbf.input_scale = scale;
    rep.program = prog.assemble();
    rep.active.assign(prog.scenarios.size(), false);
    const std::int64_t e = scenario::complexity_bound(n, n);
    if (cfg.count_support) {
      scenario::SupportOptions so;
      so.solver = sopt;
      const auto sc = scenario::count_support_constraints(prog, sol, so);
      rep.active = sc.active;
      rep.c_star = sc.c_star;
      rep.support_counted = true;
    } else {
      for (std::size_t i = 0; i < prog.scenarios.size(); ++i)
        for (const auto& row : prog.scenarios[i])
          if (row.coeffs.dot(sol.z) + row.offset <= 1e-6 * (1.0 + std::abs(row.offset))) rep.active[i] = true;
      rep.c_star = static_cast<int>(std::min<std::int64_t>(e, n_bar - 1));
    }
    if (n_bar > rep.c_star) {
      rep.risk = scenario::posterior_risk(rep.c_star, n_bar, cfg.beta);
    } else {
      rep.risk = {0.0, 1.0, cfg.beta, rep.c_star, n_bar};
    }
    rep.message = level == 0 ? "ok" : "certified after shrinking the input bounds";
    rep.total_ms = ms_since(t_start);
    return rep;
  }
  if (rep.message.empty()) rep.message = "no certified invariant set";
  rep.total_ms = ms_since(t_start);
  return rep;
}

namespace {

bool envelope_violated(const QuadraticCBF& cbf, double b, const sdfield::SdfSample& sdf) {
  if (sdf.is_sentinel()) return false;
  const double scale = 1e-12 * (1.0 + cbf.radius * cbf.radius);
  return b - sdf.sd_ov > scale;
}

}  // namespace

bool violates_scenario(const QuadraticCBF& cbf, const JointConfig& x, const sdfield::SdfSample& sdf,
                       const Eigen::VectorXd& bounds) {
  const CbfValue v = evaluate_cbf(cbf, x);
  if (envelope_violated(cbf, v.value, sdf)) return true;
  const Eigen::VectorXd xt = x - cbf.center;
  double lhs = cbf.alpha * v.value;
  for (Eigen::Index j = 0; j < xt.size(); ++j) {
    const double u = xt[j] < 0.0 ? bounds[j] : (xt[j] > 0.0 ? -bounds[j] : 0.0);
    lhs += v.gradient[j] * u;
  }
  return lhs < -1e-12 * (1.0 + cbf.radius * cbf.radius);
}

ViolationEstimate estimate_violation(const RobotModel& model, const sdfield::Scene& scene, const QuadraticCBF& cbf,
                                     int n_mc, std::uint64_t seed, double scene_time, int threads) {
  if (n_mc < 1) throw std::invalid_argument("estimate_violation: n_mc must be positive");
  const ReachableBall ball{cbf.center, cbf.radius};
  const auto xs = scenario::sample_ball(ball, n_mc, seed);
  const auto sdf = sdfield::overall_sdf_batch(model, xs, scene, scene_time, threads);
  const Eigen::VectorXd bounds = model.input_bounds() * cbf.input_scale;
  ViolationEstimate est;
  est.samples = n_mc;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (envelope_violated(cbf, evaluate_cbf(cbf, xs[i]).value, sdf[i])) ++est.envelope_violations;
    if (violates_scenario(cbf, xs[i], sdf[i], bounds)) ++est.violations;
  }
  est.rate = static_cast<double>(est.violations) / n_mc;
  return est;
}

}  // namespace scbf::cbfsyn
