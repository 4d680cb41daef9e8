#include "scbf/cbfsyn.hpp"
#include "scbf/io.hpp"
#include "scbf/numerics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace scbf::cbfsyn;
using scbf::numerics::SymMatrix;
using scbf::sdfield::Scene;
using testsupport::Rng;
namespace scenario = scbf::scenario;
namespace sdp = scbf::sdp;

namespace {

const std::string kData = SCBF_DATA_DIR;

QuadraticCBF random_cbf(Rng& rng, int n) {
  QuadraticCBF c;
  c.center = rng.vec(n, -1, 1);
  const Eigen::MatrixXd q = rng.orthogonal(n);
  const Eigen::VectorXd lam = rng.vec(n, -1.0, -0.01);
  c.h_matrix = SymMatrix::from_dense(q * lam.asDiagonal() * q.transpose());
  c.d_b = rng.uniform(1e-4, 1.0);
  c.radius = 1.0;
  return c;
}

/// Per-sample invariance margin 2 x~^T H u + alpha b with u_j = -bound_j sign(x~_j).
double invariance_margin(const QuadraticCBF& c, const Eigen::VectorXd& x, const Eigen::VectorXd& bounds) {
  const CbfValue v = evaluate_cbf(c, x);
  const Eigen::VectorXd xt = x - c.center;
  double m = c.alpha * v.value;
  for (Eigen::Index j = 0; j < xt.size(); ++j) m += v.gradient[j] * (xt[j] < 0 ? bounds[j] : (xt[j] > 0 ? -bounds[j] : 0.0));
  return m;
}

struct Fixture {
  scbf::robot::RobotModel robot = scbf::io::load_robot(kData + "/robot_2dof.json");
  Scene slot = scbf::io::load_scene(kData + "/scene_2dof_slot.json");
};

}  // namespace

TEST_CASE("evaluate_cbf: apex and unit boundary") {
  QuadraticCBF c;
  c.center = Eigen::Vector3d(0.1, 0.2, 0.3);
  c.h_matrix = -1.0 * SymMatrix::identity(3);
  c.d_b = 1.0;
  const auto apex = evaluate_cbf(c, c.center);
  CHECK(apex.value == 1.0);
  CHECK(apex.gradient.norm() == 0.0);
  const auto edge = evaluate_cbf(c, c.center + Eigen::Vector3d(1, 0, 0));
  CHECK(edge.value == doctest::Approx(0.0));
  CHECK((edge.gradient - Eigen::Vector3d(-2, 0, 0)).norm() < 1e-15);
  CHECK_THROWS(evaluate_cbf(c, Eigen::Vector2d::Zero()));
}

TEST_CASE("evaluate_cbf: gradient matches central differences") {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const int n = rng.integer(1, 7);
    const QuadraticCBF c = random_cbf(rng, n);
    const Eigen::VectorXd x = c.center + rng.vec(n, -1, 1);
    const auto v = evaluate_cbf(c, x);
    const double h = 1e-5;
    Eigen::VectorXd fd(n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i) * h;
      fd[i] = (evaluate_cbf(c, x + e).value - evaluate_cbf(c, x - e).value) / (2 * h);
    }
    CHECK((fd - v.gradient).norm() <= 1e-6 * std::max(1.0, v.gradient.norm()));
  }
}

TEST_CASE("QuadraticCBF::validate") {
  QuadraticCBF c;
  c.center = Eigen::Vector2d::Zero();
  c.h_matrix = -0.5 * SymMatrix::identity(2);
  c.d_b = 0.1;
  CHECK_NOTHROW(c.validate());
  c.h_matrix(0, 0) = 0.1;
  CHECK_THROWS(c.validate());
  c.h_matrix(0, 0) = -2.0;
  CHECK_THROWS(c.validate());
  c.h_matrix(0, 0) = -0.5;
  c.d_b = 0.0;
  CHECK_THROWS(c.validate());
  c.d_b = 0.1;
  c.center = Eigen::Vector3d::Zero();
  CHECK_THROWS(c.validate());
}

TEST_CASE("assemble_program: one-dimensional hand example") {
  const auto robot = testsupport::planar_arm({0.5});
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  const auto ball = scbf::robot::reachable_ball(robot, x, 1.0);  // r = 1
  scenario::ScenarioBatch batch;
  batch.ball = ball;
  batch.samples = {Eigen::VectorXd::Constant(1, 0.5)};
  scbf::sdfield::SdfSample s;
  s.sd_ov = 0.3;
  batch.sdf = {s};
  const sdp::LmiProgram p = assemble_program(robot, x, ball, batch, Eigen::VectorXd::Constant(1, -1.0), 1.0);
  const Layout L{1};
  REQUIRE(p.num_vars == 3);
  REQUIRE(p.affine.size() == 3);  // d' >= mu, envelope, invariance
  const auto& env = p.affine[1];
  CHECK(env.coeffs[L.h(0, 0)] == doctest::Approx(-0.25));
  CHECK(env.coeffs[L.d()] == -1.0);
  CHECK(env.offset == doctest::Approx(0.3));
  const auto& inv = p.affine[2];
  CHECK(inv.coeffs[L.h(0, 0)] == doctest::Approx(2 * 0.5 * -1.0 + 0.25));
  CHECK(inv.coeffs[L.d()] == 1.0);
  // maximize d' + 1e-3 sigma: -1 <= h, d' <= sigma <= -h, d' <= 0.3 - 0.25 h
  // gives h = -1, d' = 0.55, sigma = 1.
  const auto sol = sdp::solve(p);
  REQUIRE(sol.status == sdp::SdpStatus::Optimal);
  CHECK(sol.z[L.h(0, 0)] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(sol.z[L.d()] == doctest::Approx(0.55).epsilon(1e-6));
  CHECK(sol.z[L.sigma()] == doctest::Approx(1.0).epsilon(1e-6));

  batch.samples.clear();
  batch.sdf.clear();
  CHECK_THROWS_AS(assemble_program(robot, x, ball, batch, Eigen::VectorXd::Zero(1), 1.0), std::invalid_argument);
}

TEST_CASE("assemble_scenario_program: sentinel samples carry no envelope row") {
  const Eigen::Vector2d x(0, 0);
  const auto ball = scbf::robot::reachable_ball(Eigen::Vector2d(1, 1), x, 0.1);
  scenario::ScenarioBatch batch;
  batch.ball = ball;
  batch.samples = scenario::sample_ball(ball, 3, 1);
  batch.sdf.resize(3);
  batch.sdf[1].sd_ov = 0.2;
  const auto prog = assemble_scenario_program(ball, batch, std::vector<Eigen::VectorXd>(3, Eigen::Vector2d::Zero()),
                                              SynthesisConfig{});
  CHECK(prog.scenarios[0].size() == 1);
  CHECK(prog.scenarios[1].size() == 2);
  CHECK(prog.scenarios[2].size() == 1);
}

TEST_CASE("synthesize: far from obstacles the cap binds") {
  const Fixture f;
  Scene far;
  far.add("far", scbf::geometry::ConvexShape::sphere(0.2),
          scbf::geometry::Placement::from_translation(scbf::geometry::Vec3(3, 0, 0)));
  const Eigen::Vector2d x(0.3, -0.4);
  const auto rep = synthesize(f.robot, far, x, 0.01, 100, 7, Eigen::Vector2d::Zero(), SynthesisConfig{});
  REQUIRE(rep.feasible);
  const double r2 = rep.cbf.radius * rep.cbf.radius;
  CHECK(rep.cbf.d_b >= (1 - 1e-6) * rep.cbf.sigma1 * r2);
  CHECK(rep.cbf.d_b <= (1 + 1e-6) * rep.cbf.sigma1 * r2);
  CHECK(rep.cbf.d_b == doctest::Approx(r2).epsilon(1e-5));
  CHECK(rep.shrink_level == 0);
  for (bool a : rep.active) CHECK_FALSE(a);
}

TEST_CASE("synthesize: in collision no set is certified") {
  const Fixture f;
  Scene blocker;
  blocker.add("block", scbf::geometry::ConvexShape::box(scbf::geometry::Vec3(0.3, 0.3, 0.3)),
              scbf::geometry::Placement::from_translation(scbf::geometry::Vec3(0.7, 0, 0)));
  const Eigen::Vector2d x(0, 0);
  REQUIRE(scbf::sdfield::overall_sdf(f.robot, x, blocker, 0).sd_ov < 0);
  const auto rep = synthesize(f.robot, blocker, x, 0.01, 100, 7, Eigen::Vector2d::Zero(), SynthesisConfig{});
  if (rep.feasible) {
    CHECK(rep.cbf.d_b <= 1.01e-6);
  } else {
    CHECK(rep.message.find("no certified invariant set") != std::string::npos);
  }
}

TEST_CASE("synthesize: deterministic for a fixed seed") {
  const Fixture f;
  const Eigen::Vector2d x(-0.8, 0.6);
  SynthesisConfig cfg;
  cfg.count_support = true;
  const auto a = synthesize(f.robot, f.slot, x, 0.01, 150, 11, Eigen::Vector2d::Zero(), cfg);
  const auto b = synthesize(f.robot, f.slot, x, 0.01, 150, 11, Eigen::Vector2d::Zero(), cfg);
  REQUIRE(a.feasible);
  CHECK(a.cbf.h_matrix == b.cbf.h_matrix);
  CHECK(a.cbf.d_b == b.cbf.d_b);
  CHECK(a.cbf.sigma1 == b.cbf.sigma1);
  CHECK(a.active == b.active);
  CHECK(a.c_star == b.c_star);
  CHECK(a.risk.eps_hi == b.risk.eps_hi);
  CHECK(a.sdp_iterations == b.sdp_iterations);
  cfg.threads = 3;
  const auto c = synthesize(f.robot, f.slot, x, 0.01, 150, 11, Eigen::Vector2d::Zero(), cfg);
  CHECK(c.cbf.d_b == a.cbf.d_b);
}

TEST_CASE("synthesize: certified sets satisfy containment, invariance and the risk link") {
  const Fixture f;
  Rng rng(3);
  int feasible = 0, binding = 0, shrunk = 0;
  for (int t = 0; t < 160; ++t) {
    const Eigen::Vector2d x(rng.uniform(-2, 2), rng.uniform(-2, 2));
    // A sphere within a few millimetres of the forearm tip; some sampled
    // states then lie inside it.
    Scene scene;
    testsupport::add_near_contact_sphere(scene.obstacles, f.robot, x, 0.03, rng.uniform(0.0, t % 4 < 2 ? 0.012 : 0.1),
                                         0.05, rng);
    if (scbf::sdfield::overall_sdf(f.robot, x, scene, 0).sd_ov < 0) continue;
    SynthesisConfig cfg;
    cfg.count_support = t % 2 == 0;
    const int n_bar = 80;
    // Long steps put r^2 on the scale of the distances so the envelope binds.
    const double dt = t % 4 < 2 ? 0.01 : 0.15;
    const auto rep = synthesize(f.robot, scene, x, dt, n_bar, 100 + t, Eigen::Vector2d::Zero(), cfg);
    if (!rep.feasible) continue;
    ++feasible;
    if (rep.shrink_level > 0) ++shrunk;
    const QuadraticCBF& c = rep.cbf;
    const double r2 = c.radius * c.radius;
    CHECK_NOTHROW(c.validate(cfg.margin));
    const double lmin = scbf::numerics::min_eigenvalue(-1.0 * c.h_matrix.to_dense());
    CHECK(c.d_b <= lmin * r2 * (1 + 1e-7) + 1e-12);
    // Containment: b >= 0 only inside the ball.
    for (int k = 0; k < 200; ++k) {
      const Eigen::VectorXd y = c.center + rng.vec(2, -2, 2) * c.radius;
      if (evaluate_cbf(c, y).value >= 0) CHECK((y - c.center).norm() <= c.radius + 1e-6);
    }
    // Invariance and envelope at the synthesis samples, in scaled units.
    const auto samples = scenario::sample_ball({x, c.radius}, n_bar, 100 + t);
    const Eigen::VectorXd bounds = f.robot.input_bounds() * c.input_scale;
    const auto sdf = scbf::sdfield::overall_sdf_batch(f.robot, samples, scene, 0);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      CHECK(invariance_margin(c, samples[k], bounds) / r2 >= -1e-7);
      CHECK(evaluate_cbf(c, samples[k]).value <= sdf[k].sd_ov + 1e-7 * r2);
      CHECK_FALSE(violates_scenario(c, samples[k], sdf[k], bounds));
    }
    // Risk bound computed from (c*, N, beta).
    const auto expect = scenario::posterior_risk(rep.c_star, n_bar, cfg.beta);
    CHECK(rep.risk.eps_hi == expect.eps_hi);
    CHECK(rep.support_counted == cfg.count_support);
    if (!cfg.count_support) CHECK(rep.c_star == scenario::complexity_bound(2, 2));
    if (std::count(rep.active.begin(), rep.active.end(), true) > 0) ++binding;
  }
  CHECK(feasible >= 40);
  CHECK(binding >= 5);
  MESSAGE("feasible " << feasible << ", binding " << binding << ", shrunk " << shrunk);
}

TEST_CASE("synthesize: support count stays below the complexity bound") {
  const Fixture f;
  SynthesisConfig cfg;
  cfg.count_support = true;
  const Eigen::Vector2d x(-0.8, 0.6);
  const auto rep = synthesize(f.robot, f.slot, x, 0.01, 120, 5, Eigen::Vector2d::Zero(), cfg);
  REQUIRE(rep.feasible);
  CHECK(rep.c_star <= scenario::complexity_bound(2, 2));
  CHECK(rep.c_star <= std::count(rep.active.begin(), rep.active.end(), true));
}

TEST_CASE("synthesize: shared candidate input and alternation rounds") {
  const Fixture f;
  const Eigen::Vector2d x(-0.8, 0.6);
  SynthesisConfig cfg;
  cfg.mode = InvarianceMode::SharedInput;
  const auto still = synthesize(f.robot, f.slot, x, 0.01, 100, 5, Eigen::Vector2d::Zero(), cfg);
  REQUIRE(still.feasible);
  CHECK_NOTHROW(still.cbf.validate(cfg.margin));
  // A nonzero shared input leaves the ball along its own direction faster than
  // alpha b can compensate, so no set is certified.
  const auto moving = synthesize(f.robot, f.slot, x, 0.01, 100, 5, Eigen::Vector2d(0.2, -0.1), cfg);
  CHECK_FALSE(moving.feasible);

  cfg.mode = InvarianceMode::PerSampleInput;
  cfg.rounds = 3;
  const auto rounds = synthesize(f.robot, f.slot, x, 0.01, 100, 5, Eigen::Vector2d::Zero(), cfg);
  REQUIRE(rounds.feasible);
  CHECK_NOTHROW(rounds.cbf.validate(cfg.margin));
}

TEST_CASE("select_inputs and decode") {
  scenario::ScenarioBatch batch;
  batch.ball = {Eigen::Vector2d::Zero(), 1.0};
  batch.samples = {Eigen::Vector2d(0.5, -0.2)};
  const auto u = select_inputs(-1.0 * SymMatrix::identity(2), batch, Eigen::Vector2d(1, 2));
  CHECK(u[0] == Eigen::Vector2d(-1, 2));
  const Layout L{2};
  Eigen::VectorXd z = Eigen::VectorXd::Zero(L.num_vars());
  z[L.h(0, 0)] = -1;
  z[L.h(0, 1)] = 0.2;
  z[L.h(1, 1)] = -0.5;
  z[L.d()] = 0.4;
  z[L.sigma()] = 0.5;
  const QuadraticCBF c = decode(z, Eigen::Vector2d(1, 1), 0.1, 2.0);
  CHECK(c.h_matrix(1, 0) == 0.2);
  CHECK(c.d_b == doctest::Approx(0.004));
  CHECK(c.alpha == 2.0);
  CHECK(L.h(1, 0) == L.h(0, 1));
}

TEST_CASE("violates_scenario and estimate_violation") {
  const Fixture f;
  QuadraticCBF c;
  c.center = Eigen::Vector2d(-0.8, 0.6);
  c.h_matrix = -1.0 * SymMatrix::identity(2);
  c.radius = 0.01;
  c.d_b = 1e-4;
  scbf::sdfield::SdfSample s;
  s.sd_ov = 0.5e-4;
  CHECK(violates_scenario(c, c.center, s, Eigen::Vector2d(1, 1)));
  s.sd_ov = 1.0;
  CHECK_FALSE(violates_scenario(c, c.center, s, Eigen::Vector2d(1, 1)));
  // Far from obstacles with H = -I every sample satisfies both rows.
  const auto est = estimate_violation(f.robot, f.slot, c, 2000, 3);
  CHECK(est.samples == 2000);
  CHECK(est.violations == 0);
  CHECK(est.rate == 0.0);
  // An offset larger than every distance violates the envelope everywhere.
  c.d_b = 10.0;
  const auto bad = estimate_violation(f.robot, f.slot, c, 500, 3);
  CHECK(bad.envelope_violations == 500);
  CHECK(bad.rate == 1.0);
}
