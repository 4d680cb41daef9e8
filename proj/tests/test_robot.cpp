#include "scbf/robot.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace scbf::robot;
using testsupport::kPi;
using testsupport::Rng;

namespace {

RobotModel random_chain(Rng& rng, int n) {
  std::vector<Joint> joints;
  std::vector<Link> links;
  for (int i = 0; i < n; ++i) {
    Joint j;
    j.name = "j" + std::to_string(i);
    j.axis = rng.unit3();
    j.origin = rng.placement(0.3);
    j.max_velocity = rng.uniform(0.5, 2.0);
    joints.push_back(j);
    links.push_back({"l" + std::to_string(i), {{ConvexShape::sphere(0.05), Placement::identity()}}});
  }
  return RobotModel(joints, links, rng.placement(0.1), {}, rng.placement(0.5));
}

}  // namespace

TEST_CASE("forward_kinematics: planar two-link arm") {
  const RobotModel arm = testsupport::planar_arm({1.0, 1.0});
  const Eigen::Vector2d q0(0, 0), q1(kPi / 2, 0);
  CHECK((end_effector(arm, q0).translation - Vec3(2, 0, 0)).norm() < 1e-12);
  CHECK((end_effector(arm, q1).translation - Vec3(0, 2, 0)).norm() < 1e-12);
  const auto frames = forward_kinematics(arm, q1);
  REQUIRE(frames.size() == 2);
  CHECK((frames[1].translation - Vec3(0, 1, 0)).norm() < 1e-12);
  CHECK_THROWS(forward_kinematics(arm, Eigen::VectorXd::Zero(3)));
}

TEST_CASE("forward_kinematics: random 7-joint chains match product of exponentials") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const RobotModel m = random_chain(rng, 7);
    const Eigen::VectorXd q = rng.vec(7, -kPi, kPi);
    const auto ours = forward_kinematics(m, q);
    const auto ref = testsupport::poe_fk(m, q);
    for (int i = 0; i < 7; ++i) {
      CHECK((ours[i].rotation - ref[i].rotation).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((ours[i].translation - ref[i].translation).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("forward_kinematics: base equivariance") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    RobotModel m = random_chain(rng, 5);
    const Eigen::VectorXd q = rng.vec(5, -kPi, kPi);
    const auto before = forward_kinematics(m, q);
    const Placement g = rng.placement(1.0);
    m.set_base(g * m.base());
    const auto after = forward_kinematics(m, q);
    for (int i = 0; i < 5; ++i) {
      const Placement expect = g * before[i];
      CHECK((after[i].rotation - expect.rotation).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((after[i].translation - expect.translation).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("reachable_ball: radii") {
  CHECK(reachable_ball(Eigen::VectorXd::Ones(7), Eigen::VectorXd::Zero(7), 0.01).radius ==
        doctest::Approx(0.01 * std::sqrt(7.0)).epsilon(1e-15));
  CHECK(reachable_ball(Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Zero(1), 0.5).radius ==
        doctest::Approx(1.0));
  // Enumerate the box vertices for the largest step.
  const Eigen::Vector2d u_max(1, 3);
  double best = 0.0;
  for (int s = 0; s < 4; ++s) {
    const Eigen::Vector2d v((s & 1 ? 1 : -1) * u_max[0], (s & 2 ? 1 : -1) * u_max[1]);
    best = std::max(best, 0.1 * v.norm());
  }
  const auto ball = reachable_ball(u_max, Eigen::Vector2d(0.3, -0.2), 0.1);
  CHECK(ball.radius == doctest::Approx(best).epsilon(1e-15));
  CHECK(ball.center == Eigen::Vector2d(0.3, -0.2));
  CHECK_THROWS(reachable_ball(u_max, Eigen::Vector2d::Zero(), 0.0));
  CHECK_THROWS(reachable_ball(Eigen::Vector2d(1, 0), Eigen::Vector2d::Zero(), 0.1));
}

TEST_CASE("reachable_ball: contains every admissible step") {
  Rng rng(3);
  const RobotModel m = random_chain(rng, 6);
  const Eigen::VectorXd x = rng.vec(6, -1, 1);
  const auto ball = reachable_ball(m, x, 0.02);
  const Eigen::VectorXd u_max = m.input_bounds();
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd u(6);
    for (int j = 0; j < 6; ++j) u[j] = rng.uniform(-u_max[j], u_max[j]);
    CHECK((u * 0.02).norm() <= ball.radius + 1e-15);
  }
}

TEST_CASE("RobotModel: validation and exclusions") {
  RobotModel arm = testsupport::planar_arm({0.5, 0.4, 0.3});
  CHECK(arm.excluded(0, 1));
  CHECK(arm.excluded(1, 2));
  CHECK_FALSE(arm.excluded(0, 2));
  REQUIRE(arm.self_pairs().size() == 1);
  CHECK(arm.self_pairs()[0] == std::pair<int, int>(0, 2));

  std::vector<Joint> joints(1);
  std::vector<Link> links(1);
  joints[0].lower = 1.0;
  joints[0].upper = -1.0;
  CHECK_THROWS_AS(RobotModel(joints, links), std::invalid_argument);
  joints[0].lower = -1.0;
  joints[0].upper = 1.0;
  joints[0].max_velocity = 0.0;
  CHECK_THROWS_AS(RobotModel(joints, links), std::invalid_argument);
  joints[0].max_velocity = 1.0;
  CHECK_THROWS_AS(RobotModel(joints, {}), std::invalid_argument);
  CHECK_NOTHROW(RobotModel(joints, links));
}
