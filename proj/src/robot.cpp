#include "scbf/robot.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scbf::robot {

RobotModel::RobotModel(std::vector<Joint> joints, std::vector<Link> links, Placement tool,
                       std::set<std::pair<int, int>> exclusions, Placement base)
    : joints_(std::move(joints)), links_(std::move(links)), tool_(tool), base_(base) {
  const int n = dof();
  if (n == 0) throw std::invalid_argument("robot has no joints");
  if (static_cast<int>(links_.size()) != n)
    throw std::invalid_argument("robot needs one link per joint (got " + std::to_string(links_.size()) +
                                " links for " + std::to_string(n) + " joints)");
  for (int i = 0; i < n; ++i) {
    Joint& j = joints_[static_cast<std::size_t>(i)];
    const std::string tag = "joint " + std::to_string(i) + ": ";
    const double len = j.axis.norm();
    if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument(tag + "axis must be nonzero");
    j.axis /= len;
    if (!(j.lower < j.upper)) throw std::invalid_argument(tag + "lower limit must be below upper limit");
    if (!(j.max_velocity > 0.0)) throw std::invalid_argument(tag + "max_velocity must be positive");
    j.origin.validate();
  }
  tool_.validate();
  base_.validate();

  for (auto [a, b] : exclusions) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("exclusion references unknown link");
    exclusions_.insert({std::min(a, b), std::max(a, b)});
  }
  for (int i = 0; i + 1 < n; ++i) exclusions_.insert({i, i + 1});

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!excluded(i, j)) self_pairs_.emplace_back(i, j);
}

void RobotModel::set_base(const Placement& base) {
  base.validate();
  base_ = base;
}

Eigen::VectorXd RobotModel::lower_limits() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<std::size_t>(i)].lower;
  return v;
}

Eigen::VectorXd RobotModel::upper_limits() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<std::size_t>(i)].upper;
  return v;
}

Eigen::VectorXd RobotModel::input_bounds() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<std::size_t>(i)].max_velocity;
  return v;
}

bool RobotModel::excluded(int i, int j) const {
  return exclusions_.count({std::min(i, j), std::max(i, j)}) > 0;
}

std::vector<Placement> forward_kinematics(const RobotModel& model, const JointConfig& q) {
  if (q.size() != model.dof())
    throw std::invalid_argument("forward_kinematics: expected " + std::to_string(model.dof()) +
                                " joint values, got " + std::to_string(q.size()));
  std::vector<Placement> frames;
  frames.reserve(static_cast<std::size_t>(model.dof()));
  Placement t = model.base();
  for (int i = 0; i < model.dof(); ++i) {
    const Joint& j = model.joints()[static_cast<std::size_t>(i)];
    Placement rot;
    rot.rotation = Eigen::AngleAxisd(q[i], j.axis).toRotationMatrix();
    t = t * j.origin * rot;
    frames.push_back(t);
  }
  return frames;
}

Placement end_effector(const RobotModel& model, const JointConfig& q) {
  return forward_kinematics(model, q).back() * model.tool();
}

ReachableBall reachable_ball(const Eigen::VectorXd& u_max, const JointConfig& x_k, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("reachable_ball: dt must be positive");
  if (u_max.size() != x_k.size()) throw std::invalid_argument("reachable_ball: dimension mismatch");
  if ((u_max.array() <= 0.0).any()) throw std::invalid_argument("reachable_ball: input bounds must be positive");
  return {x_k, dt * u_max.norm()};
}

ReachableBall reachable_ball(const RobotModel& model, const JointConfig& x_k, double dt) {
  return reachable_ball(model.input_bounds(), x_k, dt);
}

}  // namespace scbf::robot
