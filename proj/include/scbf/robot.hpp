#pragma once

#include "scbf/geometry.hpp"

#include <Eigen/Dense>

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace scbf::robot {

using geometry::ConvexShape;
using geometry::Placement;
using geometry::Vec3;
using JointConfig = Eigen::VectorXd;

/// Revolute joint. `origin` is the fixed transform from the previous link
/// frame to this joint's frame at q = 0.
struct Joint {
  std::string name;
  Vec3 axis = Vec3::UnitZ();
  Placement origin;
  double lower = -3.141592653589793;
  double upper = 3.141592653589793;
  double max_velocity = 1.0;  // rad/s
};

struct LinkShape {
  ConvexShape shape;
  Placement origin;  // relative to the link frame
};

/// Link i moves with joint i.
struct Link {
  std::string name;
  std::vector<LinkShape> shapes;
};

class RobotModel {
 public:
  /// `exclusions` lists link pairs skipped by self-collision checks. Consecutive
  /// pairs are always added. Throws std::invalid_argument on inconsistent data.
  RobotModel(std::vector<Joint> joints, std::vector<Link> links, Placement tool = {},
             std::set<std::pair<int, int>> exclusions = {}, Placement base = {});

  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<Link>& links() const { return links_; }
  const Placement& tool() const { return tool_; }
  const Placement& base() const { return base_; }
  void set_base(const Placement& base);

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  /// Per-joint u_max.
  Eigen::VectorXd input_bounds() const;

  bool excluded(int i, int j) const;
  const std::set<std::pair<int, int>>& exclusions() const { return exclusions_; }
  /// Link pairs (i < j) checked by the inner distance.
  const std::vector<std::pair<int, int>>& self_pairs() const { return self_pairs_; }

 private:
  std::vector<Joint> joints_;
  std::vector<Link> links_;
  Placement tool_;
  Placement base_;
  std::set<std::pair<int, int>> exclusions_;
  std::vector<std::pair<int, int>> self_pairs_;
};

/// World placement of every link frame. Throws on a length mismatch.
std::vector<Placement> forward_kinematics(const RobotModel& model, const JointConfig& q);
/// Last link frame composed with the tool offset.
Placement end_effector(const RobotModel& model, const JointConfig& q);

struct ReachableBall {
  JointConfig center;
  double radius = 0.0;
};

/// Ball over-approximating the one-step reachable set of x' = u with
/// |u_i| <= u_max,i: radius = dt * ||u_max||.
ReachableBall reachable_ball(const RobotModel& model, const JointConfig& x_k, double dt);
ReachableBall reachable_ball(const Eigen::VectorXd& u_max, const JointConfig& x_k, double dt);

}  // namespace scbf::robot
