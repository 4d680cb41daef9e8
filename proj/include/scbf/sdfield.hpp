#pragma once

#include "scbf/geometry.hpp"
#include "scbf/robot.hpp"

#include <string>
#include <vector>

namespace scbf::sdfield {

using geometry::ConvexShape;
using geometry::Placement;
using geometry::Vec3;
using robot::JointConfig;
using robot::RobotModel;

/// Stand-in for +infinity when a minimum ranges over no pairs.
inline constexpr double kSentinel = 1e9;

struct Keyframe {
  double t = 0.0;
  Placement pose;
};

/// A convex obstacle with a fixed pose or a keyframed schedule. Between
/// keyframes translation is linear and rotation is slerped; outside the
/// schedule the nearest keyframe holds.
struct Obstacle {
  std::string name;
  ConvexShape shape;
  std::vector<Keyframe> schedule;

  Placement placement_at(double t) const;
};

struct Scene {
  std::vector<Obstacle> obstacles;

  void add(std::string name, ConvexShape shape, const Placement& pose);
  void add_moving(std::string name, ConvexShape shape, std::vector<Keyframe> schedule);
  /// Throws std::invalid_argument on an empty or unsorted schedule.
  void validate() const;
};

/// Identifies the pair that realised a minimum. For the outer distance,
/// `other` is an obstacle index; for the inner distance, a link index.
struct PairWitness {
  int link = -1;
  int shape = -1;
  int other = -1;
  int other_shape = -1;
  Vec3 witness_a = Vec3::Zero();
  Vec3 witness_b = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
};

struct SdfValue {
  double distance = kSentinel;
  PairWitness pair;
  bool converged = true;
};

struct SdfSample {
  JointConfig state;
  double sd_out = kSentinel;
  double sd_in = kSentinel;
  double sd_ov = kSentinel;
  PairWitness outer_pair;
  PairWitness inner_pair;
  bool converged = true;

  bool safe() const { return sd_ov >= 0.0; }
  bool is_sentinel() const { return sd_ov >= kSentinel; }
  /// The pair that determines sd_ov.
  const PairWitness& active_pair() const { return sd_out <= sd_in ? outer_pair : inner_pair; }
};

SdfValue outer_sdf(const RobotModel& model, const JointConfig& q, const Scene& scene, double t);
SdfValue inner_sdf(const RobotModel& model, const JointConfig& q);
SdfSample overall_sdf(const RobotModel& model, const JointConfig& q, const Scene& scene, double t);

/// Evaluates overall_sdf at every config. With threads > 1 the work is split
/// into contiguous chunks; the output does not depend on the thread count.
std::vector<SdfSample> overall_sdf_batch(const RobotModel& model, const std::vector<JointConfig>& qs,
                                         const Scene& scene, double t, int threads = 1);

}  // namespace scbf::sdfield
