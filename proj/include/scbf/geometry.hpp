#pragma once

#include <Eigen/Dense>

#include <vector>

namespace scbf::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace tol {
inline constexpr double kGjkGap = 1e-9;        // meters
inline constexpr int kGjkMaxIter = 128;
inline constexpr double kEpaGap = 1e-9;        // meters
inline constexpr int kEpaMaxIter = 255;
inline constexpr double kTouching = 1e-9;      // |sd| below this reports 0
inline constexpr double kRotation = 1e-9;      // orthonormality of placements
}  // namespace tol

/// Rigid transform p_world = rotation * p_local + translation.
struct Placement {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Placement identity() { return {}; }
  static Placement from_translation(const Vec3& t);
  /// Fixed-axis roll/pitch/yaw: R = Rz(yaw) Ry(pitch) Rx(roll).
  static Placement from_rpy(const Vec3& translation, double roll, double pitch, double yaw);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Placement inverse() const;
  Placement operator*(const Placement& rhs) const;

  /// Throws std::invalid_argument unless R is a proper rotation within tol::kRotation.
  void validate() const;
};

enum class ShapeKind { Sphere, Box, Capsule, Hull };

/// A convex body in its local frame. Every kind is stored as a polytope core
/// (point, segment, box or hull) swept by a ball of `radius()`.
/// Capsules lie along the local z axis.
class ConvexShape {
 public:
  static ConvexShape sphere(double radius);
  static ConvexShape box(const Vec3& half_extents);
  static ConvexShape capsule(double radius, double half_length);
  /// Needs at least 4 affinely independent points.
  static ConvexShape hull(std::vector<Vec3> points);

  ShapeKind kind() const { return kind_; }
  double radius() const { return radius_; }
  double half_length() const { return half_length_; }
  const Vec3& half_extents() const { return half_extents_; }
  const std::vector<Vec3>& points() const { return points_; }

  /// Support of the core (without the rounding radius), local frame.
  Vec3 core_support(const Vec3& direction) const;
  /// Vertices of the core, local frame.
  std::vector<Vec3> core_vertices() const;
  /// Radius of a ball about the local origin containing the whole shape.
  double bounding_radius() const;

 private:
  ShapeKind kind_ = ShapeKind::Sphere;
  double radius_ = 0.0;
  double half_length_ = 0.0;
  Vec3 half_extents_ = Vec3::Zero();
  std::vector<Vec3> points_;
};

/// Point of the placed shape maximizing dot(p, direction).
/// Throws std::invalid_argument for a zero or non-finite direction.
Vec3 support(const ConvexShape& shape, const Placement& placement, const Vec3& direction);

/// Sign convention: witness_a - witness_b = signed_distance * normal, and
/// the normal points from B towards A.
struct DistanceResult {
  double signed_distance = 0.0;
  Vec3 witness_a = Vec3::Zero();
  Vec3 witness_b = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  bool converged = true;
  int iterations = 0;
};

DistanceResult signed_distance(const ConvexShape& a, const Placement& pa, const ConvexShape& b,
                               const Placement& pb);

}  // namespace scbf::geometry
