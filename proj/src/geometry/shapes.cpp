#include "scbf/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scbf::geometry {

Placement Placement::from_translation(const Vec3& t) {
  Placement p;
  p.translation = t;
  return p;
}

Placement Placement::from_rpy(const Vec3& translation, double roll, double pitch, double yaw) {
  Placement p;
  p.rotation = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                Eigen::AngleAxisd(roll, Vec3::UnitX()))
                   .toRotationMatrix();
  p.translation = translation;
  return p;
}

Placement Placement::inverse() const {
  Placement p;
  p.rotation = rotation.transpose();
  p.translation = -(p.rotation * translation);
  return p;
}

Placement Placement::operator*(const Placement& rhs) const {
  Placement p;
  p.rotation = rotation * rhs.rotation;
  p.translation = rotation * rhs.translation + translation;
  return p;
}

void Placement::validate() const {
  if (!rotation.allFinite() || !translation.allFinite())
    throw std::invalid_argument("Placement: non-finite entry");
  const double orth = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth > tol::kRotation) throw std::invalid_argument("Placement: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol::kRotation)
    throw std::invalid_argument("Placement: rotation has determinant != +1");
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

ConvexShape ConvexShape::sphere(double radius) {
  require_positive(radius, "sphere radius");
  ConvexShape s;
  s.kind_ = ShapeKind::Sphere;
  s.radius_ = radius;
  return s;
}

ConvexShape ConvexShape::box(const Vec3& half_extents) {
  for (int i = 0; i < 3; ++i) require_positive(half_extents[i], "box half-extent");
  ConvexShape s;
  s.kind_ = ShapeKind::Box;
  s.half_extents_ = half_extents;
  return s;
}

ConvexShape ConvexShape::capsule(double radius, double half_length) {
  require_positive(radius, "capsule radius");
  require_positive(half_length, "capsule half-length");
  ConvexShape s;
  s.kind_ = ShapeKind::Capsule;
  s.radius_ = radius;
  s.half_length_ = half_length;
  return s;
}

ConvexShape ConvexShape::hull(std::vector<Vec3> points) {
  if (points.size() < 4) throw std::invalid_argument("hull needs at least 4 points");
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) {
    if (!p.allFinite()) throw std::invalid_argument("hull point is not finite");
    centroid += p;
  }
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix<double, Eigen::Dynamic, 3> centered(points.size(), 3);
  double scale = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    centered.row(static_cast<Eigen::Index>(i)) = (points[i] - centroid).transpose();
    scale = std::max(scale, (points[i] - centroid).norm());
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  if (scale == 0.0 || svd.singularValues()[2] <= 1e-9 * scale)
    throw std::invalid_argument("hull points are not affinely independent in 3D");
  ConvexShape s;
  s.kind_ = ShapeKind::Hull;
  s.points_ = std::move(points);
  return s;
}

Vec3 ConvexShape::core_support(const Vec3& d) const {
  switch (kind_) {
    case ShapeKind::Sphere:
      return Vec3::Zero();
    case ShapeKind::Capsule:
      return Vec3(0.0, 0.0, d.z() >= 0.0 ? half_length_ : -half_length_);
    case ShapeKind::Box:
      return Vec3(d.x() >= 0.0 ? half_extents_.x() : -half_extents_.x(),
                  d.y() >= 0.0 ? half_extents_.y() : -half_extents_.y(),
                  d.z() >= 0.0 ? half_extents_.z() : -half_extents_.z());
    case ShapeKind::Hull: {
      std::size_t best = 0;
      double best_dot = points_[0].dot(d);
      for (std::size_t i = 1; i < points_.size(); ++i) {
        const double v = points_[i].dot(d);
        if (v > best_dot) {
          best_dot = v;
          best = i;
        }
      }
      return points_[best];
    }
  }
  return Vec3::Zero();
}

std::vector<Vec3> ConvexShape::core_vertices() const {
  switch (kind_) {
    case ShapeKind::Sphere:
      return {Vec3::Zero()};
    case ShapeKind::Capsule:
      return {Vec3(0, 0, -half_length_), Vec3(0, 0, half_length_)};
    case ShapeKind::Box: {
      std::vector<Vec3> v;
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1})
            v.emplace_back(sx * half_extents_.x(), sy * half_extents_.y(), sz * half_extents_.z());
      return v;
    }
    case ShapeKind::Hull:
      return points_;
  }
  return {};
}

double ConvexShape::bounding_radius() const {
  double r = 0.0;
  for (const auto& v : core_vertices()) r = std::max(r, v.norm());
  return r + radius_;
}

Vec3 support(const ConvexShape& shape, const Placement& placement, const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("support: zero or non-finite direction");
  const Vec3 d = direction / n;
  const Vec3 local = placement.rotation.transpose() * d;
  return placement.apply(shape.core_support(local)) + shape.radius() * d;
}

}  // namespace scbf::geometry
