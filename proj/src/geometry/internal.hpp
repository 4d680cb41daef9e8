#pragma once

#include "scbf/geometry.hpp"

#include <vector>

namespace scbf::geometry::detail {

/// A point of the core Minkowski difference A - B with the two support points
/// that produced it.
struct MinkowskiVertex {
  Vec3 p;
  Vec3 a;
  Vec3 b;
};

/// Support mapping of core(A) - core(B) in world coordinates.
class CoreDifference {
 public:
  CoreDifference(const ConvexShape& a, const Placement& pa, const ConvexShape& b, const Placement& pb)
      : a_(a), pa_(pa), b_(b), pb_(pb) {}

  MinkowskiVertex operator()(const Vec3& d) const {
    const Vec3 sa = pa_.apply(a_.core_support(pa_.rotation.transpose() * d));
    const Vec3 sb = pb_.apply(b_.core_support(-(pb_.rotation.transpose() * d)));
    return {sa - sb, sa, sb};
  }

  /// Every pairwise vertex difference; the exact vertex superset of A - B.
  std::vector<MinkowskiVertex> all_vertices() const {
    std::vector<MinkowskiVertex> out;
    const auto va = a_.core_vertices();
    const auto vb = b_.core_vertices();
    out.reserve(va.size() * vb.size());
    for (const auto& x : va)
      for (const auto& y : vb) {
        const Vec3 wa = pa_.apply(x);
        const Vec3 wb = pb_.apply(y);
        out.push_back({wa - wb, wa, wb});
      }
    return out;
  }

  Vec3 center_offset() const { return pa_.translation - pb_.translation; }

 private:
  const ConvexShape& a_;
  const Placement& pa_;
  const ConvexShape& b_;
  const Placement& pb_;
};

struct GjkResult {
  double distance = 0.0;  // between cores; 0 when intersecting
  Vec3 a = Vec3::Zero();  // closest core points
  Vec3 b = Vec3::Zero();
  bool intersecting = false;
  bool converged = true;
  int iterations = 0;
  std::vector<MinkowskiVertex> simplex;
};

GjkResult gjk(const CoreDifference& diff);

struct EpaResult {
  double depth = 0.0;
  Vec3 direction = Vec3::UnitX();  // outward face normal of A - B at the exit point
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  bool converged = true;
  int iterations = 0;
};

/// Penetration depth of the cores; `seed` is the final GJK simplex.
EpaResult epa(const CoreDifference& diff, const std::vector<MinkowskiVertex>& seed);

/// Closest point to the origin on the convex hull of up to four points.
/// Returns barycentric weights aligned with `pts` (zero for dropped points).
Eigen::Vector4d closest_on_simplex(const std::vector<Vec3>& pts, Vec3& closest);

}  // namespace scbf::geometry::detail
