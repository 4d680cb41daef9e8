#include "internal.hpp"

#include <algorithm>
#include <cmath>

namespace scbf::geometry {

namespace {

bool is_round(const ConvexShape& s) { return s.kind() == ShapeKind::Sphere || s.kind() == ShapeKind::Capsule; }

// World-frame core segment of a sphere (degenerate) or capsule.
void core_segment(const ConvexShape& s, const Placement& p, Vec3& from, Vec3& to) {
  const Vec3 half = p.rotation.col(2) * s.half_length();
  from = p.translation - half;
  to = p.translation + half;
}

// Closest points between segments [p1,q1] and [p2,q2]; either may be a point.
void closest_segments(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2, Vec3& c1, Vec3& c2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  constexpr double tiny = 1e-300;
  double s = 0.0, t = 0.0;
  if (a <= tiny && e <= tiny) {
    c1 = p1;
    c2 = p2;
    return;
  }
  if (a <= tiny) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= tiny) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double den = a * e - b * b;
      s = den > 1e-14 * a * e ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  c1 = p1 + d1 * s;
  c2 = p2 + d2 * t;
}

Vec3 any_perpendicular(const Vec3& v) {
  const Vec3 trial = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return v.cross(trial).normalized();
}

DistanceResult finish(double core_distance, const Vec3& ca, const Vec3& cb, const Vec3& normal, double ra,
                      double rb) {
  DistanceResult r;
  r.normal = normal;
  r.signed_distance = core_distance - ra - rb;
  r.witness_a = ca - ra * normal;
  r.witness_b = cb + rb * normal;
  if (std::abs(r.signed_distance) < tol::kTouching) r.signed_distance = 0.0;
  return r;
}

DistanceResult analytic(const ConvexShape& a, const Placement& pa, const ConvexShape& b, const Placement& pb) {
  Vec3 p1, q1, p2, q2, c1, c2;
  core_segment(a, pa, p1, q1);
  core_segment(b, pb, p2, q2);
  closest_segments(p1, q1, p2, q2, c1, c2);
  const Vec3 delta = c1 - c2;
  const double dist = delta.norm();
  Vec3 n;
  if (dist > 1e-12) {
    n = delta / dist;
  } else {
    // Core axes cross: push apart perpendicular to both, or along any axis.
    const Vec3 cross = (q1 - p1).cross(q2 - p2);
    if (cross.norm() > 1e-12) n = cross.normalized();
    else if ((q1 - p1).norm() > 1e-12) n = any_perpendicular(q1 - p1);
    else if ((q2 - p2).norm() > 1e-12) n = any_perpendicular(q2 - p2);
    else n = Vec3::UnitX();
  }
  return finish(dist, c1, c2, n, a.radius(), b.radius());
}

}  // namespace

DistanceResult signed_distance(const ConvexShape& a, const Placement& pa, const ConvexShape& b,
                               const Placement& pb) {
  if (is_round(a) && is_round(b)) return analytic(a, pa, b, pb);

  const detail::CoreDifference diff(a, pa, b, pb);
  const detail::GjkResult g = detail::gjk(diff);
  if (!g.intersecting && g.distance > 1e-12) {
    DistanceResult r = finish(g.distance, g.a, g.b, (g.a - g.b) / g.distance, a.radius(), b.radius());
    r.converged = g.converged;
    r.iterations = g.iterations;
    return r;
  }

  const detail::EpaResult e = detail::epa(diff, g.simplex);
  DistanceResult r = finish(-e.depth, e.a, e.b, -e.direction, a.radius(), b.radius());
  r.converged = g.converged && e.converged;
  r.iterations = g.iterations + e.iterations;
  return r;
}

}  // namespace scbf::geometry
