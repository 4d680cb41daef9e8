#pragma once

// Independent oracles and fixtures shared by the test binaries. Nothing here
// calls into the library's geometry or kinematics kernels.

#include "scbf/geometry.hpp"
#include "scbf/robot.hpp"
#include "scbf/sdfield.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using scbf::geometry::ConvexShape;
using scbf::geometry::Placement;
using scbf::geometry::Vec3;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.141592653589793238462643;

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  Vec3 vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vec3 unit3() {
    Vec3 v(normal(), normal(), normal());
    return v.normalized();
  }
  Eigen::VectorXd vec(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Mat3 rotation() {
    Eigen::Quaterniond q(normal(), normal(), normal(), normal());
    return q.normalized().toRotationMatrix();
  }
  Placement placement(double spread) {
    Placement p;
    p.rotation = rotation();
    p.translation = vec3(-spread, spread);
    return p;
  }
  Eigen::MatrixXd symmetric(int n, double scale = 1.0) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = uniform(-scale, scale);
    return 0.5 * (m + m.transpose());
  }
  Eigen::MatrixXd orthogonal(int n) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  }
};

// ---------------------------------------------------------------------------
// Elementary exact distances

inline double point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double u = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + u * ab)).norm();
}

inline double point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double n2 = n.squaredNorm();
  double best = std::min({point_segment(p, a, b), point_segment(p, b, c), point_segment(p, c, a)});
  if (n2 > 1e-300) {
    // Barycentric coordinates of the projection.
    const Vec3 q = p - n * ((p - a).dot(n) / n2);
    const double wa = (b - q).cross(c - q).dot(n) / n2;
    const double wb = (c - q).cross(a - q).dot(n) / n2;
    const double wc = 1.0 - wa - wb;
    if (wa >= 0.0 && wb >= 0.0 && wc >= 0.0) best = std::min(best, std::abs((p - a).dot(n)) / std::sqrt(n2));
  }
  return best;
}

// Minimum over the interior critical point and the four boundary restrictions.
inline double segment_segment(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  double best = std::min({point_segment(p0, q0, q1), point_segment(p1, q0, q1), point_segment(q0, p0, p1),
                          point_segment(q1, p0, p1)});
  const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  Eigen::Matrix2d m;
  m << d1.dot(d1), -d1.dot(d2), -d1.dot(d2), d2.dot(d2);
  const Eigen::Vector2d rhs(-d1.dot(r), d2.dot(r));
  if (std::abs(m.determinant()) > 1e-14 * (1.0 + m.cwiseAbs().maxCoeff() * m.cwiseAbs().maxCoeff())) {
    const Eigen::Vector2d st = m.partialPivLu().solve(rhs);
    if (st[0] >= 0.0 && st[0] <= 1.0 && st[1] >= 0.0 && st[1] <= 1.0)
      best = std::min(best, ((p0 + st[0] * d1) - (q0 + st[1] * d2)).norm());
  }
  return best;
}

// ---------------------------------------------------------------------------
// Brute-force polytope: facets from all vertex triples.

struct Polytope {
  std::vector<Vec3> pts;
  std::vector<std::array<int, 3>> facets;
  std::vector<Vec3> normals;  // outward unit normals, one per facet
  std::vector<std::pair<int, int>> edges;
};

inline Polytope make_polytope(const std::vector<Vec3>& pts) {
  Polytope P;
  P.pts = pts;
  const int n = static_cast<int>(pts.size());
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-10 * (1.0 + scale);
  std::vector<std::vector<bool>> edge(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        Vec3 nrm = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        if (nrm.norm() < 1e-12 * (1.0 + scale * scale)) continue;
        nrm.normalize();
        bool pos = false, neg = false;
        for (int l = 0; l < n && !(pos && neg); ++l) {
          const double s = nrm.dot(pts[l] - pts[i]);
          pos = pos || s > eps;
          neg = neg || s < -eps;
        }
        if (pos && neg) continue;
        P.facets.push_back({i, j, k});
        P.normals.push_back(pos ? Vec3(-nrm) : nrm);
        edge[i][j] = edge[j][i] = edge[j][k] = edge[k][j] = edge[i][k] = edge[k][i] = true;
      }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (edge[i][j]) P.edges.emplace_back(i, j);
  return P;
}

inline std::vector<Vec3> transformed(const std::vector<Vec3>& pts, const Placement& pl) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(pl.rotation * p + pl.translation);
  return out;
}

// Exact distance of two disjoint polytopes: closest features are a vertex and a
// facet triangle or two edges.
inline double polytope_distance(const Polytope& A, const Polytope& B) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : A.facets)
    for (const auto& v : B.pts)
      best = std::min(best, point_triangle(v, A.pts[f[0]], A.pts[f[1]], A.pts[f[2]]));
  for (const auto& f : B.facets)
    for (const auto& v : A.pts)
      best = std::min(best, point_triangle(v, B.pts[f[0]], B.pts[f[1]], B.pts[f[2]]));
  for (const auto& ea : A.edges)
    for (const auto& eb : B.edges)
      best = std::min(best, segment_segment(A.pts[ea.first], A.pts[ea.second], B.pts[eb.first], B.pts[eb.second]));
  return best;
}

// Separating-axis test over facet normals and edge cross products. Returns the
// smallest overlap over the candidate axes: negative when some axis separates,
// otherwise the penetration depth.
inline double sat_overlap(const Polytope& A, const Polytope& B) {
  std::vector<Vec3> axes = A.normals;
  axes.insert(axes.end(), B.normals.begin(), B.normals.end());
  for (const auto& ea : A.edges)
    for (const auto& eb : B.edges) {
      const Vec3 c = (A.pts[ea.second] - A.pts[ea.first]).cross(B.pts[eb.second] - B.pts[eb.first]);
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ax : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin, bmin = amin, bmax = -amin;
    for (const auto& p : A.pts) {
      const double s = ax.dot(p);
      amin = std::min(amin, s);
      amax = std::max(amax, s);
    }
    for (const auto& p : B.pts) {
      const double s = ax.dot(p);
      bmin = std::min(bmin, s);
      bmax = std::max(bmax, s);
    }
    best = std::min(best, std::min(amax - bmin, bmax - amin));
  }
  return best;
}

/// Vertices of the core of a shape in its local frame (boxes: 8 corners,
/// capsules: 2 endpoints, spheres: the origin).
inline std::vector<Vec3> core_points(const ConvexShape& s) {
  using scbf::geometry::ShapeKind;
  switch (s.kind()) {
    case ShapeKind::Sphere: return {Vec3::Zero()};
    case ShapeKind::Capsule: return {Vec3(0, 0, -s.half_length()), Vec3(0, 0, s.half_length())};
    case ShapeKind::Box: {
      std::vector<Vec3> out;
      const Vec3 h = s.half_extents();
      for (int i = 0; i < 8; ++i) out.emplace_back(i & 1 ? h.x() : -h.x(), i & 2 ? h.y() : -h.y(), i & 4 ? h.z() : -h.z());
      return out;
    }
    case ShapeKind::Hull: return s.points();
  }
  return {};
}

/// Distance between two finite point sets' convex hulls where one or both may
/// be degenerate (a point or a segment).
inline double core_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() >= 4 && b.size() >= 4) return polytope_distance(make_polytope(a), make_polytope(b));
  const auto segs = [](const std::vector<Vec3>& p) {
    std::vector<std::pair<Vec3, Vec3>> out;
    if (p.size() == 1) out.emplace_back(p[0], p[0]);
    for (std::size_t i = 0; i < p.size() && p.size() > 1; ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) out.emplace_back(p[i], p[j]);
    return out;
  };
  double best = std::numeric_limits<double>::infinity();
  if (a.size() < 4 && b.size() < 4) {
    for (const auto& s : segs(a))
      for (const auto& t : segs(b)) best = std::min(best, segment_segment(s.first, s.second, t.first, t.second));
    return best;
  }
  const auto& big = a.size() >= 4 ? a : b;
  const auto& small = a.size() >= 4 ? b : a;
  const Polytope P = make_polytope(big);
  for (const auto& f : P.facets)
    for (const auto& v : small) best = std::min(best, point_triangle(v, P.pts[f[0]], P.pts[f[1]], P.pts[f[2]]));
  for (const auto& e : P.edges)
    for (const auto& s : segs(small))
      best = std::min(best, segment_segment(P.pts[e.first], P.pts[e.second], s.first, s.second));
  return best;
}

/// Polytope for a core with fewer than four points: a point or a segment,
/// without facets.
inline Polytope degenerate_polytope(const std::vector<Vec3>& pts) {
  Polytope P;
  P.pts = pts;
  if (pts.size() == 2) P.edges.emplace_back(0, 1);
  return P;
}

/// Oracle signed distance for any pair of cores plus rounding. Overlap depth
/// comes from the separating-axis test; the Minkowski difference of the cores
/// has its facet normals among the candidate axes whenever one core is a full
/// polytope.
inline double oracle_signed_distance(const ConvexShape& a, const Placement& pa, const ConvexShape& b,
                                     const Placement& pb) {
  const auto va = transformed(core_points(a), pa), vb = transformed(core_points(b), pb);
  const double rr = a.radius() + b.radius();
  if (va.size() < 4 && vb.size() < 4) return core_distance(va, vb) - rr;
  const Polytope A = va.size() >= 4 ? make_polytope(va) : degenerate_polytope(va);
  const Polytope B = vb.size() >= 4 ? make_polytope(vb) : degenerate_polytope(vb);
  const double ov = sat_overlap(A, B);
  if (ov > 0.0) return -ov - rr;
  return core_distance(va, vb) - rr;
}

// ---------------------------------------------------------------------------
// Kinematics oracle: product of exponentials with screw axes in the base frame.

inline Mat3 rodrigues(const Vec3& w, double th) {
  Mat3 k;
  k << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return Mat3::Identity() + std::sin(th) * k + (1.0 - std::cos(th)) * k * k;
}

/// World placements of every link frame computed as
/// T_i(q) = exp([S_1] q_1) ... exp([S_i] q_i) M_i.
inline std::vector<Placement> poe_fk(const scbf::robot::RobotModel& model, const Eigen::VectorXd& q) {
  const int n = model.dof();
  // Home frames.
  std::vector<Mat3> hr(static_cast<std::size_t>(n));
  std::vector<Vec3> hp(static_cast<std::size_t>(n));
  Mat3 r = model.base().rotation;
  Vec3 p = model.base().translation;
  for (int i = 0; i < n; ++i) {
    const auto& o = model.joints()[static_cast<std::size_t>(i)].origin;
    p = p + r * o.translation;
    r = r * o.rotation;
    hr[static_cast<std::size_t>(i)] = r;
    hp[static_cast<std::size_t>(i)] = p;
  }
  std::vector<Placement> out;
  Mat3 er = Mat3::Identity();
  Vec3 et = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec3 w = hr[static_cast<std::size_t>(i)] * model.joints()[static_cast<std::size_t>(i)].axis.normalized();
    const Mat3 rot = rodrigues(w, q[i]);
    // exp([S] q): x -> rot (x - p_i) + p_i
    const Vec3 t = hp[static_cast<std::size_t>(i)] - rot * hp[static_cast<std::size_t>(i)];
    et = er * t + et;
    er = er * rot;
    Placement T;
    T.rotation = er * hr[static_cast<std::size_t>(i)];
    T.translation = er * hp[static_cast<std::size_t>(i)] + et;
    out.push_back(T);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures

inline Placement along_x(double length) {
  // Capsule axis is local z; rotate it onto x and centre it on the link.
  Placement p = Placement::from_rpy(Vec3(length / 2, 0, 0), 0.0, kPi / 2, 0.0);
  return p;
}

/// Planar arm rotating about z with capsule links of the given lengths.
inline scbf::robot::RobotModel planar_arm(const std::vector<double>& lengths, double radius = 0.03,
                                          double u_max = 1.0, std::set<std::pair<int, int>> extra = {}) {
  std::vector<scbf::robot::Joint> joints;
  std::vector<scbf::robot::Link> links;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    scbf::robot::Joint j;
    j.name = "j" + std::to_string(i);
    j.axis = Vec3::UnitZ();
    if (i > 0) j.origin = Placement::from_translation(Vec3(lengths[i - 1], 0, 0));
    j.lower = -3.0;
    j.upper = 3.0;
    j.max_velocity = u_max;
    joints.push_back(j);
    links.push_back({"l" + std::to_string(i), {{ConvexShape::capsule(radius, lengths[i] / 2), along_x(lengths[i])}}});
  }
  return scbf::robot::RobotModel(joints, links, Placement::from_translation(Vec3(lengths.back(), 0, 0)),
                                 std::move(extra));
}

}  // namespace testsupport

namespace testsupport {

/// A sphere placed beside the tool point of `model` at configuration x so that
/// the tool capsule end (radius `link_radius`) clears it by `gap`. The direction
/// is random in the plane orthogonal to z.
inline void add_near_contact_sphere(std::vector<scbf::sdfield::Obstacle>& out, const scbf::robot::RobotModel& model,
                                    const Eigen::VectorXd& x, double link_radius, double gap, double sphere_radius,
                                    Rng& rng) {
  const Vec3 tip = scbf::robot::end_effector(model, x).translation;
  const double ang = rng.uniform(0, 2 * kPi);
  const Vec3 dir(std::cos(ang), std::sin(ang), 0.0);
  scbf::sdfield::Obstacle o;
  o.name = "near";
  o.shape = ConvexShape::sphere(sphere_radius);
  o.schedule = {{0.0, Placement::from_translation(tip + dir * (sphere_radius + link_radius + gap))}};
  out.push_back(o);
}

}  // namespace testsupport
