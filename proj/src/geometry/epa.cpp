#include "internal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace scbf::geometry::detail {

namespace {

// Incrementally grown convex polytope with outward-wound triangular faces.
class Polytope {
 public:
  struct Face {
    std::array<int, 3> v;
    Vec3 n;
    double dist;
    bool alive;
  };

  bool build(const std::vector<MinkowskiVertex>& pts) {
    verts_.clear();
    faces_.clear();
    if (pts.size() < 4) return false;

    double scale = 0.0;
    for (const auto& p : pts) scale = std::max(scale, p.p.norm());
    eps_ = 1e-12 * (1.0 + scale);

    // Pick a well-spread initial tetrahedron.
    const std::size_t i0 = 0;
    std::size_t i1 = i0;
    double best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = (pts[i].p - pts[i0].p).squaredNorm();
      if (d > best) best = d, i1 = i;
    }
    const Vec3 axis = pts[i1].p - pts[i0].p;
    if (axis.norm() <= eps_) return false;
    std::size_t i2 = i0;
    best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = axis.cross(pts[i].p - pts[i0].p).squaredNorm();
      if (d > best) best = d, i2 = i;
    }
    const Vec3 plane = axis.cross(pts[i2].p - pts[i0].p);
    if (plane.norm() <= eps_ * axis.norm()) return false;
    std::size_t i3 = i0;
    best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = std::abs(plane.dot(pts[i].p - pts[i0].p));
      if (d > best) best = d, i3 = i;
    }
    if (best <= eps_ * plane.norm()) return false;

    for (std::size_t i : {i0, i1, i2, i3}) verts_.push_back(pts[i]);
    interior_ = 0.25 * (verts_[0].p + verts_[1].p + verts_[2].p + verts_[3].p);
    add_face(0, 1, 2);
    add_face(0, 1, 3);
    add_face(0, 2, 3);
    add_face(1, 2, 3);

    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == i0 || i == i1 || i == i2 || i == i3) continue;
      add_point(pts[i]);
    }
    return true;
  }

  /// Adds `w` if it lies outside; returns false when no face can see it.
  bool add_point(const MinkowskiVertex& w) {
    std::vector<std::pair<int, int>> edges;
    bool any = false;
    for (auto& f : faces_) {
      if (!f.alive || !f.n.allFinite()) continue;
      if (f.n.dot(w.p - verts_[f.v[0]].p) > eps_) {
        any = true;
        f.alive = false;
        for (int e = 0; e < 3; ++e) edges.emplace_back(f.v[e], f.v[(e + 1) % 3]);
      }
    }
    if (!any) return false;

    const int id = static_cast<int>(verts_.size());
    verts_.push_back(w);
    for (const auto& [a, b] : edges) {
      const bool shared = std::any_of(edges.begin(), edges.end(),
                                      [&](const auto& e) { return e.first == b && e.second == a; });
      if (!shared) add_face(a, b, id);
    }
    faces_.erase(std::remove_if(faces_.begin(), faces_.end(), [](const Face& f) { return !f.alive; }),
                 faces_.end());
    return true;
  }

  const Face* closest() const {
    const Face* best = nullptr;
    for (const auto& f : faces_)
      if (f.alive && (!best || f.dist < best->dist)) best = &f;
    return best;
  }

  double min_face_distance() const {
    const Face* f = closest();
    return f ? f->dist : -std::numeric_limits<double>::infinity();
  }

  const MinkowskiVertex& vertex(int i) const { return verts_[static_cast<std::size_t>(i)]; }

 private:
  void add_face(int i, int j, int k) {
    const Vec3& a = verts_[static_cast<std::size_t>(i)].p;
    const Vec3& b = verts_[static_cast<std::size_t>(j)].p;
    const Vec3& c = verts_[static_cast<std::size_t>(k)].p;
    Vec3 n = (b - a).cross(c - a);
    if (n.dot(a - interior_) < 0.0) {
      std::swap(j, k);
      n = -n;
    }
    const double len = n.norm();
    Face f{{i, j, k}, Vec3::Zero(), std::numeric_limits<double>::infinity(), true};
    if (len > 1e-300) {
      f.n = n / len;
      f.dist = f.n.dot(a);
    } else {
      f.n = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    }
    faces_.push_back(f);
  }

  std::vector<MinkowskiVertex> verts_;
  std::vector<Face> faces_;
  Vec3 interior_ = Vec3::Zero();
  double eps_ = 1e-12;
};

Vec3 barycentric(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
  const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  const double d20 = v2.dot(v0), d21 = v2.dot(v1);
  const double den = d00 * d11 - d01 * d01;
  if (std::abs(den) < 1e-300) return Vec3(1.0, 0.0, 0.0);
  double v = (d11 * d20 - d01 * d21) / den;
  double w = (d00 * d21 - d01 * d20) / den;
  v = std::clamp(v, 0.0, 1.0);
  w = std::clamp(w, 0.0, 1.0 - v);
  return Vec3(1.0 - v - w, v, w);
}

}  // namespace

EpaResult epa(const CoreDifference& diff, const std::vector<MinkowskiVertex>& seed) {
  std::vector<MinkowskiVertex> init = seed;
  for (int sx = -1; sx <= 1; ++sx)
    for (int sy = -1; sy <= 1; ++sy)
      for (int sz = -1; sz <= 1; ++sz) {
        const int nz = (sx != 0) + (sy != 0) + (sz != 0);
        if (nz == 1 || nz == 3) init.push_back(diff(Vec3(sx, sy, sz)));
      }

  Polytope poly;
  bool ok = poly.build(init) && poly.min_face_distance() >= -1e-12;
  if (!ok) {
    // The sampled polytope missed the origin; fall back to the exact vertex set.
    auto all = diff.all_vertices();
    all.insert(all.end(), init.begin(), init.end());
    ok = poly.build(all);
  }

  EpaResult out;
  if (!ok) {
    out.converged = false;
    return out;
  }

  out.converged = false;
  for (int it = 0; it < tol::kEpaMaxIter; ++it) {
    out.iterations = it + 1;
    const auto* f = poly.closest();
    const MinkowskiVertex w = diff(f->n);
    if (f->n.dot(w.p) - f->dist <= tol::kEpaGap) {
      out.converged = true;
      break;
    }
    if (!poly.add_point(w)) {
      out.converged = true;
      break;
    }
  }

  const auto* f = poly.closest();
  out.depth = std::max(0.0, f->dist);
  out.direction = f->n;
  const Vec3 p = f->dist * f->n;
  const auto& v0 = poly.vertex(f->v[0]);
  const auto& v1 = poly.vertex(f->v[1]);
  const auto& v2 = poly.vertex(f->v[2]);
  const Vec3 lam = barycentric(p, v0.p, v1.p, v2.p);
  out.a = lam[0] * v0.a + lam[1] * v1.a + lam[2] * v2.a;
  out.b = lam[0] * v0.b + lam[1] * v1.b + lam[2] * v2.b;
  return out;
}

}  // namespace scbf::geometry::detail
