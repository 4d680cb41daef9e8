#include "internal.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace scbf::geometry::detail {

Eigen::Vector4d closest_on_simplex(const std::vector<Vec3>& pts, Vec3& closest) {
  const int k = static_cast<int>(pts.size());
  Eigen::Vector4d best_w = Eigen::Vector4d::Zero();
  double best = std::numeric_limits<double>::infinity();

  // Johnson-style enumeration: the minimizer lies in the relative interior of
  // some face, and on that face it equals the affine projection of the origin.
  for (int mask = 1; mask < (1 << k); ++mask) {
    int idx[4];
    int m = 0;
    for (int i = 0; i < k; ++i)
      if (mask & (1 << i)) idx[m++] = i;

    Eigen::Vector4d lambda = Eigen::Vector4d::Zero();
    if (m == 1) {
      lambda[0] = 1.0;
    } else {
      const Vec3& p0 = pts[idx[0]];
      Eigen::MatrixXd e(3, m - 1);
      for (int j = 1; j < m; ++j) e.col(j - 1) = pts[idx[j]] - p0;
      const Eigen::MatrixXd gram = e.transpose() * e;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      lu.setThreshold(1e-12);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd mu = lu.solve(-(e.transpose() * p0));
      lambda[0] = 1.0 - mu.sum();
      for (int j = 1; j < m; ++j) lambda[j] = mu[j - 1];
      bool inside = true;
      for (int j = 0; j < m; ++j) inside = inside && lambda[j] > -1e-12;
      if (!inside) continue;
    }
    Vec3 p = Vec3::Zero();
    for (int j = 0; j < m; ++j) p += lambda[j] * pts[idx[j]];
    const double dist = p.squaredNorm();
    if (dist < best) {
      best = dist;
      closest = p;
      best_w.setZero();
      for (int j = 0; j < m; ++j) best_w[idx[j]] = std::max(0.0, lambda[j]);
    }
  }
  return best_w;
}

GjkResult gjk(const CoreDifference& diff) {
  GjkResult out;
  Vec3 dir = diff.center_offset();
  if (dir.norm() < 1e-12) dir = Vec3::UnitX();

  std::vector<MinkowskiVertex> simplex{diff(-dir)};
  Eigen::Vector4d weights(1.0, 0.0, 0.0, 0.0);
  Vec3 v = simplex[0].p;
  out.converged = false;

  for (int it = 0; it < tol::kGjkMaxIter; ++it) {
    out.iterations = it + 1;
    const double vnorm = v.norm();
    if (vnorm <= 1e-12) {
      out.intersecting = true;
      out.converged = true;
      break;
    }
    const MinkowskiVertex w = diff(-v);
    const double lower = v.dot(w.p) / vnorm;
    if (vnorm - lower <= tol::kGjkGap) {
      out.converged = true;
      break;
    }
    bool duplicate = false;
    for (const auto& s : simplex) duplicate = duplicate || (s.p - w.p).norm() <= 1e-14 * (1.0 + vnorm);
    if (duplicate) {
      out.converged = true;
      break;
    }

    simplex.push_back(w);
    std::vector<Vec3> pts;
    for (const auto& s : simplex) pts.push_back(s.p);
    Vec3 next;
    const Eigen::Vector4d lam = closest_on_simplex(pts, next);

    std::vector<MinkowskiVertex> kept;
    Eigen::Vector4d kept_w = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (lam[static_cast<Eigen::Index>(i)] > 0.0) {
        kept_w[static_cast<Eigen::Index>(kept.size())] = lam[static_cast<Eigen::Index>(i)];
        kept.push_back(simplex[i]);
      }

    if (next.norm() >= vnorm) {
      // No progress: the previous simplex already holds the best point.
      simplex.pop_back();
      out.converged = true;
      break;
    }
    simplex = std::move(kept);
    weights = kept_w;
    v = next;
    if (simplex.size() == 4) {
      out.intersecting = true;
      out.converged = true;
      break;
    }
  }

  out.simplex = simplex;
  if (out.intersecting) {
    out.distance = 0.0;
    return out;
  }
  out.distance = v.norm();
  for (std::size_t i = 0; i < simplex.size(); ++i) {
    out.a += weights[static_cast<Eigen::Index>(i)] * simplex[i].a;
    out.b += weights[static_cast<Eigen::Index>(i)] * simplex[i].b;
  }
  return out;
}

}  // namespace scbf::geometry::detail
