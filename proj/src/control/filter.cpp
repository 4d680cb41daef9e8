#include "scbf/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace scbf::control {

std::string to_string(FilterStatus s) {
  switch (s) {
    case FilterStatus::Inactive: return "inactive";
    case FilterStatus::Active: return "active";
    case FilterStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

Box joint_limited_box(const robot::RobotModel& model, const JointConfig& x, double h, double input_scale) {
  const Eigen::VectorXd u_max = model.input_bounds() * input_scale;
  Box box = Box::symmetric(u_max);
  const Eigen::VectorXd lo = model.lower_limits(), hi = model.upper_limits();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    box.lower[j] = std::max(box.lower[j], (lo[j] - x[j]) / h);
    box.upper[j] = std::min(box.upper[j], (hi[j] - x[j]) / h);
    if (box.lower[j] > box.upper[j]) {
      // Already outside the limits: head straight back.
      double v = 0.0;
      if (x[j] < lo[j]) v = std::min(u_max[j], (lo[j] - x[j]) / h);
      if (x[j] > hi[j]) v = std::max(-u_max[j], (hi[j] - x[j]) / h);
      box.lower[j] = box.upper[j] = v;
    }
  }
  return box;
}

FilterResult filter_halfspace(const Eigen::VectorXd& g, double b, const Eigen::VectorXd& u_des, double lambda,
                              const Box& bounds) {
  const Eigen::Index n = u_des.size();
  if (g.size() != n || bounds.lower.size() != n || bounds.upper.size() != n)
    throw std::invalid_argument("filter_input: dimension mismatch");
  const double c = lambda * b;

  FilterResult out;
  out.u = bounds.clamp(u_des);
  out.constraint = g.dot(out.u) + c;
  if (out.constraint >= 0.0) return out;

  // KKT: u(nu) = clamp(u_des + nu g) and phi(nu) = g.u(nu) + c is
  // nondecreasing and piecewise linear; find its root over nu >= 0.
  Eigen::VectorXd u_best(n);
  double phi_max = c;
  for (Eigen::Index j = 0; j < n; ++j) {
    u_best[j] = g[j] > 0.0 ? bounds.upper[j] : (g[j] < 0.0 ? bounds.lower[j] : out.u[j]);
    phi_max += g[j] * u_best[j];
  }
  if (phi_max < 0.0 || g.squaredNorm() == 0.0) {
    out.status = FilterStatus::Infeasible;
    out.u = u_best;
    out.constraint = phi_max;
    return out;
  }

  std::vector<double> breaks;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (g[j] == 0.0) continue;
    for (double bound : {bounds.lower[j], bounds.upper[j]}) {
      const double nu = (bound - u_des[j]) / g[j];
      if (nu > 0.0) breaks.push_back(nu);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.push_back(std::numeric_limits<double>::infinity());

  const auto phi = [&](double nu) {
    double v = c;
    for (Eigen::Index j = 0; j < n; ++j) v += g[j] * std::clamp(u_des[j] + nu * g[j], bounds.lower[j], bounds.upper[j]);
    return v;
  };

  double nu_lo = 0.0, phi_lo = out.constraint;
  for (double nu_hi : breaks) {
    // Slope on (nu_lo, nu_hi): sum of g_j^2 over coordinates not clamped there.
    const double probe = std::isfinite(nu_hi) ? 0.5 * (nu_lo + nu_hi) : nu_lo + 1.0;
    double slope = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = u_des[j] + probe * g[j];
      if (v > bounds.lower[j] && v < bounds.upper[j]) slope += g[j] * g[j];
    }
    const double phi_hi = std::isfinite(nu_hi) ? phi(nu_hi) : std::numeric_limits<double>::infinity();
    if (phi_hi >= 0.0 && slope > 0.0) {
      const double nu = nu_lo - phi_lo / slope;
      out.multiplier = std::isfinite(nu_hi) ? std::min(nu, nu_hi) : nu;
      break;
    }
    if (phi_hi >= 0.0) {
      out.multiplier = nu_hi;
      break;
    }
    nu_lo = nu_hi;
    phi_lo = phi_hi;
  }
  for (Eigen::Index j = 0; j < n; ++j)
    out.u[j] = std::clamp(u_des[j] + out.multiplier * g[j], bounds.lower[j], bounds.upper[j]);
  out.constraint = g.dot(out.u) + c;
  out.status = FilterStatus::Active;
  return out;
}

FilterResult filter_input(const cbfsyn::QuadraticCBF& cbf, const JointConfig& x, const Eigen::VectorXd& u_des,
                          double lambda, const Box& bounds) {
  const auto v = cbfsyn::evaluate_cbf(cbf, x);
  return filter_halfspace(v.gradient, v.value, u_des, lambda, bounds);
}

}  // namespace scbf::control
