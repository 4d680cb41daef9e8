#include "scbf/sdp.hpp"

#include "scbf/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace scbf::sdp {

LmiProgram::LmiProgram(int vars, int psd_dim)
    : num_vars(vars), objective(Eigen::VectorXd::Zero(vars)), psd_offset(Eigen::MatrixXd::Zero(psd_dim, psd_dim)) {
  if (psd_dim > 0) psd_coeffs.assign(static_cast<std::size_t>(vars), Eigen::MatrixXd::Zero(psd_dim, psd_dim));
}

Eigen::MatrixXd LmiProgram::psd_value(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd f = psd_offset;
  for (int i = 0; i < num_vars && !psd_coeffs.empty(); ++i)
    if (z[i] != 0.0) f += z[i] * psd_coeffs[static_cast<std::size_t>(i)];
  return f;
}

Eigen::VectorXd LmiProgram::affine_slacks(const Eigen::VectorXd& z) const {
  const int nb = (lower ? num_vars : 0) + (upper ? num_vars : 0);
  Eigen::VectorXd s(static_cast<Eigen::Index>(affine.size()) + nb);
  Eigen::Index k = 0;
  for (const auto& row : affine) s[k++] = row.coeffs.dot(z) + row.offset;
  if (lower)
    for (int i = 0; i < num_vars; ++i) s[k++] = z[i] - (*lower)[i];
  if (upper)
    for (int i = 0; i < num_vars; ++i) s[k++] = (*upper)[i] - z[i];
  return s;
}

void LmiProgram::validate() const {
  if (num_vars < 0) throw std::invalid_argument("LmiProgram: negative variable count");
  if (objective.size() != num_vars) throw std::invalid_argument("LmiProgram: objective size mismatch");
  if (!objective.allFinite()) throw std::invalid_argument("LmiProgram: non-finite objective");
  const int d = psd_dim();
  if (psd_offset.cols() != d) throw std::invalid_argument("LmiProgram: F0 is not square");
  const auto check_sym = [d](const Eigen::MatrixXd& f, const char* what) {
    if (f.rows() != d || f.cols() != d) throw std::invalid_argument(std::string("LmiProgram: ") + what + " has wrong size");
    if (!f.allFinite()) throw std::invalid_argument(std::string("LmiProgram: ") + what + " is not finite");
    if ((f - f.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + f.cwiseAbs().maxCoeff()))
      throw std::invalid_argument(std::string("LmiProgram: ") + what + " is not symmetric");
  };
  if (d > 0) {
    check_sym(psd_offset, "F0");
    if (static_cast<int>(psd_coeffs.size()) != num_vars)
      throw std::invalid_argument("LmiProgram: need one PSD coefficient matrix per variable");
    for (const auto& f : psd_coeffs) check_sym(f, "F_i");
  }
  for (const auto& row : affine) {
    if (row.coeffs.size() != num_vars) throw std::invalid_argument("LmiProgram: affine row size mismatch");
    if (!row.coeffs.allFinite() || !std::isfinite(row.offset))
      throw std::invalid_argument("LmiProgram: non-finite affine row");
  }
  if (lower && lower->size() != num_vars) throw std::invalid_argument("LmiProgram: lower bound size mismatch");
  if (upper && upper->size() != num_vars) throw std::invalid_argument("LmiProgram: upper bound size mismatch");
}

void LmiProgram::dump(std::ostream& os) const {
  using nlohmann::json;
  const auto mat = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json r = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
      rows.push_back(r);
    }
    return rows;
  };
  const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j;
  j["format_version"] = 1;
  j["sense"] = "maximize";
  j["num_vars"] = num_vars;
  j["objective"] = vec(objective);
  j["psd_dim"] = psd_dim();
  j["F0"] = mat(psd_offset);
  j["F"] = json::array();
  for (const auto& f : psd_coeffs) j["F"].push_back(mat(f));
  j["affine"] = json::array();
  for (const auto& r : affine) j["affine"].push_back({{"coeffs", vec(r.coeffs)}, {"offset", r.offset}});
  if (lower) j["lower"] = vec(*lower);
  if (upper) j["upper"] = vec(*upper);
  os << j.dump(1) << '\n';
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::MaxIter: return "max_iter";
    case SdpStatus::NumericalError: return "numerical_error";
  }
  return "unknown";
}

namespace {

// Solver-facing form with bounds folded into the affine rows.
struct Dense {
  int m = 0;
  int d = 0;
  Eigen::MatrixXd f0;
  std::vector<Eigen::MatrixXd> f;
  Eigen::MatrixXd a;  // p x m
  Eigen::VectorXd b;
  Eigen::VectorXd c;

  int p() const { return static_cast<int>(a.rows()); }
  Eigen::MatrixXd psd(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd s = f0;
    for (int i = 0; i < m && d > 0; ++i)
      if (z[i] != 0.0) s += z[i] * f[static_cast<std::size_t>(i)];
    return s;
  }
};

Dense densify(const LmiProgram& prog) {
  Dense out;
  out.m = prog.num_vars;
  out.d = prog.psd_dim();
  out.f0 = prog.psd_offset;
  out.f = prog.psd_coeffs;
  out.c = prog.objective;
  const int nb = (prog.lower ? out.m : 0) + (prog.upper ? out.m : 0);
  const int p = static_cast<int>(prog.affine.size()) + nb;
  out.a = Eigen::MatrixXd::Zero(p, out.m);
  out.b = Eigen::VectorXd::Zero(p);
  int k = 0;
  for (const auto& row : prog.affine) {
    out.a.row(k) = row.coeffs.transpose();
    out.b[k++] = row.offset;
  }
  if (prog.lower)
    for (int i = 0; i < out.m; ++i) {
      out.a(k, i) = 1.0;
      out.b[k++] = -(*prog.lower)[i];
    }
  if (prog.upper)
    for (int i = 0; i < out.m; ++i) {
      out.a(k, i) = -1.0;
      out.b[k++] = (*prog.upper)[i];
    }
  return out;
}

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

// Largest alpha in (0, inf] keeping v + alpha dv strictly positive / PD.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

double max_step(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& dm) {
  if (dm.rows() == 0) return std::numeric_limits<double>::infinity();
  const auto& l = chol.matrixL();
  Eigen::MatrixXd w = l.solve(dm);
  w = l.solve(w.transpose()).transpose();
  const double lam = numerics::min_eigenvalue(0.5 * (w + w.transpose()));
  return lam < 0.0 ? -1.0 / lam : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

struct Iterate {
  Eigen::VectorXd z;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::MatrixXd s_mat;
  Eigen::VectorXd s_vec;
  Eigen::VectorXd residual;  // c + A*(X, y)
  double compl_gap = 0.0;
  double kkt = 0.0;
};

enum class Stop { None, Converged, Requested };

struct IpmOutcome {
  Iterate it;
  SdpStatus status = SdpStatus::MaxIter;
  bool requested = false;
  int iterations = 0;
  std::string message;
};

void evaluate(const Dense& P, Iterate& it) {
  it.s_mat = P.psd(it.z);
  it.s_vec = P.a * it.z + P.b;
  it.residual = P.c + P.a.transpose() * it.y;
  for (int i = 0; i < P.m && P.d > 0; ++i) it.residual[i] += inner(P.f[static_cast<std::size_t>(i)], it.x);
  it.compl_gap = inner(it.x, it.s_mat) + it.y.dot(it.s_vec);
  const double rd = it.residual.size() ? it.residual.cwiseAbs().maxCoeff() : 0.0;
  const double cn = P.c.size() ? P.c.cwiseAbs().maxCoeff() : 0.0;
  it.kkt = std::max(rd / (1.0 + cn), std::abs(it.compl_gap) / (1.0 + std::abs(P.c.dot(it.z))));
}

// Feasible-start primal-dual iteration from a strictly feasible z0.
IpmOutcome ipm(const Dense& P, const Eigen::VectorXd& z0, const SolverOptions& opt,
               const std::function<bool(const Iterate&)>& stop) {
  const int m = P.m, d = P.d, p = P.p();
  const double nu = static_cast<double>(d + p);

  IpmOutcome out;
  Iterate& it = out.it;
  it.z = z0;
  it.s_mat = P.psd(it.z);
  it.s_vec = P.a * it.z + P.b;
  const double mu0 = 1.0;
  if (d > 0) {
    it.x = mu0 * it.s_mat.llt().solve(Eigen::MatrixXd::Identity(d, d));
    it.x = sym(it.x);
  } else {
    it.x.resize(0, 0);
  }
  it.y = mu0 * it.s_vec.cwiseInverse();

  if (nu == 0.0) {
    it.residual = P.c;
    out.status = P.c.isZero() ? SdpStatus::Optimal : SdpStatus::MaxIter;
    out.message = "no constraints";
    return out;
  }

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    evaluate(P, it);
    out.iterations = iter;
    if (stop && stop(it)) {
      out.requested = true;
      return out;
    }
    if (it.kkt <= opt.tolerance) {
      out.status = SdpStatus::Optimal;
      return out;
    }
    if (!it.z.allFinite() || it.z.cwiseAbs().maxCoeff() > 1e15) {
      out.status = SdpStatus::MaxIter;
      out.message = "iterates diverged (objective unbounded?)";
      return out;
    }
    const double mu = it.compl_gap / nu;
    if (!(it.compl_gap > 1e-15 * (1.0 + std::abs(P.c.dot(it.z))))) {
      out.status = SdpStatus::MaxIter;
      out.message = "complementarity gap exhausted";
      return out;
    }

    Eigen::LLT<Eigen::MatrixXd> s_chol;
    Eigen::MatrixXd s_inv;
    if (d > 0) {
      s_chol.compute(it.s_mat);
      if (s_chol.info() != Eigen::Success) {
        out.status = SdpStatus::NumericalError;
        out.message = "slack matrix lost definiteness";
        return out;
      }
      s_inv = sym(s_chol.solve(Eigen::MatrixXd::Identity(d, d)));
    }
    const Eigen::VectorXd s_recip = it.s_vec.cwiseInverse();
    const Eigen::VectorXd ys = it.y.cwiseProduct(s_recip);

    // Schur complement and barrier gradient.
    Eigen::MatrixXd M = P.a.transpose() * ys.asDiagonal() * P.a;
    Eigen::VectorXd g = P.a.transpose() * s_recip;
    if (d > 0) {
      std::vector<Eigen::MatrixXd> gj(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j) gj[static_cast<std::size_t>(j)] = it.x * P.f[static_cast<std::size_t>(j)] * s_inv;
      for (int i = 0; i < m; ++i) {
        const auto& fi = P.f[static_cast<std::size_t>(i)];
        g[i] += inner(fi, s_inv);
        for (int j = i; j < m; ++j) {
          const double v = inner(fi, gj[static_cast<std::size_t>(j)].transpose());
          M(i, j) += v;
          if (j != i) M(j, i) += v;
        }
      }
    }
    const double trace = M.trace() / std::max(1, m);
    Eigen::LLT<Eigen::MatrixXd> m_chol;
    bool factored = false;
    for (double reg = 1e-14; reg <= 1e-4; reg *= 100.0) {
      m_chol.compute(M + reg * std::max(trace, 1e-300) * Eigen::MatrixXd::Identity(m, m));
      if (m_chol.info() == Eigen::Success) {
        factored = true;
        break;
      }
    }
    if (!factored) {
      out.status = SdpStatus::NumericalError;
      out.message = "Schur complement is not positive definite";
      return out;
    }

    const auto psd_dir = [&](const Eigen::VectorXd& dz) {
      Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < m && d > 0; ++i)
        if (dz[i] != 0.0) ds += dz[i] * P.f[static_cast<std::size_t>(i)];
      return ds;
    };

    // Predictor.
    const Eigen::VectorXd dz_a = m_chol.solve(P.c);
    if (!dz_a.allFinite()) {
      out.status = SdpStatus::NumericalError;
      out.message = "search direction is not finite";
      return out;
    }
    const Eigen::MatrixXd dS_a = psd_dir(dz_a);
    const Eigen::VectorXd ds_a = P.a * dz_a;
    Eigen::MatrixXd dX_a;
    if (d > 0) dX_a = -it.x - sym(it.x * dS_a * s_inv);
    const Eigen::VectorXd dy_a = -it.y - ys.cwiseProduct(ds_a);

    Eigen::LLT<Eigen::MatrixXd> x_chol;
    if (d > 0) x_chol.compute(it.x);
    const auto primal_step = [&](const Eigen::MatrixXd& dS, const Eigen::VectorXd& ds) {
      double a = max_step(it.s_vec, ds);
      if (d > 0) a = std::min(a, max_step(s_chol, dS));
      return a;
    };
    const auto dual_step = [&](const Eigen::MatrixXd& dX, const Eigen::VectorXd& dy) {
      double a = max_step(it.y, dy);
      if (d > 0) a = std::min(a, max_step(x_chol, dX));
      return a;
    };
    const double ap_a = std::min(1.0, primal_step(dS_a, ds_a));
    const double ad_a = std::min(1.0, dual_step(dX_a, dy_a));
    double mu_aff = (it.y + ad_a * dy_a).dot(it.s_vec + ap_a * ds_a);
    if (d > 0) mu_aff += inner(it.x + ad_a * dX_a, it.s_mat + ap_a * dS_a);
    mu_aff /= nu;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    Eigen::VectorXd rhs = P.c + sigma * mu * g;
    const Eigen::VectorXd cy = dy_a.cwiseProduct(ds_a).cwiseProduct(s_recip);
    rhs -= P.a.transpose() * cy;
    Eigen::MatrixXd cx;
    if (d > 0) {
      cx = dX_a * dS_a * s_inv;
      for (int i = 0; i < m; ++i) rhs[i] -= inner(P.f[static_cast<std::size_t>(i)], cx.transpose());
    }
    const Eigen::VectorXd dz = m_chol.solve(rhs);
    const Eigen::MatrixXd dS = psd_dir(dz);
    const Eigen::VectorXd ds = P.a * dz;
    Eigen::MatrixXd dX;
    if (d > 0) dX = sigma * mu * s_inv - it.x - sym(it.x * dS * s_inv) - sym(cx);
    const Eigen::VectorXd dy = sigma * mu * s_recip - it.y - ys.cwiseProduct(ds) - cy;

    if (!dz.allFinite() || !dy.allFinite() || (d > 0 && !dX.allFinite())) {
      out.status = SdpStatus::NumericalError;
      out.message = "search direction is not finite";
      return out;
    }
    double ap = std::min(1.0, opt.step_fraction * primal_step(dS, ds));
    double ad = std::min(1.0, opt.step_fraction * dual_step(dX, dy));
    // While the dual is infeasible a common step keeps the residual shrinking
    // with the gap; otherwise the gap can vanish first and stall the method.
    const double rd_rel = it.residual.cwiseAbs().maxCoeff() / (1.0 + P.c.cwiseAbs().maxCoeff());
    if (rd_rel > opt.tolerance) ap = ad = std::min(ap, ad);
    if (ap < 1e-12 && ad < 1e-12) {
      out.status = SdpStatus::NumericalError;
      out.message = "step length collapsed";
      evaluate(P, it);
      return out;
    }
    // Roundoff can put the fraction-to-boundary step just outside the cone.
    double ap_ok = ap, ad_ok = ad;
    for (int k = 0; k < 30 && d > 0; ++k) {
      if (Eigen::LLT<Eigen::MatrixXd>(it.s_mat + ap_ok * dS).info() == Eigen::Success) break;
      ap_ok *= 0.5;
    }
    for (int k = 0; k < 30 && d > 0; ++k) {
      if (Eigen::LLT<Eigen::MatrixXd>(it.x + ad_ok * dX).info() == Eigen::Success) break;
      ad_ok *= 0.5;
    }
    it.z += ap_ok * dz;
    if (d > 0) it.x = sym(it.x + ad_ok * dX);
    it.y += ad_ok * dy;
  }
  evaluate(P, it);
  out.iterations = opt.max_iter;
  if (stop && stop(it)) {
    out.requested = true;
    return out;
  }
  out.status = it.kkt <= opt.tolerance ? SdpStatus::Optimal : SdpStatus::MaxIter;
  return out;
}

double interior_margin(const Dense& P, const Eigen::VectorXd& z) {
  double t = std::numeric_limits<double>::infinity();
  if (P.d > 0) t = numerics::min_eigenvalue(P.psd(z));
  if (P.p() > 0) t = std::min(t, (P.a * z + P.b).minCoeff());
  return t;
}

struct PhaseOne {
  bool feasible = false;
  bool infeasible = false;
  Eigen::VectorXd z;
  Eigen::MatrixXd cert_x;
  Eigen::VectorXd cert_y;
  double bound = 0.0;
  int iterations = 0;
  std::string message;
};

// maximize t s.t. F(z) - t I >= 0, A z + b - t >= 0, t <= 1, and, when
// radius is finite, |z_i - hint_i| <= radius. The box keeps the iterates off
// recession directions of the feasible set, which otherwise ruin the phase II
// start. Infeasibility is only certified from the original rows.
PhaseOne phase_one(const Dense& P, const Eigen::VectorXd& hint, double radius, const SolverOptions& opt) {
  const int p = P.p();
  const bool boxed = std::isfinite(radius);
  const int nbox = boxed ? 2 * P.m : 0;
  Dense Q;
  Q.m = P.m + 1;
  Q.d = P.d;
  Q.f0 = P.f0;
  Q.f = P.f;
  if (P.d > 0) Q.f.push_back(-Eigen::MatrixXd::Identity(P.d, P.d));
  Q.a = Eigen::MatrixXd::Zero(p + 1 + nbox, Q.m);
  Q.a.topLeftCorner(p, P.m) = P.a;
  Q.a.col(P.m).head(p).setConstant(-1.0);
  Q.a(p, P.m) = -1.0;
  Q.b = Eigen::VectorXd::Zero(p + 1 + nbox);
  Q.b.head(p) = P.b;
  Q.b[p] = 1.0;
  for (int i = 0; i < nbox / 2; ++i) {
    Q.a(p + 1 + i, i) = 1.0;
    Q.b[p + 1 + i] = radius - hint[i];
    Q.a(p + 1 + P.m + i, i) = -1.0;
    Q.b[p + 1 + P.m + i] = radius + hint[i];
  }
  Q.c = Eigen::VectorXd::Zero(Q.m);
  Q.c[P.m] = 1.0;

  Eigen::VectorXd w(Q.m);
  w.head(P.m) = hint;
  w[P.m] = std::min(interior_margin(P, hint), 0.0) - 1.0;

  const double tol = opt.tolerance;
  // Bound and residual of the Farkas system of the original program, using the
  // multipliers of the original rows and of t <= 1.
  const auto dual_bound = [&](const Iterate& it) {
    double u = P.b.dot(it.y.head(p)) + it.y[p];
    if (P.d > 0) u += inner(P.f0, it.x);
    return u;
  };
  const auto farkas_residual = [&](const Iterate& it) {
    Eigen::VectorXd r = P.a.transpose() * it.y.head(p);
    for (int i = 0; i < P.m && P.d > 0; ++i) r[i] += inner(P.f[static_cast<std::size_t>(i)], it.x);
    double t_res = 1.0 - it.y.head(p + 1).sum();
    if (P.d > 0) t_res -= it.x.trace();
    return std::max(r.size() ? r.cwiseAbs().maxCoeff() : 0.0, std::abs(t_res));
  };
  const auto certified = [&](const Iterate& it) {
    const double bound = dual_bound(it);
    const double rd = farkas_residual(it);
    return bound < -tol && (rd <= tol || rd * (1.0 + it.z.cwiseAbs().maxCoeff()) * Q.m <= 1e-4 * -bound);
  };
  const auto stop = [&](const Iterate& it) {
    const double t = it.z[P.m];
    if (t > 0.0 && it.compl_gap <= t) return true;
    return certified(it);
  };
  SolverOptions o = opt;
  o.max_iter = std::max(opt.max_iter, 200);
  const IpmOutcome r = ipm(Q, w, o, stop);

  PhaseOne out;
  out.iterations = r.iterations;
  const double t = r.it.z[P.m];
  out.z = r.it.z.head(P.m);
  out.bound = dual_bound(r.it);
  if (!r.it.z.allFinite()) {
    out.message = "phase I iterates are not finite";
    return out;
  }
  if (t > 0.0 && interior_margin(P, out.z) > 0.0) {
    out.feasible = true;
    return out;
  }
  const bool no_interior = r.status == SdpStatus::Optimal && farkas_residual(r.it) <= tol && out.bound <= tol;
  if (certified(r.it) || no_interior) {
    out.infeasible = true;
    out.cert_x = r.it.x;
    out.cert_y = r.it.y.head(p);
    out.message = out.bound < -tol ? "certified infeasible" : "no strictly feasible point";
    return out;
  }
  out.message = "phase I did not conclude: " + r.message;
  return out;
}

}  // namespace

SdpSolution solve(const LmiProgram& program, const SolverOptions& options) {
  program.validate();
  const Dense P = densify(program);

  SdpSolution sol;
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(P.m);
  int phase_iters = 0;
  bool interior = false;
  if (options.initial_point && options.initial_point->size() == P.m) {
    z0 = *options.initial_point;
    interior = interior_margin(P, z0) > 0.0;
  } else {
    interior = interior_margin(P, z0) > 0.0;
  }
  if (!interior) {
    const double scale = 1.0 + (P.m ? z0.cwiseAbs().maxCoeff() : 0.0);
    PhaseOne ph;
    for (const double radius : {1e1 * scale, 1e3 * scale, 1e5 * scale, std::numeric_limits<double>::infinity()}) {
      ph = phase_one(P, z0, radius, options);
      phase_iters += ph.iterations;
      if (ph.feasible || ph.infeasible) break;
    }
    if (ph.infeasible) {
      sol.status = SdpStatus::Infeasible;
      sol.z = ph.z;
      sol.dual_psd = ph.cert_x;
      sol.dual_affine = ph.cert_y;
      sol.dual_objective = ph.bound;
      sol.iterations = phase_iters;
      sol.message = ph.message;
      sol.objective_value = P.c.dot(sol.z);
      return sol;
    }
    if (!ph.feasible) {
      sol.status = SdpStatus::MaxIter;
      sol.z = ph.z;
      sol.iterations = phase_iters;
      sol.message = ph.message;
      sol.objective_value = P.c.dot(sol.z);
      return sol;
    }
    z0 = ph.z;
  }

  const IpmOutcome r = ipm(P, z0, options, nullptr);
  sol.z = r.it.z;
  sol.status = r.status;
  if (sol.status != SdpStatus::Optimal && r.it.kkt <= options.accept) sol.status = SdpStatus::Optimal;
  sol.kkt_residual = r.it.kkt;
  sol.objective_value = P.c.dot(r.it.z);
  sol.dual_objective = P.b.dot(r.it.y) + (P.d > 0 ? inner(P.f0, r.it.x) : 0.0);
  sol.iterations = phase_iters + r.iterations;
  sol.dual_psd = r.it.x;
  sol.dual_affine = r.it.y;
  sol.message = r.message;
  return sol;
}

}  // namespace scbf::sdp
