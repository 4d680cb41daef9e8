#include "scbf/scenario.hpp"

#include "scbf/errors.hpp"
#include "scbf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace scbf::scenario {

std::vector<JointConfig> sample_ball(const ReachableBall& ball, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("sample_ball: n_samples must be positive");
  if (!(ball.radius >= 0.0)) throw std::invalid_argument("sample_ball: negative radius");
  const auto n = ball.center.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<JointConfig> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    Eigen::VectorXd dir(n);
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < n; ++i) dir[i] = gauss(rng);
      norm = dir.norm();
    } while (norm == 0.0);
    const double rad = ball.radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
    out.push_back(ball.center + (rad / norm) * dir);
  }
  return out;
}

double PolyRoots::eps_lo() const { return std::clamp(1.0 - xi_hi, 0.0, 1.0); }
double PolyRoots::eps_hi() const { return std::clamp(1.0 - xi_lo, 0.0, 1.0); }

namespace {

// The risk polynomial in log form:
//   C(N,k) xi^(N-k) = b/(2N) sum_{i=k}^{N-1} C(i,k) xi^(i-k) + b/(6N) sum_{i=N+1}^{4N} C(i,k) xi^(i-k)
class LogPoly {
 public:
  LogPoly(std::int64_t n, std::int64_t k, double beta) : lead_pow_(static_cast<double>(n - k)) {
    if (!(n > k) || k < 0) throw std::invalid_argument("risk polynomial needs n_bar > k >= 0");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    lead_coef_ = numerics::log_binomial(n, k);
    const double w_lo = std::log(beta / (2.0 * static_cast<double>(n)));
    const double w_hi = std::log(beta / (6.0 * static_cast<double>(n)));
    // log C(i,k) by the ratio recurrence C(i+1,k) = C(i,k) (i+1)/(i+1-k).
    long double lc = 0.0L;
    for (std::int64_t i = k; i <= 4 * n; ++i) {
      if (i > k) lc += std::log(static_cast<long double>(i) / static_cast<long double>(i - k));
      if (i == n) continue;
      coef_.push_back((i < n ? w_lo : w_hi) + static_cast<double>(lc));
      pow_.push_back(static_cast<double>(i - k));
    }
  }

  // Value and slope of G(s) = lead - logsumexp(rest).
  void eval(double s, double& g, double& dg) const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < coef_.size(); ++i) m = std::max(m, coef_[i] + pow_[i] * s);
    double sum = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < coef_.size(); ++i) {
      const double e = std::exp(coef_[i] + pow_[i] * s - m);
      sum += e;
      wsum += e * pow_[i];
    }
    g = lead_coef_ + lead_pow_ * s - (m + std::log(sum));
    dg = lead_pow_ - wsum / sum;
  }

  double value(double s) const {
    double g, dg;
    eval(s, g, dg);
    return g;
  }

 private:
  double lead_coef_ = 0.0;
  double lead_pow_ = 0.0;
  std::vector<double> coef_;
  std::vector<double> pow_;
};

// Root of G between `neg` (G < 0) and `pos` (G > 0), where G is monotone.
// Newton from the negative side is monotone for concave G; bisection guards it.
double concave_root(const LogPoly& p, double neg, double pos) {
  double x = neg;
  for (int it = 0; it < 200; ++it) {
    double g, dg;
    p.eval(x, g, dg);
    if (g == 0.0) return x;
    (g < 0.0 ? neg : pos) = x;
    double next = dg != 0.0 ? x - g / dg : std::numeric_limits<double>::quiet_NaN();
    if (!(next > std::min(neg, pos) && next < std::max(neg, pos))) next = 0.5 * (neg + pos);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace

double scen_poly_log_gap(std::int64_t n_bar, std::int64_t k, double beta, double s) {
  return LogPoly(n_bar, k, beta).value(s);
}

PolyRoots scen_poly_roots(std::int64_t n_bar, std::int64_t k, double beta) {
  const LogPoly p(n_bar, k, beta);

  // Maximizer of the concave G: bisection on its decreasing slope.
  double lo = -1.0, hi = 1.0, g, dg;
  for (p.eval(lo, g, dg); dg <= 0.0; p.eval(lo, g, dg)) {
    lo *= 2.0;
    if (lo < -1e6) throw ConvergenceError("scen_poly_roots: slope never positive on the left");
  }
  for (p.eval(hi, g, dg); dg >= 0.0; p.eval(hi, g, dg)) {
    hi *= 2.0;
    if (hi > 1e6) throw ConvergenceError("scen_poly_roots: slope never negative on the right");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    p.eval(mid, g, dg);
    (dg > 0.0 ? lo : hi) = mid;
  }
  const double s_max = 0.5 * (lo + hi);
  const double g_max = p.value(s_max);
  if (!(g_max > 0.0)) {
    std::ostringstream os;
    os << "scen_poly_roots: no sign change (n_bar=" << n_bar << ", k=" << k << ", beta=" << beta
       << "): G<=0 everywhere, max " << g_max << " at xi=" << std::exp(s_max);
    throw ConvergenceError(os.str());
  }

  const auto outward = [&](double dir) {
    double step = 1.0;
    double s = s_max + dir * step;
    while (p.value(s) >= 0.0) {
      step *= 2.0;
      s = s_max + dir * step;
      if (step > 1e6) {
        std::ostringstream os;
        os << "scen_poly_roots: G stays >= 0 towards " << (dir < 0 ? "xi=0" : "xi=inf");
        throw ConvergenceError(os.str());
      }
    }
    return s;
  };
  const double s_left = outward(-1.0);
  const double s_right = outward(1.0);

  PolyRoots r;
  r.xi_lo = std::exp(concave_root(p, s_left, s_max));
  r.xi_hi = std::exp(concave_root(p, s_right, s_max));
  return r;
}

RiskBound posterior_risk(std::int64_t c_star, std::int64_t n_bar, double beta) {
  if (c_star < 0 || c_star >= n_bar) throw std::invalid_argument("posterior_risk: need 0 <= c_star < n_bar");
  const PolyRoots r = scen_poly_roots(n_bar, c_star, beta);
  return {r.eps_lo(), r.eps_hi(), beta, c_star, n_bar};
}

SampleCount required_samples(std::int64_t e, double eps, double beta, std::int64_t n_max, double eps_p,
                             RiskCriterion criterion) {
  if (e < 1) throw std::invalid_argument("required_samples: e must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("required_samples: eps must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("required_samples: beta must lie in (0, 1)");
  if (n_max <= e) throw std::invalid_argument("required_samples: n_max must exceed e");

  const double target = eps + eps_p;
  const auto eval = [&](std::int64_t n) {
    SampleCount sc;
    sc.n_bar = n;
    try {
      const PolyRoots r = scen_poly_roots(n, e, beta);
      sc.eps_lo = r.eps_lo();
      sc.eps_hi = r.eps_hi();
    } catch (const ConvergenceError&) {
      sc.eps_lo = 0.0;  // no certificate at this size
      sc.eps_hi = 1.0;
    }
    sc.achieved = criterion == RiskCriterion::Midpoint ? 0.5 * (sc.eps_lo + sc.eps_hi) : sc.eps_hi;
    sc.met = sc.achieved <= target;
    return sc;
  };

  // Outer level: grow geometrically, then bisect on the integer sample count.
  SampleCount best = eval(e + 1);
  if (best.met) return best;
  std::int64_t lo = e + 1;
  std::int64_t hi = lo;
  SampleCount at_hi = best;
  while (!at_hi.met) {
    if (hi == n_max) return at_hi;
    lo = hi;
    hi = std::min(n_max, std::max(hi + 1, hi * 2));
    at_hi = eval(hi);
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    SampleCount sc = eval(mid);
    if (sc.met) {
      hi = mid;
      at_hi = sc;
    } else {
      lo = mid;
    }
  }
  return at_hi;
}

sdp::LmiProgram ScenarioProgram::assemble(int skip) const {
  sdp::LmiProgram p = base;
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    if (static_cast<int>(i) != skip) p.affine.insert(p.affine.end(), scenarios[i].begin(), scenarios[i].end());
  return p;
}

std::vector<int> ScenarioProgram::row_offsets() const {
  std::vector<int> out;
  int k = static_cast<int>(base.affine.size());
  for (const auto& s : scenarios) {
    out.push_back(k);
    k += static_cast<int>(s.size());
  }
  return out;
}

SupportCount count_support_constraints(const ScenarioProgram& program, const sdp::SdpSolution& solution,
                                       const SupportOptions& options) {
  if (solution.status != sdp::SdpStatus::Optimal)
    throw std::invalid_argument("count_support_constraints: program not solved to optimality");
  SupportCount out;
  const std::size_t ns = program.scenarios.size();
  out.active.assign(ns, false);
  out.support.assign(ns, false);
  const double obj = program.base.objective.dot(solution.z);

  for (std::size_t i = 0; i < ns; ++i) {
    for (const auto& row : program.scenarios[i]) {
      const double slack = row.coeffs.dot(solution.z) + row.offset;
      if (slack <= options.active_tol * (1.0 + std::abs(row.offset))) out.active[i] = true;
    }
  }

  for (std::size_t i = 0; i < ns; ++i) {
    if (!out.active[i] && !options.exhaustive) continue;
    const sdp::SdpSolution r = sdp::solve(program.assemble(static_cast<int>(i)), options.solver);
    ++out.resolves;
    const bool changed = r.status != sdp::SdpStatus::Optimal ||
                         r.objective_value - obj > options.change_tol * (1.0 + std::abs(obj));
    out.support[i] = changed;
    if (changed) ++out.c_star;
  }
  return out;
}

}  // namespace scbf::scenario
