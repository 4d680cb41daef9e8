#include "scbf/numerics.hpp"

#include "scbf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scbf::numerics {

SymMatrix::SymMatrix(int dim) : dim_(dim) {
  if (dim < 0) throw std::invalid_argument("SymMatrix: negative dimension");
  data_.assign(static_cast<std::size_t>(dim) * (dim + 1) / 2, 0.0);
}

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: matrix is not square");
  SymMatrix s(static_cast<int>(m.rows()));
  for (int i = 0; i < s.dim_; ++i)
    for (int j = i; j < s.dim_; ++j) s(i, j) = m(i, j);
  return s;
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix s(dim);
  for (int i = 0; i < dim; ++i) s(i, i) = 1.0;
  return s;
}

std::size_t SymMatrix::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  // Row i of the packed upper triangle starts after rows 0..i-1.
  return static_cast<std::size_t>(i) * dim_ - static_cast<std::size_t>(i) * (i - 1) / 2 +
         static_cast<std::size_t>(j - i);
}

Eigen::MatrixXd SymMatrix::to_dense() const {
  Eigen::MatrixXd m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) m(i, j) = m(j, i) = (*this)(i, j);
  return m;
}

bool SymMatrix::is_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double SymMatrix::frobenius_norm() const {
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) {
      const double v = (*this)(i, j);
      acc += (i == j ? 1.0 : 2.0) * v * v;
    }
  return std::sqrt(acc);
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  if (other.dim_ != dim_) throw std::invalid_argument("SymMatrix: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi

EigenDecomposition sym_eigen(const Eigen::MatrixXd& input) {
  if (input.rows() != input.cols()) throw std::invalid_argument("sym_eigen: matrix is not square");
  if (!input.allFinite()) throw std::invalid_argument("sym_eigen: non-finite entry in input");

  const int n = static_cast<int>(input.rows());
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double scale = a.norm();
  for (int sweep = 0; sweep < tol::kJacobiMaxSweeps && n > 1; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale || off == 0.0) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle chosen so the updated a(p,q) vanishes.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

EigenDecomposition sym_eigen(const SymMatrix& a) {
  if (!a.is_finite()) throw std::invalid_argument("sym_eigen: non-finite entry in input");
  return sym_eigen(a.to_dense());
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return std::numeric_limits<double>::infinity();
  return sym_eigen(a).values[0];
}

double max_eigenvalue(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  const auto e = sym_eigen(a);
  return e.values[e.values.size() - 1];
}

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  const auto e = sym_eigen(a);
  return std::max(std::abs(e.values[0]), std::abs(e.values[e.values.size() - 1]));
}

// ---------------------------------------------------------------------------
// Incomplete beta

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for I_x(a,b), modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= tol::kIncBetaMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw ConvergenceError("reg_inc_beta: continued fraction did not converge");
}

void check_shape(double a, double b, const char* who) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument(std::string(who) + ": shape parameters must be positive and finite");
}

double beta_density(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
  check_shape(a, b, "reg_inc_beta");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("reg_inc_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::clamp(front * beta_continued_fraction(x, a, b) / a, 0.0, 1.0);
  return std::clamp(1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b, 0.0, 1.0);
}

double inv_reg_inc_beta(double p, double a, double b) {
  check_shape(a, b, "inv_reg_inc_beta");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("inv_reg_inc_beta: p outside [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < tol::kInverseMaxIter; ++it) {
    const double f = reg_inc_beta(x, a, b) - p;
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;

    const double dens = beta_density(x, a, b);
    double next = dens > 0.0 ? x - f / dens : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);

    const bool collapsed = hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1e-300);
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x || collapsed) {
      const double err = std::abs(reg_inc_beta(next, a, b) - p);
      if (err <= tol::kIncBetaInverse || collapsed) return next;
    }
    x = next;
  }
  const double err = std::abs(reg_inc_beta(x, a, b) - p);
  if (err <= tol::kIncBetaInverse) return x;
  throw ConvergenceError("inv_reg_inc_beta: no convergence for p=" + std::to_string(p) +
                         " a=" + std::to_string(a) + " b=" + std::to_string(b) +
                         " (residual " + std::to_string(err) + ")");
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0) throw std::invalid_argument("log_binomial: negative argument");
  if (k > n) throw std::invalid_argument("log_binomial: k > n");
  const std::int64_t kk = std::min(k, n - k);
  if (kk == 0) return 0.0;
  if (kk <= 256) {
    // Short products are exact to a few ulps; lgamma differences are not.
    long double acc = 0.0L;
    for (std::int64_t i = 1; i <= kk; ++i)
      acc += std::log(static_cast<long double>(n - kk + i) / static_cast<long double>(i));
    return static_cast<double>(acc);
  }
  const long double nn = static_cast<long double>(n);
  const long double r = std::lgamma(nn + 1.0L) - std::lgamma(static_cast<long double>(kk) + 1.0L) -
                        std::lgamma(nn - static_cast<long double>(kk) + 1.0L);
  return static_cast<double>(r);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace scbf::numerics
