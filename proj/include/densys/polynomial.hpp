#pragma once

// Real polynomials in ascending coefficient order, with the algebra needed by
// the plant and adaptive modules: long division, Routh-Hurwitz test,
// Frobenius (companion) matrices and controllable-canonical realization.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace densys {

class Polynomial {
 public:
  /// Degree reported for the zero polynomial.
  static constexpr int kZeroDegree = std::numeric_limits<int>::min();

  Polynomial() = default;
  /// Coefficients c[0] + c[1] l + c[2] l^2 + ...
  explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) { trim(); }
  Polynomial(std::initializer_list<double> ascending) : c_(ascending) { trim(); }

  static Polynomial constant(double v) { return Polynomial(std::vector<double>{v}); }
  /// Monic polynomial with the given real roots.
  static Polynomial from_roots(const std::vector<double>& roots) {
    Polynomial p{1.0};
    for (double r : roots) p = p * Polynomial{-r, 1.0};
    return p;
  }

  const std::vector<double>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  int degree() const { return c_.empty() ? kZeroDegree : static_cast<int>(c_.size()) - 1; }
  double leading() const { return c_.empty() ? 0.0 : c_.back(); }
  /// Coefficient of l^i (zero beyond the degree).
  double operator[](std::size_t i) const { return i < c_.size() ? c_[i] : 0.0; }

  bool is_monic(double tol = 1e-12) const { return !c_.empty() && std::abs(c_.back() - 1.0) <= tol; }
  Polynomial monic() const {
    if (c_.empty()) throw std::domain_error("monic: zero polynomial");
    return *this * (1.0 / c_.back());
  }

  template <class T>
  T operator()(const T& x) const {
    T acc = T(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + T(*it);
    return acc;
  }

  /// this^e for e >= 0.
  Polynomial pow(unsigned e) const {
    Polynomial out{1.0};
    for (unsigned i = 0; i < e; ++i) out = out * *this;
    return out;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + b[i];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b * -1.0; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(const Polynomial& a, double s) {
    std::vector<double> r = a.c_;
    for (double& v : r) v *= s;
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(double s, const Polynomial& a) { return a * s; }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

struct DivMod {
  Polynomial quotient;
  Polynomial remainder;
};

/// a = q * b + r with deg r < deg b.
inline DivMod poly_divmod(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw std::domain_error("poly_divmod: division by the zero polynomial");
  const int db = b.degree();
  if (a.is_zero() || a.degree() < db) return {Polynomial{}, a};
  std::vector<double> rem = a.coeffs();
  std::vector<double> q(static_cast<std::size_t>(a.degree() - db + 1), 0.0);
  const double lead = b.leading();
  for (int i = a.degree() - db; i >= 0; --i) {
    const double f = rem[static_cast<std::size_t>(i + db)] / lead;
    q[static_cast<std::size_t>(i)] = f;
    for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(i + j)] -= f * b[static_cast<std::size_t>(j)];
    rem[static_cast<std::size_t>(i + db)] = 0.0;
  }
  rem.resize(static_cast<std::size_t>(db));
  return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
}

/// Routh-Hurwitz test: true iff every root has a strictly negative real part.
/// Any zero or sign change in the first column (including marginal
/// imaginary-axis roots) gives false.
inline bool is_hurwitz(const Polynomial& p) {
  if (p.degree() < 1) throw std::invalid_argument("is_hurwitz: polynomial must have degree >= 1");
  Polynomial a = p.leading() < 0.0 ? p * -1.0 : p;
  const int n = a.degree();
  // All coefficients strictly positive is necessary.
  for (int i = 0; i <= n; ++i)
    if (!(a[static_cast<std::size_t>(i)] > 0.0)) return false;
  // Row 0: a_n, a_{n-2}, ...; row 1: a_{n-1}, a_{n-3}, ...
  const std::size_t width = static_cast<std::size_t>(n / 2 + 1);
  std::vector<double> r0(width, 0.0), r1(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    const int i0 = n - 2 * static_cast<int>(j);
    const int i1 = n - 1 - 2 * static_cast<int>(j);
    if (i0 >= 0) r0[j] = a[static_cast<std::size_t>(i0)];
    if (i1 >= 0) r1[j] = a[static_cast<std::size_t>(i1)];
  }
  for (int row = 1; row <= n; ++row) {
    if (!(r1[0] > 0.0)) return false;
    std::vector<double> next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j) next[j] = (r1[0] * r0[j + 1] - r0[0] * r1[j + 1]) / r1[0];
    r0 = std::move(r1);
    r1 = std::move(next);
    if (row == n) break;
  }
  return true;
}

inline int relative_degree(const Polynomial& Q, const Polynomial& R) {
  if (Q.is_zero() || R.is_zero()) throw std::invalid_argument("relative_degree: zero polynomial");
  return Q.degree() - R.degree();
}

struct Companion {
  Eigen::MatrixXd F;
  Eigen::VectorXd b;
};

/// Bottom-row Frobenius matrix of a monic polynomial of degree d >= 1:
/// ones on the superdiagonal, last row -a_0 ... -a_{d-1}; b = e_d.
inline Companion companion(const Polynomial& a) {
  if (a.degree() < 1) throw std::invalid_argument("companion: degree must be >= 1");
  if (!a.is_monic()) throw std::invalid_argument("companion: polynomial must be monic");
  const int d = a.degree();
  Companion out{Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Zero(d)};
  for (int i = 0; i + 1 < d; ++i) out.F(i, i + 1) = 1.0;
  for (int j = 0; j < d; ++j) out.F(d - 1, j) = -a[static_cast<std::size_t>(j)];
  out.b(d - 1) = 1.0;
  return out;
}

/// x' = A x + B u,  y = C x + D u  (single input, single output).
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  int order() const { return static_cast<int>(A.rows()); }

  std::complex<double> transfer(std::complex<double> s) const {
    const int n = order();
    if (n == 0) return {D, 0.0};
    Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
    Eigen::VectorXcd v = M.partialPivLu().solve(B.cast<std::complex<double>>());
    return (C.cast<std::complex<double>>() * v)(0) + D;
  }
};

/// Controllable canonical realization of num/den (proper). The denominator is
/// normalised to monic; the feedthrough is the polynomial quotient and the
/// strictly proper remainder supplies C. State i is the i-th derivative of the
/// partial state xi with den(p) xi = lead(den) * u.
inline StateSpace realize_tf(const Polynomial& num, const Polynomial& den) {
  if (den.is_zero()) throw std::domain_error("realize_tf: zero denominator");
  if (!num.is_zero() && num.degree() > den.degree())
    throw std::invalid_argument("realize_tf: improper transfer function");
  const double lead = den.leading();
  const Polynomial dm = den * (1.0 / lead);
  const Polynomial nm = num * (1.0 / lead);
  const int n = dm.degree();
  StateSpace ss;
  if (n == 0) {
    ss.A.resize(0, 0);
    ss.B.resize(0);
    ss.C.resize(0);
    ss.D = nm[0];
    return ss;
  }
  const DivMod qr = poly_divmod(nm, dm);
  const Companion comp = companion(dm);
  ss.A = comp.F;
  ss.B = comp.b;
  ss.C = Eigen::RowVectorXd::Zero(n);
  for (int i = 0; i < n; ++i) ss.C(i) = qr.remainder[static_cast<std::size_t>(i)];
  ss.D = qr.quotient[0];
  return ss;
}

}  // namespace densys
