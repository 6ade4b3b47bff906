#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <complex>
#include <random>

#include "densys/polynomial.hpp"

using namespace densys;

namespace {

// Characteristic polynomial by the Faddeev-LeVerrier recursion.
std::vector<double> char_poly(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    M = A * M + c[static_cast<std::size_t>(n - k + 1)] * Eigen::MatrixXd::Identity(n, n);
    c[static_cast<std::size_t>(n - k)] = -(A * M).trace() / k;
  }
  return c;
}

std::complex<double> rational(const Polynomial& num, const Polynomial& den, std::complex<double> s) {
  return num(s) / den(s);
}

void expect_tf_match(const Polynomial& num, const Polynomial& den, const StateSpace& ss) {
  for (double w : {0.1, 0.3, 1.0, 2.0, 3.0, 10.0, 30.0, 100.0}) {
    const std::complex<double> s(0.0, w);
    const auto want = rational(num, den, s), got = ss.transfer(s);
    EXPECT_LE(std::abs(got - want), 1e-8 * std::max(1.0, std::abs(want))) << "w=" << w;
  }
}

}  // namespace

TEST(Polynomial, CanonicalForm) {
  EXPECT_EQ(Polynomial({1.0, 2.0, 0.0, 0.0}).degree(), 1);
  EXPECT_TRUE(Polynomial({0.0, 0.0}).is_zero());
  EXPECT_EQ(Polynomial{}.degree(), Polynomial::kZeroDegree);
  EXPECT_EQ(Polynomial::from_roots({-1.0, -1.0}), (Polynomial{1.0, 2.0, 1.0}));
  EXPECT_EQ((Polynomial{-1.0, 1.0}).pow(3), (Polynomial{-1.0, 3.0, -3.0, 1.0}));
}

TEST(Polynomial, DivmodExamples) {
  auto r = poly_divmod({1.0, 2.0, 1.0}, {1.0, 1.0});
  EXPECT_EQ(r.quotient, (Polynomial{1.0, 1.0}));
  EXPECT_TRUE(r.remainder.is_zero());

  r = poly_divmod({5.0, 3.0}, {1.0, 0.0, 1.0});
  EXPECT_TRUE(r.quotient.is_zero());
  EXPECT_EQ(r.remainder, (Polynomial{5.0, 3.0}));

  const Polynomial R_m{1.0, 2.0, 1.0};
  const Polynomial Q = Polynomial{-1.0, 1.0}.pow(3);
  const Polynomial dQ = Q - Polynomial{0.0, 1.0} * R_m;
  EXPECT_EQ(dQ, (Polynomial{-1.0, 2.0, -5.0}));
  r = poly_divmod(dQ, R_m);
  EXPECT_EQ(r.quotient, Polynomial{-5.0});
  EXPECT_EQ(r.remainder, (Polynomial{4.0, 12.0}));

  EXPECT_THROW(poly_divmod({1.0}, Polynomial{}), std::domain_error);
}

TEST(Polynomial, DivmodReconstructionRandom) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> deg(0, 7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(deg(rng) + 1)), b(static_cast<std::size_t>(deg(rng) + 1));
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    b.back() = (b.back() >= 0 ? 1.0 : -1.0) * (0.5 + std::abs(b.back()));
    const Polynomial A(a), B(b);
    const auto r = poly_divmod(A, B);
    EXPECT_LT(r.remainder.degree(), B.degree() == 0 ? 0 : B.degree());
    const Polynomial back = r.quotient * B + r.remainder;
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(back[i], a[i], 1e-12 * std::max(1.0, scale) * 64);
  }
}

TEST(Polynomial, HurwitzExamples) {
  EXPECT_TRUE(is_hurwitz({1.0, 2.0, 1.0}));
  EXPECT_FALSE(is_hurwitz(Polynomial{-1.0, 1.0}.pow(3)));
  EXPECT_FALSE(is_hurwitz({1.0, 0.0, 1.0}));
  EXPECT_TRUE(is_hurwitz({-3.0, -1.0}));
  // s^3 + s^2 + s + 1 has roots on the imaginary axis.
  EXPECT_FALSE(is_hurwitz({1.0, 1.0, 1.0, 1.0}));
  EXPECT_THROW(is_hurwitz(Polynomial{2.0}), std::invalid_argument);
}

TEST(Polynomial, HurwitzAgreesWithEigenvalues) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> deg(1, 6);
  std::uniform_real_distribution<double> u(-1.0, 4.0);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = deg(rng);
    std::vector<double> a(static_cast<std::size_t>(d + 1));
    for (double& v : a) v = u(rng);
    a.back() = 1.0;
    const Polynomial p(a);
    const Eigen::VectorXcd ev = companion(p).F.eigenvalues();
    double max_re = -INFINITY;
    for (int i = 0; i < ev.size(); ++i) max_re = std::max(max_re, ev(i).real());
    if (std::abs(max_re) < 1e-6) continue;
    ++checked;
    EXPECT_EQ(is_hurwitz(p), max_re < 0.0) << "trial " << trial;
  }
  EXPECT_GT(checked, 990);
}

TEST(Polynomial, RelativeDegree) {
  EXPECT_EQ(relative_degree(Polynomial{-1.0, 1.0}.pow(3), {1.0, 2.0, 1.0}), 1);
  EXPECT_EQ(relative_degree({0.0, 0.0, 1.0}, {1.0}), 2);
  EXPECT_EQ(relative_degree({1.0, 1.0}, {1.0, 1.0}), 0);
  EXPECT_THROW(relative_degree(Polynomial{}, {1.0}), std::invalid_argument);
}

TEST(Polynomial, CompanionExamples) {
  auto c = companion({1.0, 2.0, 1.0});
  Eigen::MatrixXd F(2, 2);
  F << 0, 1, -1, -2;
  EXPECT_EQ(c.F, F);
  EXPECT_EQ(c.b, Eigen::Vector2d(0, 1));
  c = companion({3.0, 1.0});
  EXPECT_EQ(c.F(0, 0), -3.0);
  c = companion({0.0, 0.0, 0.0, 1.0});
  EXPECT_EQ(c.F.row(2), Eigen::RowVector3d(0, 0, 0));
  EXPECT_EQ(c.F(0, 1), 1.0);
  EXPECT_THROW(companion({1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(companion({1.0}), std::invalid_argument);
}

TEST(Polynomial, CompanionCharPolyRoundTrip) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> deg(1, 8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(deg(rng) + 1));
    for (double& v : a) v = u(rng);
    a.back() = 1.0;
    const auto cp = char_poly(companion(Polynomial(a)).F);
    ASSERT_EQ(cp.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(cp[i], a[i], 1e-10);
  }
}

TEST(Polynomial, RealizeExamples) {
  StateSpace ss = realize_tf({1.0}, {1.0, 1.0});
  EXPECT_EQ(ss.A(0, 0), -1.0);
  EXPECT_EQ(ss.B(0), 1.0);
  EXPECT_EQ(ss.C(0), 1.0);
  EXPECT_EQ(ss.D, 0.0);

  ss = realize_tf({0.0, 1.0}, {1.0, 1.0});
  EXPECT_EQ(ss.D, 1.0);
  EXPECT_EQ(ss.C(0), -1.0);
  expect_tf_match({0.0, 1.0}, {1.0, 1.0}, ss);

  const Polynomial Q = Polynomial{-1.0, 1.0}.pow(3);
  const Polynomial den = Polynomial{0.0, 1.0} * Polynomial{1.0, 2.0, 1.0};
  ss = realize_tf(Q, den);
  EXPECT_DOUBLE_EQ(ss.D, 1.0);
  expect_tf_match(Q, den, ss);

  EXPECT_THROW(realize_tf({0.0, 0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(realize_tf({1.0}, Polynomial{}), std::domain_error);
}

TEST(Polynomial, RealizeNonMonicRandom) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> n(4), d(4);
    for (double& v : n) v = u(rng);
    for (double& v : d) v = u(rng);
    d.back() = 0.5 + std::abs(d.back());
    expect_tf_match(Polynomial(n), Polynomial(d), realize_tf(Polynomial(n), Polynomial(d)));
  }
}
