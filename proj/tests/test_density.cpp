#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "densys/density.hpp"

using namespace densys;

namespace {

DensityValue at(const DensityFn& d, double x, double t = 0.0) { return eval_density(d, x, t); }
DensityValue at2(const DensityFn& d, double x1, double x2, double t = 0.0) {
  const double x[2] = {x1, x2};
  return d.eval(std::span<const double>(x, 2), t);
}

}  // namespace

TEST(Density, BarrierValuesAndDivergence) {
  const DensityFn b = DensityFn::barrier(1.0, Signal::constant(2.0));
  EXPECT_EQ(at(b, 1.0), DensityValue::finite(1.0));
  EXPECT_EQ(at(b, 2.0), DensityValue::divergent(1));
  EXPECT_EQ(at(b, -2.0), DensityValue::divergent(1));
  EXPECT_TRUE(at(b, 2.5).is_out_of_domain());
}

TEST(Density, LogVariantsOutsideTheirDomain) {
  EXPECT_TRUE(at(DensityFn::log_shift(1.0, Signal::constant(0.0)), -1.0).is_out_of_domain());
  EXPECT_TRUE(at2(DensityFn::exp_hole(1, 0.98), 0.0, 0.0).is_out_of_domain());
  const DensityValue edge = at(DensityFn::log_shift(1.0, Signal::constant(0.0)), 0.0);
  EXPECT_EQ(edge, DensityValue::divergent(-1));
}

TEST(Density, Signs) {
  EXPECT_EQ(density_sign(DensityFn::linear(1.0, Signal::constant(1.0)), 2.0, 0.0), DensitySign::Positive);
  const DensityFn tube = DensityFn::log_ratio_tube(1.0, Signal::constant(3.0), Signal::constant(1.0));
  EXPECT_EQ(density_sign(tube, 2.0, 0.0), DensitySign::Zero);
  const double x[2] = {std::sqrt(0.75), std::sqrt(0.75)};
  EXPECT_EQ(density_sign(DensityFn::log_disc(1), std::span<const double>(x, 2), 0.0), DensitySign::Negative);
  EXPECT_EQ(density_sign(DensityFn::log_shift(1.0, Signal::constant(0.0)), -1.0, 0.0), DensitySign::Undefined);
  EXPECT_EQ(density_sign(DensityFn::barrier(1.0, Signal::constant(2.0)), 2.0, 0.0), DensitySign::Positive);
}

TEST(Density, NonFiniteValuesAreNormalised) {
  EXPECT_TRUE(DensityValue::finite(std::nan("")).is_out_of_domain());
  EXPECT_EQ(DensityValue::finite(-INFINITY), DensityValue::divergent(-1));
}

TEST(Density, MatchesClosedFormTranscription) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), ut(0.0, 10.0);
  const Signal w = Signal::sinusoid(0.5, 1.3).affine(1.0, 2.0);
  const Signal up = Signal::constant(3.0), lo = Signal::constant(1.0);
  const DensityFn constant = DensityFn::constant(1.7);
  const DensityFn barrier = DensityFn::barrier(1.3, w);
  const DensityFn track = DensityFn::track_sign(0.8, w);
  const DensityFn tube = DensityFn::log_ratio_tube(2.0, up, lo);
  const DensityFn shift = DensityFn::log_shift(1.5, w);
  const DensityFn linear = DensityFn::linear(0.7, w);
  const DensityFn wsign = DensityFn::weighted_sign(w);
  const DensityFn neglin = DensityFn::neg_linear(3.0, w);
  const DensityFn sym = DensityFn::sym_log_tube(1.1, w);
  const DensityFn negshift = DensityFn::neg_log_shift(2.0, w);
  auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
  for (int i = 0; i < 2000; ++i) {
    const double x = ux(rng), t = ut(rng), wt = w(t);
    EXPECT_DOUBLE_EQ(at(constant, x, t).value(), 1.7);
    if (std::abs(x) < wt) {
      EXPECT_NEAR(at(barrier, x, t).value(), 1.3 / (wt - std::abs(x)), 1e-12 * (1 + 1.3 / (wt - std::abs(x))));
    }
    EXPECT_NEAR(at(track, x, t).value(), 0.8 * (x - wt) * sgn(x), 1e-12);
    if (x > 1.0 && x < 3.0) { EXPECT_NEAR(at(tube, x, t).value(), -2.0 * std::log((3.0 - x) / (x - 1.0)), 1e-10); }
    if (x > wt) { EXPECT_NEAR(at(shift, x, t).value(), 1.5 * std::log(x - wt), 1e-10); }
    EXPECT_NEAR(at(linear, x, t).value(), 0.7 * (x - wt), 1e-12);
    EXPECT_NEAR(at(wsign, x, t).value(), wt * sgn(x - wt), 1e-12);
    EXPECT_NEAR(at(neglin, x, t).value(), -3.0 * (x - wt), 1e-12);
    if (std::abs(x) < wt) { EXPECT_NEAR(at(sym, x, t).value(), 1.1 * std::log((wt - x) / (wt + x)), 1e-10); }
    if (x > wt) { EXPECT_NEAR(at(negshift, x, t).value(), -2.0 * std::log(x - wt), 1e-10); }
  }
}

TEST(Density, PlanarClosedForms) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const DensityFn plr = DensityFn::planar_log_ratio(0.6, Signal::constant(2.0), Signal::constant(1.0));
  const DensityFn pls = DensityFn::planar_log_shift(20.0, 0.5);
  const DensityFn poly = DensityFn::poly_disc(-1.0, 0.5, 2.0);
  const DensityFn hole = DensityFn::exp_hole(-1, 0.98);
  const DensityFn disc = DensityFn::log_disc(1);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng);
    const double s6 = std::pow(std::abs(a), 0.6) + std::pow(std::abs(b), 0.6);
    const double s5 = std::pow(std::abs(a), 0.5) + std::pow(std::abs(b), 0.5);
    const double r2 = a * a + b * b;
    if (s6 > 1.0 && s6 < 2.0) { EXPECT_NEAR(at2(plr, a, b).value(), -std::log((2.0 - s6) / (s6 - 1.0)), 1e-9); }
    if (s5 > 1.0) { EXPECT_NEAR(at2(pls, a, b).value(), 20.0 * std::log(s5 - 1.0), 1e-9); }
    EXPECT_NEAR(at2(poly, a, b).value(), -1.0 + 0.5 * a * a + 2.0 * r2, 1e-12);
    if (r2 > 1.0) {
      EXPECT_NEAR(at2(hole, a, b).value(), -std::exp(std::pow(r2 - 1.0, -0.98)), 1e-9 * std::exp(std::pow(r2 - 1.0, -0.98)));
      EXPECT_NEAR(at2(disc, a, b).value(), std::log(r2 - 1.0), 1e-12);
    } else {
      EXPECT_FALSE(at2(hole, a, b).is_finite());
    }
  }
}

TEST(Density, BarrierGrowsMonotonicallyNearTheEdge) {
  const DensityFn b = DensityFn::barrier(1.0, Signal::constant(2.0));
  const DensityFn sym = DensityFn::sym_log_tube(1.0, Signal::constant(2.0));
  double prev_b = 0.0, prev_s = 0.0;
  for (int k = 1; k <= 14; ++k) {
    const double x = 2.0 - std::pow(10.0, -k);
    const double vb = at(b, x).value(), vs = std::abs(at(sym, x).value());
    EXPECT_GT(vb, prev_b);
    EXPECT_GT(vs, prev_s);
    prev_b = vb;
    prev_s = vs;
  }
  EXPECT_EQ(at(sym, 2.0), DensityValue::divergent(-1));
  EXPECT_EQ(at(sym, -2.0), DensityValue::divergent(1));
}

TEST(Density, SymLogTubeIsOdd) {
  const DensityFn sym = DensityFn::sym_log_tube(1.3, Signal::exp(4.0, -3.0).affine(1.0, 1.0));
  for (double t : {0.0, 0.3, 2.0})
    for (double x : {0.1, 0.7, 1.0, 1.9}) {
      const DensityValue p = at(sym, x, t), m = at(sym, -x, t);
      if (p.is_finite() && m.is_finite()) { EXPECT_NEAR(p.value(), -m.value(), 1e-12); }
    }
}

TEST(Density, LogRatioTubeVanishesOnlyAtMidpoint) {
  const Signal up = Signal::sinusoid(0.5, 1.0).affine(1.0, 3.0), lo = Signal::sinusoid(0.5, 1.0).affine(1.0, 1.0);
  const DensityFn tube = DensityFn::log_ratio_tube(1.0, up, lo);
  for (double t : {0.0, 1.0, 4.2}) {
    double a = lo(t) + 1e-9, b = up(t) - 1e-9;
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b);
      (at(tube, m, t).value() < 0 ? a : b) = m;
    }
    EXPECT_NEAR(0.5 * (a + b), 0.5 * (up(t) + lo(t)), 1e-9);
  }
}

TEST(Density, PolyDiscZeroSetIsTheUnitCircle) {
  const DensityFn d = DensityFn::poly_disc(-1.0, 0.0, 1.0);
  for (int k = 0; k < 36; ++k) {
    const double th = k * 0.1745;
    EXPECT_NEAR(at2(d, std::cos(th), std::sin(th)).value(), 0.0, 1e-12);
  }
}

TEST(Density, NegatedFlipsSignAndKeepsBreakpoints) {
  const DensityFn inner = DensityFn::log_ratio_tube(5.0, Signal::constant(4.0), Signal::step_switch(2.0, 1.0, 2.0));
  const DensityFn neg = DensityFn::negated(inner);
  EXPECT_NEAR(at(neg, 3.5, 0.0).value(), -at(inner, 3.5, 0.0).value(), 1e-15);
  EXPECT_EQ(at(neg, 4.0, 0.0), DensityValue::divergent(-1));
  EXPECT_EQ(neg.breakpoints(0.0, 10.0), std::vector<double>{2.0});
}

TEST(Density, ParameterValidation) {
  EXPECT_THROW(DensityFn::constant(1.0, 3), std::invalid_argument);
  EXPECT_THROW(DensityFn::barrier(0.0, Signal::constant(1.0)), std::invalid_argument);
  EXPECT_THROW(DensityFn::exp_hole(1, 1.0), std::invalid_argument);
  EXPECT_THROW(DensityFn::exp_hole(2, 0.5), std::invalid_argument);
  EXPECT_THROW(DensityFn::planar_log_ratio(-1.0, Signal::constant(3.0), Signal::constant(2.0)), std::invalid_argument);
}

TEST(Density, DimensionMismatchIsAContractViolation) {
  const double x[2] = {1.0, 0.0};
  EXPECT_THROW(DensityFn::constant(1.0).eval(std::span<const double>(x, 2), 0.0), std::logic_error);
}

TEST(Density, SignAtZeroIsZero) {
  EXPECT_EQ(at(DensityFn::track_sign(1.0, Signal::constant(2.0)), 0.0).value(), 0.0);
}
