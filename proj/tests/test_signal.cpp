#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "densys/signal.hpp"

using densys::AtSwitch;
using densys::Signal;

TEST(Signal, StepSwitchIsClosedOnTheLeftByDefault) {
  const Signal h = Signal::step_switch(1.0, 1.0, 0.4);
  EXPECT_EQ(h(0.5), 1.0);
  EXPECT_EQ(h(1.0), 1.0);
  EXPECT_EQ(h(2.0), 0.4);
  const Signal right = Signal::step_switch(1.0, 1.0, 0.4, AtSwitch::After);
  EXPECT_EQ(right(1.0), 0.4);
}

TEST(Signal, ExpAndProducts) {
  EXPECT_EQ(Signal::exp(1.0, 1.0)(0.0), 1.0);
  const Signal g = Signal::exp(4.0, -3.0).affine(1.0, 1.0) * Signal::step_switch(1.0, 1.0, 0.4);
  EXPECT_DOUBLE_EQ(g(0.0), 5.0);
  EXPECT_DOUBLE_EQ(g(2.0), 0.4 * (4.0 * std::exp(-6.0) + 1.0));
  EXPECT_DOUBLE_EQ(Signal::double_exp()(1.0), std::exp(std::exp(1.0)));
}

TEST(Signal, SinusoidSumAffine) {
  const Signal s = Signal::sinusoid(2.0, 3.0, 0.5) + Signal::constant(1.0);
  EXPECT_DOUBLE_EQ(s(0.7), 2.0 * std::sin(3.0 * 0.7 + 0.5) + 1.0);
  EXPECT_DOUBLE_EQ(s.affine(-2.0, 3.0)(0.7), -2.0 * s(0.7) + 3.0);
}

TEST(Signal, PulseTrainAlternatesWithDwell) {
  const Signal p = Signal::pulse_train(2.5);
  EXPECT_EQ(p(0.0), 1.0);
  EXPECT_EQ(p(2.4), 1.0);
  EXPECT_EQ(p(2.5), -1.0);
  EXPECT_EQ(p(4.9), -1.0);
  EXPECT_EQ(p(5.0), 1.0);
  EXPECT_EQ(p(7.6), -1.0);
}

TEST(Signal, Breakpoints) {
  EXPECT_EQ(Signal::step_switch(1.0, 1.0, 0.4).breakpoints(0.0, 3.0), std::vector<double>{1.0});
  EXPECT_TRUE(Signal::constant(2.0).breakpoints(0.0, 10.0).empty());
  EXPECT_EQ(Signal::pulse_train(2.5).breakpoints(0.0, 6.0), (std::vector<double>{2.5, 5.0}));
  // A switch between equal levels is no discontinuity.
  EXPECT_TRUE(Signal::step_switch(1.0, 2.0, 2.0).breakpoints(0.0, 3.0).empty());
  // Open interval: endpoints are excluded.
  EXPECT_TRUE(Signal::step_switch(1.0, 1.0, 0.4).breakpoints(1.0, 3.0).empty());
}

TEST(Signal, BreakpointsPropagateThroughComposites) {
  const Signal s = Signal::product({Signal::exp(1.0, -0.1), Signal::sinusoid(1.0, 1.0), Signal::pulse_train(2.5)})
                       .affine(2.0, 1.0) +
                   Signal::step_switch(4.0, 0.0, 1.0);
  EXPECT_EQ(s.breakpoints(0.0, 10.0), (std::vector<double>{2.5, 4.0, 5.0, 7.5}));
}

TEST(Signal, BreakpointsAreMonotoneInTheInterval) {
  const Signal s = Signal::pulse_train(0.7, 1.0, -1.0, 0.3, 0.25) + Signal::step_switch(2.2, 0.0, 1.0);
  const auto inner = s.breakpoints(1.0, 4.0);
  const auto outer = s.breakpoints(0.5, 6.0);
  for (double b : inner) EXPECT_NE(std::find(outer.begin(), outer.end(), b), outer.end()) << b;
  for (std::size_t i = 1; i < outer.size(); ++i) EXPECT_LT(outer[i - 1], outer[i]);
}

TEST(Signal, ContinuousBetweenBreakpoints) {
  const Signal s = Signal::pulse_train(0.9, 2.0, -0.5, 0.2, 0.3) * Signal::sinusoid(1.0, 2.0, 1.0).affine(1.0, 3.0) +
                   Signal::step_switch(3.3, 1.0, -1.0);
  auto bps = s.breakpoints(0.0, 8.0);
  bps.insert(bps.begin(), 0.0);
  bps.push_back(8.0);
  for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
    const double a = bps[k], b = bps[k + 1];
    const int n = 2000;
    double worst = 0.0;
    for (int i = 1; i < n - 1; ++i) {
      const double t0 = a + (b - a) * i / n, t1 = a + (b - a) * (i + 1) / n;
      worst = std::max(worst, std::abs(s(t1) - s(t0)));
    }
    EXPECT_LT(worst, 0.05) << "segment " << a << ".." << b;
  }
}

TEST(Signal, PulseTrainPhaseAndDuty) {
  const Signal p = Signal::pulse_train(1.0, 3.0, 0.0, 0.5, 0.25);
  // cycle 2, rises at k*2 - 0.5, high for 0.5.
  EXPECT_EQ(p(0.0), 0.0);
  EXPECT_EQ(p(1.5), 3.0);
  EXPECT_EQ(p(1.99), 3.0);
  EXPECT_EQ(p(2.0), 0.0);
  EXPECT_EQ(p.breakpoints(0.0, 4.0), (std::vector<double>{1.5, 2.0, 3.5}));
}

TEST(Signal, InvalidParametersThrow) {
  EXPECT_THROW(Signal::pulse_train(0.0), std::invalid_argument);
  EXPECT_THROW(Signal::pulse_train(1.0, 1.0, -1.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Signal::step_switch(-1.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Signal::sum({}), std::invalid_argument);
}
