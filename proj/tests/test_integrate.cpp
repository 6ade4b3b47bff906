#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "densys/integrate.hpp"
#include "densys/system.hpp"

using namespace densys;

namespace {

const Signal c(double v) { return Signal::constant(v); }

// Classical fixed-step RK4 for a scalar field, used as an independent oracle.
template <class F>
std::vector<double> rk4(F f, double x0, double t0, double t1, double h) {
  std::vector<double> xs{x0};
  double x = x0, t = t0;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / h));
  for (std::size_t i = 0; i < n; ++i) {
    const double k1 = f(t, x), k2 = f(t + h / 2, x + h / 2 * k1), k3 = f(t + h / 2, x + h / 2 * k2),
                 k4 = f(t + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
    xs.push_back(x);
  }
  return xs;
}

double interpolate(const std::vector<double>& grid, double t0, double h, double t) {
  const double u = (t - t0) / h;
  const auto i = std::min(static_cast<std::size_t>(u), grid.size() - 2);
  const double f = u - static_cast<double>(i);
  return grid[i] * (1 - f) + grid[i + 1] * f;
}

}  // namespace

TEST(Integrate, ExponentialDecay) {
  const Trajectory tr = integrate(DensitySystem::scalar(DensityFn::constant(1.0)), {1.0}, 0.0, 1.0);
  EXPECT_EQ(tr.terminated_reason, Termination::Completed);
  EXPECT_EQ(tr.times.back(), 1.0);
  EXPECT_NEAR(tr.states.back()[0], std::exp(-1.0), 1e-6);
}

TEST(Integrate, Rotation) {
  const auto osc = DensitySystem::planar(DensityFn::zero(2), DensityFn::zero(2));
  const Trajectory tr = integrate(osc, {1.0, 0.0}, 0.0, 2.0 * std::numbers::pi);
  EXPECT_NEAR(tr.states.back()[0], 1.0, 1e-5);
  EXPECT_NEAR(tr.states.back()[1], 0.0, 1e-5);
}

TEST(Integrate, BarrierAgainstRk4Oracle) {
  const auto sys = DensitySystem::scalar(DensityFn::barrier(1.0, c(2.0)));
  const Trajectory tr = integrate(sys, {1.9}, 0.0, 10.0);
  ASSERT_EQ(tr.terminated_reason, Termination::Completed);
  for (const auto& s : tr.states) EXPECT_LT(std::abs(s[0]), 2.0);
  EXPECT_LT(tr.states.back()[0], 0.1);
  const double h = 1e-5;
  const auto oracle = rk4([](double, double x) { return -x / (2.0 - std::abs(x)); }, 1.9, 0.0, 10.0, h);
  for (std::size_t i = 0; i < tr.size(); ++i)
    EXPECT_NEAR(tr.states[i][0], interpolate(oracle, 0.0, h, tr.times[i]), 1e-6) << tr.times[i];
}

TEST(Integrate, StepHalvingConvergence) {
  const auto sys = DensitySystem::scalar(DensityFn::constant(0.7));
  IntegratorConfig coarse, fine;
  coarse.rtol = 1e-6;
  coarse.atol = 1e-8;
  fine.rtol = coarse.rtol / 10;
  fine.atol = coarse.atol / 10;
  const double a = integrate(sys, {3.0}, 0.0, 5.0, coarse).states.back()[0];
  const double b = integrate(sys, {3.0}, 0.0, 5.0, fine).states.back()[0];
  EXPECT_LT(std::abs(a - b), 10 * (coarse.rtol * std::abs(b) + coarse.atol));
  EXPECT_NEAR(b, 3.0 * std::exp(-3.5), 1e-7);
}

TEST(Integrate, BarrierInvarianceRandomSeeds) {
  std::mt19937_64 rng(5);
  const Signal w = Signal::exp(4.0, -3.0).affine(1.0, 1.0) * Signal::step_switch(1.0, 1.0, 0.9);
  const Signal up = Signal::sinusoid(0.5, 2.0).affine(1.0, 4.0), lo = Signal::sinusoid(0.5, 2.0).affine(1.0, 2.0);
  const auto barrier = DensitySystem::scalar(DensityFn::barrier(1.0, w));
  const auto tube = DensitySystem::scalar(DensityFn::log_ratio_tube(1.0, up, lo));
  const auto sym = DensitySystem::scalar(DensityFn::sym_log_tube(1.0, w));
  std::uniform_real_distribution<double> u(-0.999, 0.999);
  for (int i = 0; i < 20; ++i) {
    const double r = u(rng);
    for (const auto& [sys, x0] : {std::pair{&barrier, 5.0 * r}, std::pair{&tube, 3.0 + r}, std::pair{&sym, 5.0 * r}}) {
      const Trajectory tr = integrate(*sys, {x0}, 0.0, 4.0);
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.times[k], x = tr.states[k][0];
        if (sys == &tube) {
          EXPECT_GT(x, lo(t));
          EXPECT_LT(x, up(t));
        } else {
          EXPECT_LT(std::abs(x), w(t)) << "t=" << t;
        }
      }
    }
  }
}

TEST(Integrate, EventCompleteness) {
  const Signal w = Signal::step_switch(1.0, 1.0, 2.0);
  const auto sys = DensitySystem::scalar(DensityFn::linear(1.0, w));
  const Trajectory tr = integrate(sys, {0.5}, 0.0, 2.0);
  ASSERT_EQ(tr.events.size(), 1u);
  EXPECT_EQ(tr.events[0].kind, EventKind::SignalSwitch);
  EXPECT_EQ(tr.events[0].time, 1.0);
  const auto it = std::find(tr.times.begin(), tr.times.end(), 1.0);
  ASSERT_NE(it, tr.times.end());
  const double x_switch = tr.states[static_cast<std::size_t>(it - tr.times.begin())][0];

  const Trajectory left = integrate(DensitySystem::scalar(DensityFn::linear(1.0, c(1.0))), {0.5}, 0.0, 1.0);
  EXPECT_NEAR(x_switch, left.states.back()[0], 1e-8);
  const Trajectory right = integrate(DensitySystem::scalar(DensityFn::linear(1.0, c(2.0))), {x_switch}, 1.0, 2.0);
  EXPECT_NEAR(tr.states.back()[0], right.states.back()[0], 1e-8);
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LT(tr.times[i - 1], tr.times[i]);
}

TEST(Integrate, DomainFaultAfterSwitch) {
  // The barrier shrinks from 2 to 0.5 at t = 1 while x is still near 1.
  const auto sys = DensitySystem::scalar(DensityFn::barrier(0.01, Signal::step_switch(1.0, 2.0, 0.5)));
  const Trajectory tr = integrate(sys, {1.0}, 0.0, 3.0);
  EXPECT_EQ(tr.terminated_reason, Termination::DomainFault);
  EXPECT_EQ(tr.times.back(), 1.0);
  ASSERT_FALSE(tr.events.empty());
  EXPECT_EQ(tr.events.back().kind, EventKind::DomainFault);
}

TEST(Integrate, BarrierStallIsGraceful) {
  // x' = x ln x drives x0 < 1 toward the edge x = 0, where rho diverges.
  const auto sys = DensitySystem::scalar_positive(DensityFn::neg_log_shift(1.0, c(0.0)));
  const Trajectory tr = integrate(sys, {0.5}, 0.0, 50.0);
  EXPECT_NE(tr.terminated_reason, Termination::InvalidInitialState);
  for (const auto& s : tr.states) EXPECT_GT(s[0], 0.0);
  if (tr.terminated_reason == Termination::BarrierStall) {
    ASSERT_FALSE(tr.events.empty());
    EXPECT_EQ(tr.events.back().kind, EventKind::BarrierStall);
  }
}

TEST(Integrate, StepLimitTruncates) {
  IntegratorConfig cfg;
  cfg.max_steps = 10;
  cfg.h_max = 0.01;
  cfg.h_init = 0.01;
  const Trajectory tr = integrate(DensitySystem::scalar(DensityFn::constant(1.0)), {1.0}, 0.0, 1.0, cfg);
  EXPECT_EQ(tr.terminated_reason, Termination::StepLimit);
  ASSERT_FALSE(tr.events.empty());
  EXPECT_EQ(tr.events.back().kind, EventKind::StepLimit);
  EXPECT_LT(tr.times.back(), 1.0);
}

TEST(Integrate, InvalidStartThrows) {
  const auto sys = DensitySystem::scalar(DensityFn::barrier(1.0, c(2.0)));
  EXPECT_THROW(integrate(sys, {2.0}, 0.0, 1.0), IntegrationError);
  EXPECT_THROW(integrate(sys, {0.0}, 1.0, 1.0), IntegrationError);
  EXPECT_THROW(integrate(sys, {0.0, 1.0}, 0.0, 1.0), IntegrationError);
  IntegratorConfig bad;
  bad.barrier_shrink = 1.5;
  EXPECT_THROW(integrate(sys, {0.0}, 0.0, 1.0, bad), std::invalid_argument);
}

TEST(Integrate, Determinism) {
  const auto sys = DensitySystem::planar(DensityFn::planar_log_ratio(1.0, c(3.0), c(2.0)),
                                         DensityFn::planar_log_ratio(1.0, c(3.0), c(2.0)));
  const Trajectory a = integrate(sys, {0.0, 2.9}, 0.0, 10.0);
  const Trajectory b = integrate(sys, {0.0, 2.9}, 0.0, 10.0);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.states, b.states);
  const auto swept = sweep(sys, {{0.0, 2.9}, {2.1, 0.0}, {0.0, 2.9}}, 0.0, 10.0, {}, 3);
  EXPECT_EQ(swept[0].states, a.states);
  EXPECT_EQ(swept[2].states, a.states);
}

TEST(Integrate, SweepAnnulus) {
  const DensityFn rho = DensityFn::planar_log_ratio(1.0, c(3.0), c(2.0));
  const auto sys = DensitySystem::planar(rho, rho);
  const auto trs = sweep(sys, {{0.0, 2.5}, {0.0, 2.95}, {2.05, 0.0}}, 0.0, 40.0);
  ASSERT_EQ(trs.size(), 3u);
  for (const auto& tr : trs) {
    double late = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double l1 = std::abs(tr.states[i][0]) + std::abs(tr.states[i][1]);
      EXPECT_GT(l1, 2.0);
      EXPECT_LT(l1, 3.0);
      if (tr.times[i] > 20.0) late = std::max(late, std::abs(l1 - 2.5));
    }
    // Rotation does not preserve the l1 level, so the flow settles to a
    // cycle about it rather than onto it.
    EXPECT_LT(late, 0.2);
  }
}

TEST(Integrate, EmptySweep) {
  EXPECT_TRUE(sweep(DensitySystem::scalar(DensityFn::constant(1.0)), {}, 0.0, 1.0).empty());
}

TEST(Integrate, BadSeedDoesNotAbortSweep) {
  const auto sys = DensitySystem::scalar(DensityFn::barrier(1.0, c(2.0)));
  const auto trs = sweep(sys, {{1.0}, {3.0}, {-1.0}}, 0.0, 1.0);
  ASSERT_EQ(trs.size(), 3u);
  EXPECT_EQ(trs[0].terminated_reason, Termination::Completed);
  EXPECT_EQ(trs[1].terminated_reason, Termination::InvalidInitialState);
  EXPECT_TRUE(trs[1].empty());
  EXPECT_EQ(trs[2].terminated_reason, Termination::Completed);
}

TEST(Integrate, NegativeLogDiscOutsideEquilibriumCircleGrows) {
  // rho = -ln(r^2 - 1) is negative for r^2 > 2.
  const DensityFn rho = DensityFn::log_disc(-1);
  const auto sys = DensitySystem::planar(rho, rho);
  const Trajectory tr = integrate(sys, {std::sqrt(1.5), std::sqrt(1.5)}, 0.0, 1.0);
  const QuadraticV V{2};
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_GT(vdot(sys, tr.states[i], tr.times[i]).value, 0.0);
    if (i > 0) { EXPECT_GE(V(tr.states[i]), V(tr.states[i - 1])); }
  }
}

TEST(Integrate, StiffBarrierStallsInsteadOfJumping) {
  // Near r = 1 the exponential hole is too stiff to resolve at h_min.
  const auto rho = DensityFn::exp_hole(1);
  const auto sys = DensitySystem::planar(rho, rho);
  const Trajectory tr = integrate(sys, {1.15, 0.0}, 0.0, 5.0);
  EXPECT_EQ(tr.terminated_reason, Termination::BarrierStall);
  for (std::size_t i = 1; i < tr.size(); ++i)
    EXPECT_LT(std::hypot(tr.states[i][0], tr.states[i][1]), std::hypot(tr.states[i - 1][0], tr.states[i - 1][1]));
  EXPECT_LE(std::hypot(tr.states.back()[0], tr.states.back()[1]), 1.05);
}
