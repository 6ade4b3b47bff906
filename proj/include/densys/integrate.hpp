#pragma once

// Barrier-aware adaptive integration.
//
// Dormand-Prince 5(4) with PI step-size control. The span [t0, t1] is split at
// every signal breakpoint. Any trial step whose stage evaluations hit a fault
// is rejected and retried with a shrunken step; once the step would fall below
// h_min while faults persist, the run ends with a BarrierStall event. The
// trajectory up to that point is the result.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "densys/system.hpp"
#include "densys/trajectory.hpp"

namespace densys {

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 1e-4;
  double h_min = 1e-12;
  double h_max = 0.1;
  std::size_t max_steps = 5'000'000;
  double barrier_shrink = 0.5;

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("integrator: rtol and atol must be > 0");
    if (!(h_min > 0.0 && h_min <= h_init && h_init <= h_max))
      throw std::invalid_argument("integrator: need 0 < h_min <= h_init <= h_max");
    if (!(barrier_shrink > 0.0 && barrier_shrink < 1.0))
      throw std::invalid_argument("integrator: barrier_shrink must lie in (0,1)");
    if (max_steps == 0) throw std::invalid_argument("integrator: max_steps must be > 0");
  }
};

/// Raised when integration cannot start (invalid configuration or a fault at
/// the initial condition).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace integrate_detail {

// Dormand-Prince 5(4) tableau.
inline constexpr std::array<double, 7> c = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Error weights: b - b_hat.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

inline std::string format_time(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  return buf;
}

}  // namespace integrate_detail

/// Integrates dx/dt = field(t, x) on [t0, t1]. `field` has the signature
/// Fault(double t, std::span<const double> x, std::span<double> dx).
/// `breakpoints` lists the discontinuity instants of the field; each one
/// inside (t0, t1) becomes a sample and a SignalSwitch event.
template <class Field>
Trajectory integrate_field(Field&& field, State x0, double t0, double t1, std::vector<double> breakpoints,
                           const IntegratorConfig& cfg) {
  using namespace integrate_detail;
  cfg.validate();
  if (!(t1 > t0)) throw IntegrationError("integrate: need t1 > t0");
  for (double v : x0)
    if (!std::isfinite(v)) throw IntegrationError("integrate: non-finite initial state");

  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  std::vector<double> knots{t0};
  for (double b : breakpoints)
    if (b > t0 && b < t1) knots.push_back(b);
  knots.push_back(t1);

  const std::size_t n = x0.size();
  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(x0);

  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(n, 0.0);
  std::vector<double> x = std::move(x0), xs(n), xnew(n);

  const Fault f0 = field(t0, std::span<const double>(x), std::span<double>(k[0]));
  if (f0 != Fault::None)
    throw IntegrationError("integrate: initial state is not admissible (" + std::string(to_string(f0)) + ")");

  double h = std::min(cfg.h_init, cfg.h_max);
  double err_prev = 1e-4;
  std::size_t attempts = 0;
  constexpr double kBeta = 0.04;
  constexpr double kAlpha = 0.2 - 0.75 * kBeta;

  for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
    const double a = knots[seg], b = knots[seg + 1];
    // Stage times are clamped inside the open segment next to a breakpoint so
    // a switching signal is always seen with its value on the current side.
    const double lo = seg > 0 ? std::nextafter(a, b) : a;
    const double hi = seg + 2 < knots.size() ? std::nextafter(b, a) : b;
    auto stage_time = [&](double tt) { return std::clamp(tt, lo, hi); };

    double t = a;
    if (seg > 0) {
      traj.events.push_back({a, EventKind::SignalSwitch, ""});
      const Fault f = field(stage_time(t), std::span<const double>(x), std::span<double>(k[0]));
      if (f != Fault::None) {
        traj.events.push_back({a, EventKind::DomainFault,
                               "state outside the domain after the switch (" + std::string(to_string(f)) + ")"});
        traj.terminated_reason = Termination::DomainFault;
        traj.detail = "domain fault at t=" + format_time(a);
        return traj;
      }
    }

    bool rejected_last = false;
    while (t < b) {
      if (++attempts > cfg.max_steps) {
        traj.events.push_back({t, EventKind::StepLimit, "max_steps=" + std::to_string(cfg.max_steps)});
        traj.terminated_reason = Termination::StepLimit;
        traj.detail = "step limit reached at t=" + format_time(t);
        return traj;
      }
      bool last = false;
      double step = std::min(h, cfg.h_max);
      if (t + step >= b || (b - (t + step)) < 1e-12 * std::max(1.0, std::abs(b))) {
        step = b - t;
        last = true;
      }

      auto eval = [&](std::size_t stage, double tt) {
        return field(stage_time(tt), std::span<const double>(xs), std::span<double>(k[stage]));
      };
      Fault fault = Fault::None;
      for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + step * a21 * k[0][i];
      fault = eval(1, t + c[1] * step);
      if (fault == Fault::None) {
        for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + step * (a31 * k[0][i] + a32 * k[1][i]);
        fault = eval(2, t + c[2] * step);
      }
      if (fault == Fault::None) {
        for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + step * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
        fault = eval(3, t + c[3] * step);
      }
      if (fault == Fault::None) {
        for (std::size_t i = 0; i < n; ++i)
          xs[i] = x[i] + step * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
        fault = eval(4, t + c[4] * step);
      }
      if (fault == Fault::None) {
        for (std::size_t i = 0; i < n; ++i)
          xs[i] = x[i] + step * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i]);
        fault = eval(5, last ? b : t + step);
      }
      bool finite = true;
      if (fault == Fault::None) {
        for (std::size_t i = 0; i < n; ++i) {
          xnew[i] = x[i] + step * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] + b6 * k[5][i]);
          finite = finite && std::isfinite(xnew[i]);
        }
        if (finite) {
          std::copy(xnew.begin(), xnew.end(), xs.begin());
          fault = eval(6, last ? b : t + step);
        } else {
          fault = Fault::Divergent;
        }
      }

      if (fault != Fault::None) {
        h = step * cfg.barrier_shrink;
        rejected_last = true;
        if (h < cfg.h_min) {
          traj.events.push_back({t, EventKind::BarrierStall, std::string(to_string(fault))});
          traj.terminated_reason = Termination::BarrierStall;
          traj.detail = "barrier stall at t=" + format_time(t);
          return traj;
        }
        continue;
      }

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = step * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                                 e7 * k[6][i]);
        const double sc = cfg.atol + cfg.rtol * std::max(std::abs(x[i]), std::abs(xnew[i]));
        err = std::max(err, std::abs(e) / sc);
      }

      if (err > 1.0 && step <= cfg.h_min && !last) {
        traj.events.push_back({t, EventKind::BarrierStall, "local error not controllable at h_min"});
        traj.terminated_reason = Termination::BarrierStall;
        traj.detail = "barrier stall at t=" + format_time(t);
        return traj;
      }
      if (err <= 1.0 || (last && step <= cfg.h_min)) {
        double fac = err == 0.0 ? 10.0 : 0.9 * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
        fac = std::clamp(fac, 0.2, 10.0);
        if (rejected_last) fac = std::min(fac, 1.0);
        err_prev = std::max(err, 1e-4);
        t = last ? b : t + step;
        x.swap(xnew);
        std::swap(k[0], k[6]);
        traj.times.push_back(t);
        traj.states.push_back(x);
        rejected_last = false;
        if (!last) h = std::max(step * fac, cfg.h_min);
      } else {
        double fac = std::max(0.2, 0.9 * std::pow(err, -kAlpha));
        h = std::max(step * fac, cfg.h_min);
        rejected_last = true;
      }
    }
  }
  traj.terminated_reason = Termination::Completed;
  return traj;
}

/// Integrates a density system from x0 over [t0, t1].
inline Trajectory integrate(const DensitySystem& sys, State x0, double t0, double t1,
                            const IntegratorConfig& cfg = {}) {
  if (static_cast<int>(x0.size()) != sys.dim())
    throw IntegrationError("integrate: initial state has wrong dimension");
  auto field = [&sys](double t, std::span<const double> x, std::span<double> dx) { return sys.rhs_into(x, t, dx); };
  return integrate_field(field, std::move(x0), t0, t1, sys.breakpoints(t0, t1), cfg);
}

/// One independent trajectory per seed, in seed order. A seed that cannot be
/// integrated yields an empty trajectory with InvalidInitialState.
inline std::vector<Trajectory> sweep(const DensitySystem& sys, const std::vector<State>& seeds, double t0, double t1,
                                     const IntegratorConfig& cfg = {}, unsigned jobs = 1) {
  std::vector<Trajectory> out(seeds.size());
  auto run_one = [&](std::size_t i) {
    try {
      out[i] = integrate(sys, seeds[i], t0, t1, cfg);
    } catch (const IntegrationError& e) {
      out[i] = Trajectory{};
      out[i].terminated_reason = Termination::InvalidInitialState;
      out[i].detail = e.what();
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
    return out;
  }
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < seeds.size(); i += jobs) run_one(i);
    });
  }
  for (auto& th : workers) th.join();
  return out;
}

}  // namespace densys
