#pragma once

// Open-set constraints checked along trajectories: |x| < w, lower < x < upper,
// x > g, and the planar band lower < |x1|^b + |x2|^b < upper.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "densys/signal.hpp"
#include "densys/trajectory.hpp"

namespace densys {

struct Constraint {
  enum class Kind { AbsBelow, Between, Above, Below, LevelBetween };

  Kind kind = Kind::AbsBelow;
  Signal lower;
  Signal upper;
  double beta = 1.0;
  /// State component the scalar kinds look at.
  std::size_t component = 0;

  static Constraint abs_below(Signal bound, std::size_t component = 0) {
    return {Kind::AbsBelow, Signal::constant(0.0), std::move(bound), 1.0, component};
  }
  static Constraint between(Signal lower, Signal upper, std::size_t component = 0) {
    return {Kind::Between, std::move(lower), std::move(upper), 1.0, component};
  }
  static Constraint above(Signal lower, std::size_t component = 0) {
    return {Kind::Above, std::move(lower), Signal::constant(0.0), 1.0, component};
  }
  static Constraint below(Signal upper, std::size_t component = 0) {
    return {Kind::Below, Signal::constant(0.0), std::move(upper), 1.0, component};
  }
  static Constraint level_between(double beta, Signal lower, Signal upper) {
    return {Kind::LevelBetween, std::move(lower), std::move(upper), beta, 0};
  }

  /// True when the state lies strictly inside the constraint set at time t.
  bool satisfied(std::span<const double> x, double t) const {
    switch (kind) {
      case Kind::AbsBelow: return std::abs(x[component]) < upper(t);
      case Kind::Between: return lower(t) < x[component] && x[component] < upper(t);
      case Kind::Above: return x[component] > lower(t);
      case Kind::Below: return x[component] < upper(t);
      case Kind::LevelBetween: {
        if (x.size() < 2) throw std::invalid_argument("level_between constraint needs a planar state");
        const double s = std::pow(std::abs(x[0]), beta) + std::pow(std::abs(x[1]), beta);
        return lower(t) < s && s < upper(t);
      }
    }
    return false;
  }
};

inline std::string_view to_string(Constraint::Kind k) {
  switch (k) {
    case Constraint::Kind::AbsBelow: return "abs_below";
    case Constraint::Kind::Between: return "between";
    case Constraint::Kind::Above: return "above";
    case Constraint::Kind::Below: return "below";
    case Constraint::Kind::LevelBetween: return "level_between";
  }
  return "?";
}

/// Number of samples violating the constraint.
inline std::size_t count_violations(const Constraint& c, const Trajectory& traj) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (!c.satisfied(traj.states[i], traj.times[i])) ++bad;
  return bad;
}

}  // namespace densys
