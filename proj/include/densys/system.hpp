#pragma once

// Density systems, the quadratic function V = x'x / 2, and the sign-of-Vdot
// region classification.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "densys/density.hpp"
#include "densys/trajectory.hpp"

namespace densys {

/// Right-hand side callback of a general system: writes f(x, t) into dx.
using VectorFieldFn = std::function<Fault(double t, std::span<const double> x, std::span<double> dx)>;

namespace systems {

/// dx/dt = -rho(x, t) x
struct Scalar {
  DensityFn rho;
};
/// Same dynamics restricted to x > 0.
struct ScalarPositive {
  DensityFn rho;
};
/// dx1/dt = x2 - rho1 x1,  dx2/dt = -x1 - rho2 x2
struct Planar {
  DensityFn rho1;
  DensityFn rho2;
};
struct General {
  VectorFieldFn f;
  int dim;
  std::vector<double> breakpoints;
};

}  // namespace systems

class DensitySystem {
 public:
  using Variant = std::variant<systems::Scalar, systems::ScalarPositive, systems::Planar, systems::General>;

  static DensitySystem scalar(DensityFn rho) {
    require_dim(rho, 1, "scalar");
    return DensitySystem(systems::Scalar{std::move(rho)});
  }
  static DensitySystem scalar_positive(DensityFn rho) {
    require_dim(rho, 1, "scalar_positive");
    return DensitySystem(systems::ScalarPositive{std::move(rho)});
  }
  static DensitySystem planar(DensityFn rho1, DensityFn rho2) {
    require_dim(rho1, 2, "planar");
    require_dim(rho2, 2, "planar");
    return DensitySystem(systems::Planar{std::move(rho1), std::move(rho2)});
  }
  static DensitySystem general(VectorFieldFn f, int dim, std::vector<double> breakpoints = {}) {
    if (dim < 1) throw std::invalid_argument("general system needs dim >= 1");
    std::sort(breakpoints.begin(), breakpoints.end());
    return DensitySystem(systems::General{std::move(f), dim, std::move(breakpoints)});
  }

  const Variant& kind() const { return kind_; }

  int dim() const {
    return std::visit(
        [](const auto& s) -> int {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, systems::Planar>) return 2;
          else if constexpr (std::is_same_v<S, systems::General>) return s.dim;
          else return 1;
        },
        kind_);
  }

  /// Densities driving the system (empty for General).
  std::vector<const DensityFn*> densities() const {
    return std::visit(
        [](const auto& s) -> std::vector<const DensityFn*> {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, systems::Planar>) return {&s.rho1, &s.rho2};
          else if constexpr (std::is_same_v<S, systems::General>) return {};
          else return {&s.rho};
        },
        kind_);
  }

  /// Every signal discontinuity the right-hand side depends on, in (t0, t1).
  std::vector<double> breakpoints(double t0, double t1) const {
    std::vector<double> out;
    if (const auto* g = std::get_if<systems::General>(&kind_)) {
      for (double b : g->breakpoints)
        if (b > t0 && b < t1) out.push_back(b);
      return out;
    }
    for (const DensityFn* d : densities()) d->collect_breakpoints(t0, t1, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Writes f(x, t) into dx; returns the dominating fault if any density is
  /// not finite (dx is then unspecified).
  Fault rhs_into(std::span<const double> x, double t, std::span<double> dx) const {
    check_dim(x.size());
    return std::visit([&](const auto& s) { return rhs_kind(s, x, t, dx); }, kind_);
  }

 private:
  explicit DensitySystem(Variant v) : kind_(std::move(v)) {}

  static void require_dim(const DensityFn& d, int dim, const char* what) {
    if (d.dim() != dim)
      throw std::invalid_argument(std::string(what) + " system needs densities of dimension " + std::to_string(dim));
  }
  void check_dim(std::size_t n) const {
    if (static_cast<int>(n) != dim())
      throw std::logic_error("state dimension " + std::to_string(n) + " does not match system dimension " +
                             std::to_string(dim()));
  }

  static Fault fault_of(const DensityValue& v) {
    if (v.is_divergent()) return Fault::Divergent;
    if (v.is_out_of_domain()) return Fault::OutOfDomain;
    return Fault::None;
  }

  using X = std::span<const double>;
  using DX = std::span<double>;
  static Fault rhs_kind(const systems::Scalar& s, X x, double t, DX dx) {
    const DensityValue r = s.rho.eval(x, t);
    if (!r.is_finite()) return fault_of(r);
    dx[0] = -r.value() * x[0];
    return Fault::None;
  }
  static Fault rhs_kind(const systems::ScalarPositive& s, X x, double t, DX dx) {
    if (!(x[0] > 0.0)) return Fault::OutOfDomain;
    return rhs_kind(systems::Scalar{s.rho}, x, t, dx);
  }
  static Fault rhs_kind(const systems::Planar& s, X x, double t, DX dx) {
    const DensityValue r1 = s.rho1.eval(x, t);
    const DensityValue r2 = s.rho2.eval(x, t);
    const Fault f = worst(fault_of(r1), fault_of(r2));
    if (f != Fault::None) return f;
    dx[0] = x[1] - r1.value() * x[0];
    dx[1] = -x[0] - r2.value() * x[1];
    return Fault::None;
  }
  static Fault rhs_kind(const systems::General& s, X x, double t, DX dx) { return s.f(t, x, dx); }

  Variant kind_;
};

/// Result of a guarded evaluation: a value or the fault that prevented it.
template <class T>
struct Evaluated {
  T value{};
  Fault fault = Fault::None;
  bool ok() const { return fault == Fault::None; }
};

inline Evaluated<State> rhs(const DensitySystem& sys, std::span<const double> x, double t) {
  Evaluated<State> out;
  out.value.assign(x.size(), 0.0);
  out.fault = sys.rhs_into(x, t, out.value);
  if (!out.ok()) out.value.clear();
  return out;
}

/// V(x) = x'x / 2, the quadratic function shared by every example.
struct QuadraticV {
  int dim = 1;

  double operator()(std::span<const double> x) const {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return 0.5 * acc;
  }
  /// Gradient of V is x itself.
  double directional(std::span<const double> x, std::span<const double> f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * f[i];
    return acc;
  }
};

/// dV/dt = grad V . f(x, t)
inline Evaluated<double> vdot(const DensitySystem& sys, std::span<const double> x, double t) {
  const Evaluated<State> f = rhs(sys, x, t);
  if (!f.ok()) return {0.0, f.fault};
  return {QuadraticV{sys.dim()}.directional(x, f.value), Fault::None};
}

/// dV/dt as a guarded value. Unlike vdot(), a divergent density yields the
/// sign of the infinite limit for the catalog systems, where
/// dV/dt = -sum_i rho_i x_i^2.
inline DensityValue vdot_limit(const DensitySystem& sys, std::span<const double> x, double t) {
  if (const auto* g = std::get_if<systems::General>(&sys.kind())) {
    (void)g;
    const auto v = vdot(sys, x, t);
    if (v.ok()) return DensityValue::finite(v.value);
    return v.fault == Fault::Divergent ? DensityValue::divergent(0) : DensityValue::out_of_domain();
  }
  if (std::holds_alternative<systems::ScalarPositive>(sys.kind()) && !(x[0] > 0.0))
    return DensityValue::out_of_domain();
  const auto ds = sys.densities();
  std::vector<DensityValue> vals;
  vals.reserve(ds.size());
  for (const DensityFn* d : ds) vals.push_back(d->eval(x, t));
  for (const auto& v : vals)
    if (v.is_out_of_domain()) return DensityValue::out_of_domain();
  int div_sign = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i].is_divergent() && x[i] != 0.0) {
      const int s = -vals[i].sign();
      if (div_sign != 0 && div_sign != s) return DensityValue::out_of_domain();
      div_sign = s;
    }
  }
  if (div_sign != 0) return DensityValue::divergent(div_sign);
  for (const auto& v : vals)
    if (v.is_divergent()) return DensityValue::out_of_domain();  // divergent times a zero coordinate
  const auto v = vdot(sys, x, t);
  return DensityValue::finite(v.value);
}

enum class RegionClass { Stable, Unstable, EquilibriumBoundary, NoSolution, AbsStable, AbsUnstable };

/// CSV literal: S, U, EQ, NS, BH, WH.
inline std::string_view to_code(RegionClass c) {
  switch (c) {
    case RegionClass::Stable: return "S";
    case RegionClass::Unstable: return "U";
    case RegionClass::EquilibriumBoundary: return "EQ";
    case RegionClass::NoSolution: return "NS";
    case RegionClass::AbsStable: return "BH";
    case RegionClass::AbsUnstable: return "WH";
  }
  return "?";
}

/// Pointwise label from the sign of dV/dt. Points where any density is out of
/// its domain, or where the field itself diverges, carry no solutions.
inline RegionClass classify(const DensitySystem& sys, const QuadraticV& V, std::span<const double> x, double t,
                            double eps_eq = kDefaultEqTolerance) {
  (void)V;
  const auto v = vdot(sys, x, t);
  if (!v.ok()) return RegionClass::NoSolution;
  double norm_sq = 0.0;
  for (double xi : x) norm_sq += xi * xi;
  if (std::abs(v.value) <= eps_eq * (1.0 + norm_sq)) return RegionClass::EquilibriumBoundary;
  return v.value < 0.0 ? RegionClass::Stable : RegionClass::Unstable;
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct RegionCell {
  State x;
  RegionClass cls = RegionClass::NoSolution;
  double vdot = 0.0;  // NaN where undefined
};

struct RegionMapOptions {
  double eps_eq = kDefaultEqTolerance;
  /// The probe toward a solution-free cell must grow |dV/dt| by at least this
  /// factor over the neighbour's own value (or reach a divergent limit).
  double divergence_ratio = 2.0;
  int probe_levels = 12;
};

/// Row-major grid of labels: cell (i, j) sits at index i * n2 + j, where i
/// runs over x1 and j over x2. Scalar systems use n2 == 1.
struct RegionMap {
  std::vector<std::size_t> shape;
  std::vector<Interval> bounds;
  std::vector<RegionCell> cells;

  const RegionCell& at(std::size_t i, std::size_t j = 0) const { return cells[i * n2() + j]; }
  std::size_t n1() const { return shape[0]; }
  std::size_t n2() const { return shape.size() > 1 ? shape[1] : 1; }
};

namespace region_detail {

/// Along the segment from an admissible point toward a solution-free one,
/// locate the domain edge by bisection and check that |dV/dt| grows without
/// bound when approaching it. Returns the sign of dV/dt near the edge
/// (-1 stable, +1 unstable) or 0 when no divergence is detected.
inline int probe_divergence(const DensitySystem& sys, const State& inside, const State& outside, double t,
                            double own_vdot, const RegionMapOptions& opt) {
  auto admissible = [&](const State& x) { return vdot_limit(sys, x, t).is_finite(); };
  State a = inside, b = outside, m(inside.size());
  for (int it = 0; it < 60; ++it) {
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = 0.5 * (a[k] + b[k]);
    if (admissible(m)) a = m;
    else b = m;
  }
  // a is the last admissible point before the edge; walk toward it.
  double prev = std::abs(own_vdot);
  int sign = own_vdot < 0 ? -1 : (own_vdot > 0 ? 1 : 0);
  if (sign == 0) return 0;
  State p(inside.size());
  double frac = 1.0;
  double last = prev;
  for (int level = 1; level <= opt.probe_levels; ++level) {
    frac *= 0.1;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = a[k] + (inside[k] - a[k]) * frac;
    const DensityValue v = vdot_limit(sys, p, t);
    if (v.is_divergent()) return v.sign() == sign ? sign : 0;
    if (!v.is_finite()) break;
    const int s = v.value() < 0 ? -1 : (v.value() > 0 ? 1 : 0);
    if (s != sign) return 0;
    const double mag = std::abs(v.value());
    if (mag < last * (1.0 - 1e-12)) return 0;
    last = mag;
  }
  return last >= opt.divergence_ratio * prev ? sign : 0;
}

}  // namespace region_detail

/// Labels every grid node with classify(), then promotes each connected
/// solution-free component to AbsStable (AbsUnstable) when all of its
/// admissible neighbours are stable (unstable) and dV/dt diverges toward it.
inline RegionMap region_map(const DensitySystem& sys, const QuadraticV& V, const std::vector<Interval>& bounds,
                            const std::vector<std::size_t>& grid, double t, const RegionMapOptions& opt = {}) {
  const int dim = sys.dim();
  if (static_cast<int>(bounds.size()) != dim || static_cast<int>(grid.size()) != dim)
    throw std::invalid_argument("region_map: bounds and grid must match the system dimension");
  for (int d = 0; d < dim; ++d) {
    if (grid[d] < 2) throw std::invalid_argument("region_map: need at least 2 nodes per axis");
    if (!(bounds[d].hi > bounds[d].lo)) throw std::invalid_argument("region_map: degenerate bounds");
  }
  RegionMap map;
  map.shape = grid;
  map.bounds = bounds;
  const std::size_t n1 = grid[0];
  const std::size_t n2 = dim > 1 ? grid[1] : 1;
  auto node = [&](int d, std::size_t i) {
    return bounds[d].lo + (bounds[d].hi - bounds[d].lo) * static_cast<double>(i) / static_cast<double>(grid[d] - 1);
  };
  map.cells.resize(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      RegionCell& c = map.cells[i * n2 + j];
      c.x = dim > 1 ? State{node(0, i), node(1, j)} : State{node(0, i)};
      c.cls = classify(sys, V, c.x, t, opt.eps_eq);
      const auto v = vdot(sys, c.x, t);
      c.vdot = v.ok() ? v.value : std::nan("");
    }
  }

  // Connected components of solution-free nodes (4-neighbourhood).
  std::vector<int> comp(map.cells.size(), -1);
  auto neighbours = [&](std::size_t idx) {
    std::vector<std::size_t> out;
    const std::size_t i = idx / n2, j = idx % n2;
    if (i > 0) out.push_back(idx - n2);
    if (i + 1 < n1) out.push_back(idx + n2);
    if (n2 > 1) {
      if (j > 0) out.push_back(idx - 1);
      if (j + 1 < n2) out.push_back(idx + 1);
    }
    return out;
  };
  int n_comp = 0;
  for (std::size_t s = 0; s < map.cells.size(); ++s) {
    if (map.cells[s].cls != RegionClass::NoSolution || comp[s] >= 0) continue;
    std::vector<std::size_t> stack{s}, members;
    comp[s] = n_comp;
    int verdict = 0;  // 0 unknown, -1 stable, +1 unstable, 2 mixed/failed
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      members.push_back(cur);
      for (std::size_t nb : neighbours(cur)) {
        const RegionCell& nc = map.cells[nb];
        if (nc.cls == RegionClass::NoSolution) {
          if (comp[nb] < 0) {
            comp[nb] = n_comp;
            stack.push_back(nb);
          }
          continue;
        }
        if (nc.cls == RegionClass::EquilibriumBoundary || verdict == 2) continue;
        const int s_nb = region_detail::probe_divergence(sys, nc.x, map.cells[cur].x, t, nc.vdot, opt);
        if (s_nb == 0 || (verdict != 0 && verdict != s_nb)) verdict = 2;
        else verdict = s_nb;
      }
    }
    if (verdict == -1 || verdict == 1) {
      const RegionClass label = verdict == -1 ? RegionClass::AbsStable : RegionClass::AbsUnstable;
      for (std::size_t m : members) map.cells[m].cls = label;
    }
    ++n_comp;
  }
  return map;
}

// ---------------------------------------------------------------------------
// Attraction to the boundary between stable and unstable regions.

/// Scalar boundary x = w(t); distance |x - w(t)|.
struct PointBoundary {
  Signal w;
};

/// Planar level set |x1|^beta + |x2|^beta = c(t); distance estimated by one
/// Newton step, |s(x) - c| / |grad s|.
struct LevelSetBoundary {
  double beta = 1.0;
  Signal level;
};

using BoundaryDescriptor = std::variant<PointBoundary, LevelSetBoundary>;

enum class Verdict { Attracted, Repelled, Neutral };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Attracted: return "Attracted";
    case Verdict::Repelled: return "Repelled";
    case Verdict::Neutral: return "Neutral";
  }
  return "?";
}

struct AttractionReport {
  std::vector<double> times;
  std::vector<double> distance;
  Verdict verdict = Verdict::Neutral;
};

struct AttractionOptions {
  double window_fraction = 0.25;
  double slack = 1e-3;
};

inline double boundary_distance(const BoundaryDescriptor& b, std::span<const double> x, double t) {
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, PointBoundary>) {
          return std::abs(x[0] - d.w(t));
        } else {
          const double c = d.level(t);
          if (c < 0.0) throw std::invalid_argument("level-set boundary is empty (negative level)");
          double s = 0.0, g2 = 0.0;
          for (std::size_t k = 0; k < x.size(); ++k) {
            const double ax = std::abs(x[k]);
            s += std::pow(ax, d.beta);
            if (ax > 0.0) {
              const double gk = d.beta * std::pow(ax, d.beta - 1.0);
              g2 += gk * gk;
            }
          }
          const double gap = std::abs(s - c);
          if (g2 == 0.0 || !std::isfinite(g2)) return gap;
          return gap / std::sqrt(g2);
        }
      },
      b);
}

/// Distance series to a moving boundary and a verdict from the trend over the
/// final window of samples: Attracted when the distance is non-increasing
/// there (relative slack) and ends below where the window started, or when
/// the whole window stays within slack times the largest distance seen
/// (sliding motion chatters about the boundary instead of decreasing);
/// Repelled for the mirror condition; Neutral otherwise.
inline AttractionReport attraction_report(const Trajectory& traj, const BoundaryDescriptor& boundary,
                                          const AttractionOptions& opt = {}) {
  if (traj.empty()) throw std::invalid_argument("attraction_report: empty trajectory");
  AttractionReport rep;
  rep.times = traj.times;
  rep.distance.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    rep.distance.push_back(boundary_distance(boundary, traj.states[i], traj.times[i]));
  const std::size_t n = rep.distance.size();
  if (n < 4) return rep;
  const std::size_t start =
      std::min(n - 2, static_cast<std::size_t>(std::floor((1.0 - opt.window_fraction) * static_cast<double>(n))));
  const auto& d = rep.distance;
  double peak = 0.0;
  for (std::size_t i = start; i < n; ++i) peak = std::max(peak, d[i]);
  const double tol = opt.slack * peak;
  bool non_increasing = true, non_decreasing = true;
  for (std::size_t i = start; i + 1 < n; ++i) {
    if (d[i + 1] > d[i] + tol) non_increasing = false;
    if (d[i + 1] < d[i] - tol) non_decreasing = false;
  }
  const double first = d[start], last = d[n - 1];
  const double overall = *std::max_element(d.begin(), d.end());
  const bool converged = overall > 0.0 && peak <= opt.slack * overall;
  if ((non_increasing && (last < first || last <= tol)) || converged) rep.verdict = Verdict::Attracted;
  else if (non_decreasing && last > first + tol) rep.verdict = Verdict::Repelled;
  return rep;
}

}  // namespace densys
