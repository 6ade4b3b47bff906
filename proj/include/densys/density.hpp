#pragma once

// Catalog of density functions rho(x, t) with guarded evaluation.
//
// Evaluation never produces NaN or infinity. A point is either Finite, a
// one-sided infinite limit (Divergent, with its sign), or OutOfDomain where
// the formula has no real value.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "densys/signal.hpp"

namespace densys {

/// Tolerance used when a density value is compared against zero.
inline constexpr double kDefaultEqTolerance = 1e-9;

class DensityValue {
 public:
  enum class Kind { Finite, OutOfDomain, Divergent };

  static DensityValue finite(double v) {
    if (std::isnan(v)) return out_of_domain();
    if (std::isinf(v)) return divergent(v > 0 ? 1 : -1);
    return DensityValue(Kind::Finite, v, 0);
  }
  static DensityValue out_of_domain() { return DensityValue(Kind::OutOfDomain, 0.0, 0); }
  static DensityValue divergent(int sign) { return DensityValue(Kind::Divergent, 0.0, sign >= 0 ? 1 : -1); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_divergent() const { return kind_ == Kind::Divergent; }
  bool is_out_of_domain() const { return kind_ == Kind::OutOfDomain; }
  /// Finite value; only meaningful when is_finite().
  double value() const { return value_; }
  /// Direction of divergence (+1 or -1); only meaningful when is_divergent().
  int sign() const { return sign_; }

  friend bool operator==(const DensityValue&, const DensityValue&) = default;

 private:
  DensityValue(Kind k, double v, int s) : kind_(k), value_(v), sign_(s) {}
  Kind kind_;
  double value_;
  int sign_;
};

/// Sign classification of a density at a point.
enum class DensitySign { Negative = -1, Zero = 0, Positive = 1, Undefined = 2 };

namespace density_detail {

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// ln(num/den) scaled by `scale`, guarded for num, den >= 0. A zero numerator
/// drives the log to -inf, a zero denominator to +inf.
inline DensityValue scaled_log_ratio(double scale, double num, double den) {
  if (num < 0.0 || den < 0.0 || (num == 0.0 && den == 0.0) || std::isnan(num) || std::isnan(den))
    return DensityValue::out_of_domain();
  if (num == 0.0) return DensityValue::divergent(scale > 0 ? -1 : 1);
  if (den == 0.0) return DensityValue::divergent(scale > 0 ? 1 : -1);
  return DensityValue::finite(scale * (std::log(num) - std::log(den)));
}

/// scale * ln(arg), guarded.
inline DensityValue scaled_log(double scale, double arg) {
  if (arg < 0.0 || std::isnan(arg)) return DensityValue::out_of_domain();
  if (arg == 0.0) return DensityValue::divergent(scale > 0 ? -1 : 1);
  return DensityValue::finite(scale * std::log(arg));
}

inline double beta_norm(std::span<const double> x, double beta) {
  return std::pow(std::abs(x[0]), beta) + std::pow(std::abs(x[1]), beta);
}

inline double radius_sq(std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }

}  // namespace density_detail

class DensityFn;

namespace density_kinds {

/// alpha
struct Constant {
  double alpha;
};
/// alpha / (w(t) - |x|)
struct Barrier {
  double alpha;
  Signal w;
};
/// alpha * (x - w(t)) * sign(x)
struct TrackSign {
  double alpha;
  Signal w;
};
/// -alpha * ln((upper - x) / (x - lower))
struct LogRatioTube {
  double alpha;
  Signal upper;
  Signal lower;
};
/// alpha * ln(x - g(t))
struct LogShift {
  double alpha;
  Signal g;
};
/// alpha * (x - w(t))
struct Linear {
  double alpha;
  Signal w;
};
/// w(t) * sign(x - w(t))
struct WeightedSign {
  Signal w;
};
/// -alpha * (x - y_m(t))
struct NegLinear {
  double alpha;
  Signal y_m;
};
/// alpha * ln((g - x) / (g + x))
struct SymLogTube {
  double alpha;
  Signal g;
};
/// -alpha * ln(x - g(t))
struct NegLogShift {
  double alpha;
  Signal g;
};
/// -ln((upper - s) / (s - lower)),  s = |x1|^beta + |x2|^beta
struct PlanarLogRatio {
  double beta;
  Signal upper;
  Signal lower;
};
/// alpha * ln(|x1|^beta + |x2|^beta - 1)
struct PlanarLogShift {
  double alpha;
  double beta;
};
/// c0 + c1 * x1^2 + c2 * (x1^2 + x2^2)
struct PolyDisc {
  double c0;
  double c1;
  double c2;
};
/// sign * exp((x1^2 + x2^2 - 1)^(-q))
struct ExpHole {
  int sign;
  double q;
};
/// sign * ln(x1^2 + x2^2 - 1)
struct LogDisc {
  int sign;
};
struct Zero {};
/// -inner(x, t); flips the sign convention of any catalog entry.
struct Negated {
  std::shared_ptr<const DensityFn> inner;
};

}  // namespace density_kinds

/// A density function from the catalog, bound to a state dimension (1 or 2).
class DensityFn {
 public:
  using Variant =
      std::variant<density_kinds::Constant, density_kinds::Barrier, density_kinds::TrackSign,
                   density_kinds::LogRatioTube, density_kinds::LogShift, density_kinds::Linear,
                   density_kinds::WeightedSign, density_kinds::NegLinear, density_kinds::SymLogTube,
                   density_kinds::NegLogShift, density_kinds::PlanarLogRatio,
                   density_kinds::PlanarLogShift, density_kinds::PolyDisc, density_kinds::ExpHole,
                   density_kinds::LogDisc, density_kinds::Zero, density_kinds::Negated>;

  static DensityFn constant(double alpha, int dim = 1) {
    return DensityFn(density_kinds::Constant{alpha}, check_dim(dim));
  }
  static DensityFn barrier(double alpha, Signal w) {
    return DensityFn(density_kinds::Barrier{positive(alpha, "alpha"), std::move(w)}, 1);
  }
  static DensityFn track_sign(double alpha, Signal w) {
    return DensityFn(density_kinds::TrackSign{positive(alpha, "alpha"), std::move(w)}, 1);
  }
  static DensityFn log_ratio_tube(double alpha, Signal upper, Signal lower) {
    return DensityFn(density_kinds::LogRatioTube{positive(alpha, "alpha"), std::move(upper), std::move(lower)}, 1);
  }
  static DensityFn log_shift(double alpha, Signal g) {
    return DensityFn(density_kinds::LogShift{positive(alpha, "alpha"), std::move(g)}, 1);
  }
  static DensityFn linear(double alpha, Signal w) {
    return DensityFn(density_kinds::Linear{positive(alpha, "alpha"), std::move(w)}, 1);
  }
  static DensityFn weighted_sign(Signal w) { return DensityFn(density_kinds::WeightedSign{std::move(w)}, 1); }
  static DensityFn neg_linear(double alpha, Signal y_m) {
    return DensityFn(density_kinds::NegLinear{positive(alpha, "alpha"), std::move(y_m)}, 1);
  }
  static DensityFn sym_log_tube(double alpha, Signal g) {
    return DensityFn(density_kinds::SymLogTube{positive(alpha, "alpha"), std::move(g)}, 1);
  }
  static DensityFn neg_log_shift(double alpha, Signal g) {
    return DensityFn(density_kinds::NegLogShift{positive(alpha, "alpha"), std::move(g)}, 1);
  }
  static DensityFn planar_log_ratio(double beta, Signal upper, Signal lower) {
    return DensityFn(density_kinds::PlanarLogRatio{positive(beta, "beta"), std::move(upper), std::move(lower)}, 2);
  }
  static DensityFn planar_log_shift(double alpha, double beta) {
    return DensityFn(density_kinds::PlanarLogShift{positive(alpha, "alpha"), positive(beta, "beta")}, 2);
  }
  static DensityFn poly_disc(double c0, double c1, double c2) {
    return DensityFn(density_kinds::PolyDisc{c0, c1, c2}, 2);
  }
  static DensityFn exp_hole(int sign, double q = 0.98) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("exp_hole: sign must be +1 or -1");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("exp_hole: q must lie in (0,1)");
    return DensityFn(density_kinds::ExpHole{sign, q}, 2);
  }
  static DensityFn log_disc(int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("log_disc: sign must be +1 or -1");
    return DensityFn(density_kinds::LogDisc{sign}, 2);
  }
  static DensityFn zero(int dim = 1) { return DensityFn(density_kinds::Zero{}, check_dim(dim)); }
  static DensityFn negated(DensityFn inner) {
    const int d = inner.dim();
    return DensityFn(density_kinds::Negated{std::make_shared<const DensityFn>(std::move(inner))}, d);
  }

  int dim() const { return dim_; }
  const Variant& kind() const { return kind_; }

  /// Guarded evaluation. x.size() must equal dim().
  DensityValue eval(std::span<const double> x, double t) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::logic_error("density evaluated with state of dimension " + std::to_string(x.size()) +
                             ", expected " + std::to_string(dim_));
    return std::visit([&](const auto& k) { return eval_kind(k, x, t); }, kind_);
  }

  /// Discontinuity instants of every signal the density depends on, in (t0, t1).
  std::vector<double> breakpoints(double t0, double t1) const {
    std::vector<double> out;
    collect_breakpoints(t0, t1, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void collect_breakpoints(double t0, double t1, std::vector<double>& out) const {
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, density_kinds::Negated>) {
            k.inner->collect_breakpoints(t0, t1, out);
          } else {
            for_each_signal(k, [&](const Signal& s) { s.collect(t0, t1, out); });
          }
        },
        kind_);
  }

 private:
  DensityFn(Variant k, int dim) : kind_(std::move(k)), dim_(dim) {}

  static int check_dim(int dim) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("density dimension must be 1 or 2");
    return dim;
  }
  static double positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
    return v;
  }

  template <class K, class F>
  static void for_each_signal(const K& k, F&& f) {
    if constexpr (requires { k.w; }) f(k.w);
    if constexpr (requires { k.g; }) f(k.g);
    if constexpr (requires { k.y_m; }) f(k.y_m);
    if constexpr (requires { k.upper; }) {
      f(k.upper);
      f(k.lower);
    }
  }

  using X = std::span<const double>;
  static DensityValue eval_kind(const density_kinds::Constant& k, X, double) {
    return DensityValue::finite(k.alpha);
  }
  static DensityValue eval_kind(const density_kinds::Barrier& k, X x, double t) {
    const double gap = k.w(t) - std::abs(x[0]);
    if (gap < 0.0 || std::isnan(gap)) return DensityValue::out_of_domain();
    if (gap == 0.0) return DensityValue::divergent(1);
    return DensityValue::finite(k.alpha / gap);
  }
  static DensityValue eval_kind(const density_kinds::TrackSign& k, X x, double t) {
    return DensityValue::finite(k.alpha * (x[0] - k.w(t)) * density_detail::sgn(x[0]));
  }
  static DensityValue eval_kind(const density_kinds::LogRatioTube& k, X x, double t) {
    return density_detail::scaled_log_ratio(-k.alpha, k.upper(t) - x[0], x[0] - k.lower(t));
  }
  static DensityValue eval_kind(const density_kinds::LogShift& k, X x, double t) {
    return density_detail::scaled_log(k.alpha, x[0] - k.g(t));
  }
  static DensityValue eval_kind(const density_kinds::Linear& k, X x, double t) {
    return DensityValue::finite(k.alpha * (x[0] - k.w(t)));
  }
  static DensityValue eval_kind(const density_kinds::WeightedSign& k, X x, double t) {
    const double w = k.w(t);
    return DensityValue::finite(w * density_detail::sgn(x[0] - w));
  }
  static DensityValue eval_kind(const density_kinds::NegLinear& k, X x, double t) {
    return DensityValue::finite(-k.alpha * (x[0] - k.y_m(t)));
  }
  static DensityValue eval_kind(const density_kinds::SymLogTube& k, X x, double t) {
    const double g = k.g(t);
    return density_detail::scaled_log_ratio(k.alpha, g - x[0], g + x[0]);
  }
  static DensityValue eval_kind(const density_kinds::NegLogShift& k, X x, double t) {
    return density_detail::scaled_log(-k.alpha, x[0] - k.g(t));
  }
  static DensityValue eval_kind(const density_kinds::PlanarLogRatio& k, X x, double t) {
    const double s = density_detail::beta_norm(x, k.beta);
    return density_detail::scaled_log_ratio(-1.0, k.upper(t) - s, s - k.lower(t));
  }
  static DensityValue eval_kind(const density_kinds::PlanarLogShift& k, X x, double) {
    return density_detail::scaled_log(k.alpha, density_detail::beta_norm(x, k.beta) - 1.0);
  }
  static DensityValue eval_kind(const density_kinds::PolyDisc& k, X x, double) {
    const double x1sq = x[0] * x[0];
    return DensityValue::finite(k.c0 + k.c1 * x1sq + k.c2 * (x1sq + x[1] * x[1]));
  }
  static DensityValue eval_kind(const density_kinds::ExpHole& k, X x, double) {
    const double a = density_detail::radius_sq(x) - 1.0;
    if (a < 0.0) return DensityValue::out_of_domain();
    if (a == 0.0) return DensityValue::divergent(k.sign);
    return DensityValue::finite(k.sign * std::exp(std::pow(a, -k.q)));
  }
  static DensityValue eval_kind(const density_kinds::LogDisc& k, X x, double) {
    return density_detail::scaled_log(static_cast<double>(k.sign), density_detail::radius_sq(x) - 1.0);
  }
  static DensityValue eval_kind(const density_kinds::Zero&, X, double) { return DensityValue::finite(0.0); }
  static DensityValue eval_kind(const density_kinds::Negated& k, X x, double t) {
    const DensityValue v = k.inner->eval(x, t);
    if (v.is_finite()) return DensityValue::finite(-v.value());
    if (v.is_divergent()) return DensityValue::divergent(-v.sign());
    return v;
  }

  Variant kind_;
  int dim_;
};

/// Convenience overload for scalar densities.
inline DensityValue eval_density(const DensityFn& d, std::span<const double> x, double t) { return d.eval(x, t); }

inline DensityValue eval_density(const DensityFn& d, double x, double t) {
  const double buf[1] = {x};
  return d.eval(buf, t);
}

inline DensitySign density_sign(const DensityFn& d, std::span<const double> x, double t,
                                double eps = kDefaultEqTolerance) {
  const DensityValue v = d.eval(x, t);
  switch (v.kind()) {
    case DensityValue::Kind::Finite:
      if (std::abs(v.value()) <= eps) return DensitySign::Zero;
      return v.value() > 0 ? DensitySign::Positive : DensitySign::Negative;
    case DensityValue::Kind::Divergent:
      return v.sign() > 0 ? DensitySign::Positive : DensitySign::Negative;
    case DensityValue::Kind::OutOfDomain:
      break;
  }
  return DensitySign::Undefined;
}

inline DensitySign density_sign(const DensityFn& d, double x, double t, double eps = kDefaultEqTolerance) {
  const double buf[1] = {x};
  return density_sign(d, buf, t, eps);
}

}  // namespace densys
