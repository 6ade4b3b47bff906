#pragma once

// JSON scenario files.
//
// Parsing is strict: unknown keys and unknown kinds are errors, and every
// message names the offending field by JSON pointer. Serialization is
// canonical (sorted keys, every field explicit), so parse -> serialize ->
// parse is idempotent.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "densys/adaptive.hpp"
#include "densys/constraint.hpp"
#include "densys/density.hpp"
#include "densys/integrate.hpp"
#include "densys/plant.hpp"
#include "densys/signal.hpp"
#include "densys/system.hpp"

namespace densys {

using json = nlohmann::json;

enum class ScenarioType { Density, Known, Adaptive };
enum class SystemKind { Scalar, ScalarPositive, Planar };

struct RegionMapSpec {
  std::vector<Interval> bounds;
  std::vector<std::size_t> grid;
  double t = 0.0;
};

struct KnownSpec {
  Polynomial Q;
  Polynomial R;
  double k = 1.0;
  DensityFn rho = DensityFn::constant(1.0);
  /// One run per entry; a single 0 gives the exact controller.
  std::vector<double> mu{0.0};
  double y0 = 1.0;
};

struct AdaptiveSpec {
  Polynomial Q;
  Polynomial R;
  double k = 1.0;
  Polynomial R_m;
  double gain = 0.1;
  DensityFn rho = DensityFn::zero();
  double y0 = 1.0;
  PlantInit init = PlantInit::Consistent;
  std::vector<NamedSignal> boundaries;
};

struct Scenario {
  std::string id;
  std::string description;
  std::string figure;
  ScenarioType type = ScenarioType::Density;

  SystemKind system = SystemKind::Scalar;
  std::vector<DensityFn> densities;
  std::vector<State> seeds;
  std::optional<RegionMapSpec> region_map;
  std::optional<BoundaryDescriptor> attraction;

  std::optional<KnownSpec> known;
  std::optional<AdaptiveSpec> adaptive;

  std::optional<Constraint> constraint;
  double t_start = 0.0;
  double t_end = 10.0;
  IntegratorConfig integrator;

  int dim() const { return system == SystemKind::Planar ? 2 : 1; }

  DensitySystem make_system() const {
    switch (system) {
      case SystemKind::Scalar: return DensitySystem::scalar(densities.at(0));
      case SystemKind::ScalarPositive: return DensitySystem::scalar_positive(densities.at(0));
      case SystemKind::Planar: return DensitySystem::planar(densities.at(0), densities.at(1));
    }
    throw std::logic_error("unknown system kind");
  }
};

namespace config_detail {

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string suggest(std::string_view word, const std::vector<std::string>& options) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& o : options) {
    const std::size_t d = edit_distance(word, o);
    if (d < best_d) {
      best_d = d;
      best = o;
    }
  }
  if (best.empty() || best_d > std::max<std::size_t>(2, word.size() / 2)) return "";
  return " (did you mean \"" + best + "\"?)";
}

inline std::string join_ptr(const std::string& base, const std::string& key) {
  std::string esc;
  for (char ch : key) {
    if (ch == '~') esc += "~0";
    else if (ch == '/') esc += "~1";
    else esc += ch;
  }
  return base + "/" + esc;
}

inline std::string where(const std::string& ptr) { return ptr.empty() ? "/" : ptr; }

/// Strict object reader: every key must be consumed or finish() throws.
class Obj {
 public:
  Obj(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) throw ConfigError(where(ptr_) + ": expected an object");
  }

  const std::string& ptr() const { return ptr_; }
  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at_ptr(const std::string& key) const { return join_ptr(ptr_, key); }

  const json& get(const std::string& key) {
    allowed_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(ptr_) + ": missing required field \"" + key + "\"");
    return j_.at(key);
  }
  const json* opt(const std::string& key) {
    allowed_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  void allow(const std::string& key) { allowed_.insert(key); }

  double number(const std::string& key) { return as_number(get(key), at_ptr(key)); }
  double number(const std::string& key, double def) {
    const json* v = opt(key);
    return v ? as_number(*v, at_ptr(key)) : def;
  }
  std::string string(const std::string& key) { return as_string(get(key), at_ptr(key)); }
  std::string string(const std::string& key, std::string def) {
    const json* v = opt(key);
    return v ? as_string(*v, at_ptr(key)) : def;
  }

  void finish() const {
    std::vector<std::string> options(allowed_.begin(), allowed_.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed_.count(it.key()))
        throw ConfigError(join_ptr(ptr_, it.key()) + ": unknown field \"" + it.key() + "\"" +
                          suggest(it.key(), options));
  }

  static double as_number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ConfigError(where(ptr) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(ptr) + ": number must be finite");
    return d;
  }
  static std::string as_string(const json& v, const std::string& ptr) {
    if (!v.is_string()) throw ConfigError(where(ptr) + ": expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string ptr_;
  std::set<std::string> allowed_;
};

template <class F>
auto guarded(const std::string& ptr, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where(ptr) + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(where(ptr) + ": " + e.what());
  }
}

inline std::string kind_of(Obj& o, const std::vector<std::string>& kinds, const char* what) {
  const std::string k = o.string("kind");
  if (std::find(kinds.begin(), kinds.end(), k) == kinds.end())
    throw ConfigError(o.at_ptr("kind") + ": unknown " + what + " kind \"" + k + "\"" + suggest(k, kinds));
  return k;
}

}  // namespace config_detail

// ---------------------------------------------------------------------------
// Signals

inline const std::vector<std::string>& signal_kinds() {
  static const std::vector<std::string> k = {"affine",   "constant",    "double_exp", "exp",
                                             "product",  "pulse_train", "sinusoid",   "step_switch",
                                             "sum"};
  return k;
}

/// A bare number is a constant signal.
inline Signal parse_signal(const json& j, const std::string& ptr) {
  using namespace config_detail;
  if (j.is_number()) return Signal::constant(Obj::as_number(j, ptr));
  Obj o(j, ptr);
  const std::string kind = kind_of(o, signal_kinds(), "signal");
  auto list = [&](const char* key) {
    const json& arr = o.get(key);
    const std::string p = o.at_ptr(key);
    if (!arr.is_array() || arr.empty()) throw ConfigError(p + ": expected a non-empty array of signals");
    std::vector<Signal> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_signal(arr[i], p + "/" + std::to_string(i)));
    return out;
  };
  Signal s = guarded(ptr, [&]() -> Signal {
    if (kind == "constant") return Signal::constant(o.number("value"));
    if (kind == "exp") return Signal::exp(o.number("a"), o.number("b"));
    if (kind == "double_exp") return Signal::double_exp();
    if (kind == "sinusoid")
      return Signal::sinusoid(o.number("amplitude"), o.number("omega"), o.number("phase", 0.0));
    if (kind == "step_switch") {
      const std::string at = o.string("at_switch", "before");
      if (at != "before" && at != "after")
        throw ConfigError(o.at_ptr("at_switch") + ": expected \"before\" or \"after\"");
      return Signal::step_switch(o.number("t_switch"), o.number("before"), o.number("after"),
                                 at == "before" ? AtSwitch::Before : AtSwitch::After);
    }
    if (kind == "pulse_train")
      return Signal::pulse_train(o.number("dwell"), o.number("high", 1.0), o.number("low", -1.0),
                                 o.number("phase", 0.0), o.number("duty", 0.5));
    if (kind == "sum") return Signal::sum(list("terms"));
    if (kind == "product") return Signal::product(list("factors"));
    // affine
    return parse_signal(o.get("of"), o.at_ptr("of")).affine(o.number("scale", 1.0), o.number("offset", 0.0));
  });
  o.finish();
  return s;
}

inline json to_json(const Signal& s) {
  using namespace signal_detail;
  return std::visit(
      [](const auto& n) -> json {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, ConstantNode>) {
          return n.value;
        } else if constexpr (std::is_same_v<N, ExpNode>) {
          return {{"kind", "exp"}, {"a", n.a}, {"b", n.b}};
        } else if constexpr (std::is_same_v<N, DoubleExpNode>) {
          return {{"kind", "double_exp"}};
        } else if constexpr (std::is_same_v<N, SinusoidNode>) {
          return {{"kind", "sinusoid"}, {"amplitude", n.amplitude}, {"omega", n.omega}, {"phase", n.phase}};
        } else if constexpr (std::is_same_v<N, StepSwitchNode>) {
          return {{"kind", "step_switch"},
                  {"t_switch", n.t_switch},
                  {"before", n.before},
                  {"after", n.after},
                  {"at_switch", n.at_switch == AtSwitch::Before ? "before" : "after"}};
        } else if constexpr (std::is_same_v<N, PulseTrainNode>) {
          return {{"kind", "pulse_train"}, {"dwell", n.dwell}, {"high", n.high},
                  {"low", n.low},          {"phase", n.phase}, {"duty", n.duty}};
        } else if constexpr (std::is_same_v<N, SumNode>) {
          json arr = json::array();
          for (const auto& t : n.terms) arr.push_back(to_json(t));
          return {{"kind", "sum"}, {"terms", arr}};
        } else if constexpr (std::is_same_v<N, ProductNode>) {
          json arr = json::array();
          for (const auto& t : n.factors) arr.push_back(to_json(t));
          return {{"kind", "product"}, {"factors", arr}};
        } else {
          return {{"kind", "affine"}, {"scale", n.scale}, {"offset", n.offset}, {"of", to_json(*n.inner)}};
        }
      },
      s.node());
}

// ---------------------------------------------------------------------------
// Densities

inline const std::vector<std::string>& density_kind_names() {
  static const std::vector<std::string> k = {
      "barrier",       "constant",    "exp_hole",         "linear",           "log_disc",   "log_ratio_tube",
      "log_shift",     "neg_linear",  "neg_log_shift",    "negated",          "planar_log_ratio",
      "planar_log_shift", "poly_disc", "sym_log_tube",    "track_sign",       "weighted_sign", "zero"};
  return k;
}

/// `dim` is the state dimension the density must act on.
inline DensityFn parse_density(const json& j, const std::string& ptr, int dim) {
  using namespace config_detail;
  Obj o(j, ptr);
  const std::string kind = kind_of(o, density_kind_names(), "density");
  auto sig = [&](const char* key) { return parse_signal(o.get(key), o.at_ptr(key)); };
  auto sign = [&]() {
    const double s = o.number("sign");
    if (s != 1.0 && s != -1.0) throw ConfigError(o.at_ptr("sign") + ": sign must be 1 or -1");
    return static_cast<int>(s);
  };
  DensityFn d = guarded(ptr, [&]() -> DensityFn {
    if (kind == "constant") return DensityFn::constant(o.number("alpha"), static_cast<int>(o.number("dim", dim)));
    if (kind == "zero") return DensityFn::zero(static_cast<int>(o.number("dim", dim)));
    if (kind == "barrier") return DensityFn::barrier(o.number("alpha"), sig("w"));
    if (kind == "track_sign") return DensityFn::track_sign(o.number("alpha"), sig("w"));
    if (kind == "log_ratio_tube") return DensityFn::log_ratio_tube(o.number("alpha"), sig("upper"), sig("lower"));
    if (kind == "log_shift") return DensityFn::log_shift(o.number("alpha"), sig("g"));
    if (kind == "linear") return DensityFn::linear(o.number("alpha"), sig("w"));
    if (kind == "weighted_sign") return DensityFn::weighted_sign(sig("w"));
    if (kind == "neg_linear") return DensityFn::neg_linear(o.number("alpha"), sig("y_m"));
    if (kind == "sym_log_tube") return DensityFn::sym_log_tube(o.number("alpha"), sig("g"));
    if (kind == "neg_log_shift") return DensityFn::neg_log_shift(o.number("alpha"), sig("g"));
    if (kind == "planar_log_ratio") return DensityFn::planar_log_ratio(o.number("beta"), sig("upper"), sig("lower"));
    if (kind == "planar_log_shift") return DensityFn::planar_log_shift(o.number("alpha"), o.number("beta"));
    if (kind == "poly_disc") return DensityFn::poly_disc(o.number("c0"), o.number("c1"), o.number("c2"));
    if (kind == "exp_hole") return DensityFn::exp_hole(sign(), o.number("q", 0.98));
    if (kind == "log_disc") return DensityFn::log_disc(sign());
    // negated
    return DensityFn::negated(parse_density(o.get("of"), o.at_ptr("of"), dim));
  });
  o.finish();
  if (d.dim() != dim)
    throw ConfigError(where(ptr) + ": density \"" + kind + "\" acts on dimension " + std::to_string(d.dim()) +
                      " but the system has dimension " + std::to_string(dim));
  return d;
}

inline json to_json(const DensityFn& d) {
  using namespace density_kinds;
  return std::visit(
      [&](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Constant>) return {{"kind", "constant"}, {"alpha", k.alpha}, {"dim", d.dim()}};
        else if constexpr (std::is_same_v<K, Zero>) return {{"kind", "zero"}, {"dim", d.dim()}};
        else if constexpr (std::is_same_v<K, Barrier>) return {{"kind", "barrier"}, {"alpha", k.alpha}, {"w", to_json(k.w)}};
        else if constexpr (std::is_same_v<K, TrackSign>)
          return {{"kind", "track_sign"}, {"alpha", k.alpha}, {"w", to_json(k.w)}};
        else if constexpr (std::is_same_v<K, LogRatioTube>)
          return {{"kind", "log_ratio_tube"}, {"alpha", k.alpha}, {"upper", to_json(k.upper)}, {"lower", to_json(k.lower)}};
        else if constexpr (std::is_same_v<K, LogShift>)
          return {{"kind", "log_shift"}, {"alpha", k.alpha}, {"g", to_json(k.g)}};
        else if constexpr (std::is_same_v<K, Linear>) return {{"kind", "linear"}, {"alpha", k.alpha}, {"w", to_json(k.w)}};
        else if constexpr (std::is_same_v<K, WeightedSign>) return {{"kind", "weighted_sign"}, {"w", to_json(k.w)}};
        else if constexpr (std::is_same_v<K, NegLinear>)
          return {{"kind", "neg_linear"}, {"alpha", k.alpha}, {"y_m", to_json(k.y_m)}};
        else if constexpr (std::is_same_v<K, SymLogTube>)
          return {{"kind", "sym_log_tube"}, {"alpha", k.alpha}, {"g", to_json(k.g)}};
        else if constexpr (std::is_same_v<K, NegLogShift>)
          return {{"kind", "neg_log_shift"}, {"alpha", k.alpha}, {"g", to_json(k.g)}};
        else if constexpr (std::is_same_v<K, PlanarLogRatio>)
          return {{"kind", "planar_log_ratio"}, {"beta", k.beta}, {"upper", to_json(k.upper)}, {"lower", to_json(k.lower)}};
        else if constexpr (std::is_same_v<K, PlanarLogShift>)
          return {{"kind", "planar_log_shift"}, {"alpha", k.alpha}, {"beta", k.beta}};
        else if constexpr (std::is_same_v<K, PolyDisc>)
          return {{"kind", "poly_disc"}, {"c0", k.c0}, {"c1", k.c1}, {"c2", k.c2}};
        else if constexpr (std::is_same_v<K, ExpHole>) return {{"kind", "exp_hole"}, {"sign", k.sign}, {"q", k.q}};
        else if constexpr (std::is_same_v<K, LogDisc>) return {{"kind", "log_disc"}, {"sign", k.sign}};
        else return {{"kind", "negated"}, {"of", to_json(*k.inner)}};
      },
      d.kind());
}

// ---------------------------------------------------------------------------
// Smaller pieces

inline Polynomial parse_polynomial(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.empty())
    throw ConfigError(config_detail::where(ptr) + ": expected a non-empty array of ascending coefficients");
  std::vector<double> c;
  for (std::size_t i = 0; i < j.size(); ++i)
    c.push_back(config_detail::Obj::as_number(j[i], ptr + "/" + std::to_string(i)));
  Polynomial p(std::move(c));
  if (p.is_zero()) throw ConfigError(config_detail::where(ptr) + ": polynomial must be nonzero");
  return p;
}

inline json to_json(const Polynomial& p) { return p.coeffs(); }

inline IntegratorConfig parse_integrator(const json& j, const std::string& ptr) {
  config_detail::Obj o(j, ptr);
  IntegratorConfig c;
  c.rtol = o.number("rtol", c.rtol);
  c.atol = o.number("atol", c.atol);
  c.h_init = o.number("h_init", c.h_init);
  c.h_min = o.number("h_min", c.h_min);
  c.h_max = o.number("h_max", c.h_max);
  const double ms = o.number("max_steps", static_cast<double>(c.max_steps));
  if (!(ms >= 1.0) || ms != std::floor(ms)) throw ConfigError(o.at_ptr("max_steps") + ": expected a positive integer");
  c.max_steps = static_cast<std::size_t>(ms);
  c.barrier_shrink = o.number("barrier_shrink", c.barrier_shrink);
  o.finish();
  config_detail::guarded(ptr, [&] {
    c.validate();
    return 0;
  });
  return c;
}

inline json to_json(const IntegratorConfig& c) {
  return {{"rtol", c.rtol},   {"atol", c.atol},   {"h_init", c.h_init},
          {"h_min", c.h_min}, {"h_max", c.h_max}, {"max_steps", c.max_steps},
          {"barrier_shrink", c.barrier_shrink}};
}

inline State parse_state(const json& j, const std::string& ptr, int dim) {
  State x;
  if (j.is_number()) x.push_back(config_detail::Obj::as_number(j, ptr));
  else if (j.is_array())
    for (std::size_t i = 0; i < j.size(); ++i) x.push_back(config_detail::Obj::as_number(j[i], ptr + "/" + std::to_string(i)));
  else throw ConfigError(config_detail::where(ptr) + ": expected a number or an array of numbers");
  if (static_cast<int>(x.size()) != dim)
    throw ConfigError(config_detail::where(ptr) + ": initial state has dimension " + std::to_string(x.size()) +
                      ", system has dimension " + std::to_string(dim));
  return x;
}

inline const std::vector<std::string>& constraint_kind_names() {
  static const std::vector<std::string> k = {"abs_below", "above", "below", "between", "level_between"};
  return k;
}

inline Constraint parse_constraint(const json& j, const std::string& ptr) {
  using namespace config_detail;
  Obj o(j, ptr);
  const std::string kind = kind_of(o, constraint_kind_names(), "constraint");
  auto sig = [&](const char* key) { return parse_signal(o.get(key), o.at_ptr(key)); };
  const auto comp = static_cast<std::size_t>(o.number("component", 0.0));
  Constraint c;
  if (kind == "abs_below") c = Constraint::abs_below(sig("upper"), comp);
  else if (kind == "between") c = Constraint::between(sig("lower"), sig("upper"), comp);
  else if (kind == "above") c = Constraint::above(sig("lower"), comp);
  else if (kind == "below") c = Constraint::below(sig("upper"), comp);
  else c = Constraint::level_between(o.number("beta"), sig("lower"), sig("upper"));
  o.finish();
  return c;
}

inline json to_json(const Constraint& c) {
  json j = {{"kind", std::string(to_string(c.kind))}};
  switch (c.kind) {
    case Constraint::Kind::AbsBelow:
    case Constraint::Kind::Below: j["upper"] = to_json(c.upper); break;
    case Constraint::Kind::Above: j["lower"] = to_json(c.lower); break;
    case Constraint::Kind::Between:
      j["lower"] = to_json(c.lower);
      j["upper"] = to_json(c.upper);
      break;
    case Constraint::Kind::LevelBetween:
      j["lower"] = to_json(c.lower);
      j["upper"] = to_json(c.upper);
      j["beta"] = c.beta;
      break;
  }
  if (c.kind != Constraint::Kind::LevelBetween) j["component"] = c.component;
  return j;
}

/// {"point": signal} or {"level_set": {"beta": b, "level": signal}}.
inline BoundaryDescriptor parse_boundary(const json& j, const std::string& ptr) {
  using namespace config_detail;
  Obj o(j, ptr);
  const json* p = o.opt("point");
  const json* l = o.opt("level_set");
  o.finish();
  if ((p == nullptr) == (l == nullptr)) throw ConfigError(where(ptr) + ": expected exactly one of \"point\", \"level_set\"");
  if (p) return PointBoundary{parse_signal(*p, o.at_ptr("point"))};
  Obj ls(*l, o.at_ptr("level_set"));
  LevelSetBoundary b{ls.number("beta"), parse_signal(ls.get("level"), ls.at_ptr("level"))};
  ls.finish();
  if (!(b.beta > 0.0)) throw ConfigError(ls.at_ptr("beta") + ": beta must be > 0");
  return b;
}

inline json to_json(const BoundaryDescriptor& b) {
  if (const auto* p = std::get_if<PointBoundary>(&b)) return {{"point", to_json(p->w)}};
  const auto& l = std::get<LevelSetBoundary>(b);
  return {{"level_set", {{"beta", l.beta}, {"level", to_json(l.level)}}}};
}

inline const char* to_config_name(PlantInit p) {
  switch (p) {
    case PlantInit::Consistent: return "consistent";
    case PlantInit::Rest: return "rest";
    case PlantInit::OutputRest: return "output_rest";
  }
  return "consistent";
}

// ---------------------------------------------------------------------------
// Scenario

namespace config_detail {

inline void parse_plant(Obj& o, Polynomial& Q, Polynomial& R, double& k) {
  Obj p(o.get("plant"), o.at_ptr("plant"));
  Q = parse_polynomial(p.get("Q"), p.at_ptr("Q"));
  R = parse_polynomial(p.get("R"), p.at_ptr("R"));
  k = p.number("k", 1.0);
  p.finish();
  guarded(p.ptr(), [&] { return LinearPlant(Q, R, k); });
}

inline void check_seeds(const Scenario& s, const std::string& ptr) {
  const DensitySystem sys = s.make_system();
  for (std::size_t i = 0; i < s.seeds.size(); ++i) {
    State dx(s.seeds[i].size());
    const Fault f = sys.rhs_into(s.seeds[i], s.t_start, dx);
    if (f != Fault::None)
      throw ConfigError(ptr + "/" + std::to_string(i) + ": initial state lies outside the open domain of the density (" +
                        std::string(to_string(f)) + ")");
  }
}

}  // namespace config_detail

/// Builds a Scenario from a parsed JSON document. Throws ConfigError.
inline Scenario scenario_from_json(const json& j) {
  using namespace config_detail;
  Obj o(j, "");
  Scenario s;
  s.id = o.string("id", "scenario");
  s.description = o.string("description", "");
  s.figure = o.string("figure", "");
  const std::string type = o.string("type", "density");
  if (type == "density") s.type = ScenarioType::Density;
  else if (type == "known") s.type = ScenarioType::Known;
  else if (type == "adaptive") s.type = ScenarioType::Adaptive;
  else throw ConfigError(o.at_ptr("type") + ": unknown scenario type \"" + type + "\"" +
                         suggest(type, {"density", "known", "adaptive"}));
  s.t_start = o.number("t_start", 0.0);
  s.t_end = o.number("t_end", 10.0);
  if (!(s.t_end > s.t_start)) throw ConfigError(o.at_ptr("t_end") + ": t_end must exceed t_start");
  if (const json* ij = o.opt("integrator")) s.integrator = parse_integrator(*ij, o.at_ptr("integrator"));
  if (const json* cj = o.opt("constraint")) s.constraint = parse_constraint(*cj, o.at_ptr("constraint"));

  if (s.type == ScenarioType::Density) {
    const std::string sysname = o.string("system", "scalar");
    if (sysname == "scalar") s.system = SystemKind::Scalar;
    else if (sysname == "scalar_positive") s.system = SystemKind::ScalarPositive;
    else if (sysname == "planar") s.system = SystemKind::Planar;
    else throw ConfigError(o.at_ptr("system") + ": unknown system \"" + sysname + "\"" +
                           suggest(sysname, {"scalar", "scalar_positive", "planar"}));
    const int dim = s.dim();
    const json* dj = o.opt("density");
    const json* dsj = o.opt("densities");
    if ((dj == nullptr) == (dsj == nullptr))
      throw ConfigError(where("") + ": expected exactly one of \"density\", \"densities\"");
    if (dj) {
      s.densities.push_back(parse_density(*dj, o.at_ptr("density"), dim));
      if (s.system == SystemKind::Planar) s.densities.push_back(s.densities.front());
    } else {
      const std::string p = o.at_ptr("densities");
      const std::size_t want = s.system == SystemKind::Planar ? 2 : 1;
      if (!dsj->is_array() || dsj->size() != want)
        throw ConfigError(p + ": expected an array of " + std::to_string(want) + " densities");
      for (std::size_t i = 0; i < want; ++i) s.densities.push_back(parse_density((*dsj)[i], p + "/" + std::to_string(i), dim));
    }
    const json* x0 = o.opt("x0");
    const json* sj = o.opt("seeds");
    if ((x0 == nullptr) == (sj == nullptr)) throw ConfigError(where("") + ": expected exactly one of \"x0\", \"seeds\"");
    const std::string seeds_ptr = o.at_ptr("seeds");
    if (x0) {
      s.seeds.push_back(parse_state(*x0, o.at_ptr("x0"), dim));
    } else {
      if (!sj->is_array() || sj->empty()) throw ConfigError(seeds_ptr + ": expected a non-empty array of states");
      for (std::size_t i = 0; i < sj->size(); ++i)
        s.seeds.push_back(parse_state((*sj)[i], seeds_ptr + "/" + std::to_string(i), dim));
    }
    if (x0) {
      const DensitySystem sys = s.make_system();
      State dx(s.seeds[0].size());
      const Fault f = sys.rhs_into(s.seeds[0], s.t_start, dx);
      if (f != Fault::None)
        throw ConfigError(o.at_ptr("x0") + ": initial state lies outside the open domain of the density (" +
                          std::string(to_string(f)) + ")");
    } else {
      check_seeds(s, seeds_ptr);
    }
    if (const json* rm = o.opt("region_map")) {
      Obj r(*rm, o.at_ptr("region_map"));
      RegionMapSpec spec;
      const json& b = r.get("bounds");
      const json& g = r.get("grid");
      if (!b.is_array() || b.size() != static_cast<std::size_t>(dim))
        throw ConfigError(r.at_ptr("bounds") + ": expected one [lo, hi] pair per state dimension");
      if (!g.is_array() || g.size() != static_cast<std::size_t>(dim))
        throw ConfigError(r.at_ptr("grid") + ": expected one node count per state dimension");
      for (std::size_t i = 0; i < b.size(); ++i) {
        const std::string p = r.at_ptr("bounds") + "/" + std::to_string(i);
        if (!b[i].is_array() || b[i].size() != 2) throw ConfigError(p + ": expected [lo, hi]");
        Interval iv{Obj::as_number(b[i][0], p + "/0"), Obj::as_number(b[i][1], p + "/1")};
        if (!(iv.hi > iv.lo)) throw ConfigError(p + ": need lo < hi");
        spec.bounds.push_back(iv);
        const double n = Obj::as_number(g[i], r.at_ptr("grid") + "/" + std::to_string(i));
        if (!(n >= 2.0) || n != std::floor(n))
          throw ConfigError(r.at_ptr("grid") + "/" + std::to_string(i) + ": expected an integer >= 2");
        spec.grid.push_back(static_cast<std::size_t>(n));
      }
      spec.t = r.number("t", 0.0);
      r.finish();
      s.region_map = spec;
    }
    if (const json* aj = o.opt("attraction")) {
      Obj a(*aj, o.at_ptr("attraction"));
      s.attraction = parse_boundary(a.get("boundary"), a.at_ptr("boundary"));
      a.finish();
      if (std::holds_alternative<LevelSetBoundary>(*s.attraction) && dim != 2)
        throw ConfigError(a.at_ptr("boundary") + ": level-set boundaries need a planar system");
    }
  } else if (s.type == ScenarioType::Known) {
    KnownSpec k;
    parse_plant(o, k.Q, k.R, k.k);
    k.rho = parse_density(o.get("density"), o.at_ptr("density"), 1);
    k.y0 = o.number("y0");
    if (const json* mj = o.opt("mu")) {
      k.mu.clear();
      if (mj->is_number()) k.mu.push_back(Obj::as_number(*mj, o.at_ptr("mu")));
      else if (mj->is_array() && !mj->empty())
        for (std::size_t i = 0; i < mj->size(); ++i)
          k.mu.push_back(Obj::as_number((*mj)[i], o.at_ptr("mu") + "/" + std::to_string(i)));
      else throw ConfigError(o.at_ptr("mu") + ": expected a number or a non-empty array");
      for (std::size_t i = 0; i < k.mu.size(); ++i)
        if (k.mu[i] < 0.0) throw ConfigError(o.at_ptr("mu") + ": mu must be >= 0");
    }
    const LinearPlant plant(k.Q, k.R, k.k);
    if (plant.relative_degree() > 1)
      for (double mu : k.mu)
        if (!(mu > 0.0)) throw ConfigError(o.at_ptr("mu") + ": relative degree > 1 needs mu > 0");
    if (!eval_density(k.rho, k.y0, s.t_start).is_finite())
      throw ConfigError(o.at_ptr("y0") + ": initial output lies outside the open domain of the density");
    s.known = std::move(k);
  } else {
    AdaptiveSpec a;
    parse_plant(o, a.Q, a.R, a.k);
    a.R_m = parse_polynomial(o.get("R_m"), o.at_ptr("R_m"));
    a.gain = o.number("gain", 0.1);
    a.rho = parse_density(o.get("density"), o.at_ptr("density"), 1);
    a.y0 = o.number("y0");
    const std::string init = o.string("plant_init", "consistent");
    if (init == "consistent") a.init = PlantInit::Consistent;
    else if (init == "rest") a.init = PlantInit::Rest;
    else if (init == "output_rest") a.init = PlantInit::OutputRest;
    else throw ConfigError(o.at_ptr("plant_init") + ": unknown plant_init \"" + init + "\"" +
                           suggest(init, {"consistent", "rest", "output_rest"}));
    if (const json* bj = o.opt("boundaries")) {
      const std::string p = o.at_ptr("boundaries");
      if (!bj->is_object()) throw ConfigError(p + ": expected an object of named signals");
      for (auto it = bj->begin(); it != bj->end(); ++it)
        a.boundaries.push_back({it.key(), parse_signal(it.value(), join_ptr(p, it.key()))});
    }
    guarded("", [&] {
      return AdaptiveLoop(LinearPlant(a.Q, a.R, a.k), AdaptiveDesign(a.R_m, a.gain, a.rho));
    });
    if (!eval_density(a.rho, a.y0, s.t_start).is_finite())
      throw ConfigError(o.at_ptr("y0") + ": initial output y0=" + json(a.y0).dump() +
                        " lies outside the open domain of the density");
    s.adaptive = std::move(a);
  }
  o.finish();
  return s;
}

/// Canonical JSON form; keys sorted by nlohmann's default ordering.
inline json scenario_to_json(const Scenario& s) {
  json j;
  j["id"] = s.id;
  j["description"] = s.description;
  j["figure"] = s.figure;
  j["t_start"] = s.t_start;
  j["t_end"] = s.t_end;
  j["integrator"] = to_json(s.integrator);
  if (s.constraint) j["constraint"] = to_json(*s.constraint);
  switch (s.type) {
    case ScenarioType::Density: {
      j["type"] = "density";
      j["system"] = s.system == SystemKind::Scalar ? "scalar" : s.system == SystemKind::ScalarPositive ? "scalar_positive" : "planar";
      json ds = json::array();
      for (const auto& d : s.densities) ds.push_back(to_json(d));
      j["densities"] = ds;
      json seeds = json::array();
      for (const auto& x : s.seeds) seeds.push_back(x);
      j["seeds"] = seeds;
      if (s.region_map) {
        json b = json::array();
        for (const auto& iv : s.region_map->bounds) b.push_back({iv.lo, iv.hi});
        j["region_map"] = {{"bounds", b}, {"grid", s.region_map->grid}, {"t", s.region_map->t}};
      }
      if (s.attraction) j["attraction"] = {{"boundary", to_json(*s.attraction)}};
      break;
    }
    case ScenarioType::Known: {
      const KnownSpec& k = *s.known;
      j["type"] = "known";
      j["plant"] = {{"Q", to_json(k.Q)}, {"R", to_json(k.R)}, {"k", k.k}};
      j["density"] = to_json(k.rho);
      j["mu"] = k.mu;
      j["y0"] = k.y0;
      break;
    }
    case ScenarioType::Adaptive: {
      const AdaptiveSpec& a = *s.adaptive;
      j["type"] = "adaptive";
      j["plant"] = {{"Q", to_json(a.Q)}, {"R", to_json(a.R)}, {"k", a.k}};
      j["R_m"] = to_json(a.R_m);
      j["gain"] = a.gain;
      j["density"] = to_json(a.rho);
      j["y0"] = a.y0;
      j["plant_init"] = to_config_name(a.init);
      json b = json::object();
      for (const auto& nb : a.boundaries) b[nb.name] = to_json(nb.signal);
      j["boundaries"] = b;
      break;
    }
  }
  return j;
}

/// Parses scenario text; syntax errors report line and column.
inline Scenario parse_scenario_text(const std::string& text, const std::string& source = "<config>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error: " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline Scenario parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

inline std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

}  // namespace densys
