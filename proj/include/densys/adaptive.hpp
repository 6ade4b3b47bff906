#pragma once

// Adaptive density control for relative-degree-one plants with unknown
// parameters:
//   filters      V_y' = F V_y + b y,   V_u' = F V_u + b u
//   regressor    w = (V_y, V_u, y)
//   control      u = c' w + rho(y, t)
//   adaptation   c' = -gain * y * w
// F is the Frobenius matrix of the designer's Hurwitz polynomial R_m.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "densys/constraint.hpp"
#include "densys/density.hpp"
#include "densys/integrate.hpp"
#include "densys/plant.hpp"
#include "densys/polynomial.hpp"

namespace densys {

class AdaptiveDesign {
 public:
  AdaptiveDesign(Polynomial R_m, double gain, DensityFn rho) : R_m_(std::move(R_m)), gain_(gain), rho_(std::move(rho)) {
    if (R_m_.is_zero() || !R_m_.is_monic()) throw std::invalid_argument("adaptive design: R_m must be monic");
    if (R_m_.degree() >= 1 && !is_hurwitz(R_m_)) throw std::invalid_argument("adaptive design: R_m must be Hurwitz");
    if (!(gain_ > 0.0)) throw std::invalid_argument("adaptive design: adaptation gain must be > 0");
    if (rho_.dim() != 1) throw std::invalid_argument("adaptive design: density must act on the scalar output");
    const int d = R_m_.degree();
    if (d >= 1) {
      Companion c = companion(R_m_);
      F_ = std::move(c.F);
      b_ = std::move(c.b);
    } else {
      F_.resize(0, 0);
      b_.resize(0);
    }
  }

  const Polynomial& R_m() const { return R_m_; }
  double gain() const { return gain_; }
  const DensityFn& rho() const { return rho_; }
  const Eigen::MatrixXd& F() const { return F_; }
  const Eigen::VectorXd& b() const { return b_; }
  /// Filter dimension n - 1.
  int filter_dim() const { return R_m_.degree(); }

 private:
  Polynomial R_m_;
  double gain_;
  DensityFn rho_;
  Eigen::MatrixXd F_;
  Eigen::VectorXd b_;
};

/// The parameterization Q = l R_m + dQ, dQ / R_m = k0y + dQ~ / R_m,
/// R / lead(R) = R_m + dR of a known plant. Only tests and monitors use this;
/// the controller never reads it.
struct TrueParameters {
  Polynomial delta_Q;
  Polynomial delta_Q_tilde;
  Polynomial delta_R;
  std::vector<double> c0y;  // coefficients of dQ~, ascending, length n-1
  std::vector<double> c0u;  // coefficients of dR, ascending, length n-1
  double k0y = 0.0;
  /// High-frequency gain k * lead(R).
  double k = 1.0;

  /// Vector theta with dy/dt = k (u - theta' w) for w = (V_y, V_u, y).
  Eigen::VectorXd theta() const {
    const std::size_t m = c0y.size();
    Eigen::VectorXd th(static_cast<Eigen::Index>(2 * m + 1));
    for (std::size_t i = 0; i < m; ++i) {
      th(static_cast<Eigen::Index>(i)) = c0y[i] / k;
      th(static_cast<Eigen::Index>(m + i)) = -c0u[i];
    }
    th(static_cast<Eigen::Index>(2 * m)) = k0y / k;
    return th;
  }
};

inline TrueParameters true_parameters(const LinearPlant& plant, const Polynomial& R_m) {
  const int n = plant.n();
  if (plant.relative_degree() != 1) throw std::invalid_argument("true_parameters: plant must have relative degree 1");
  if (R_m.degree() != n - 1) throw std::invalid_argument("true_parameters: deg R_m must equal deg Q - 1");
  if (!R_m.is_monic()) throw std::invalid_argument("true_parameters: R_m must be monic");
  TrueParameters tp;
  tp.k = plant.k() * plant.R().leading();
  const Polynomial Q_m = R_m * Polynomial{0.0, 1.0};
  tp.delta_Q = plant.Q() - Q_m;
  const DivMod qr = poly_divmod(tp.delta_Q, R_m);
  tp.k0y = qr.quotient[0];
  tp.delta_Q_tilde = qr.remainder;
  tp.delta_R = plant.R().monic() - R_m;
  const std::size_t m = static_cast<std::size_t>(n - 1);
  tp.c0y.resize(m);
  tp.c0u.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    tp.c0y[i] = tp.delta_Q_tilde[i];
    tp.c0u[i] = tp.delta_R[i];
  }
  return tp;
}

/// How the plant's internal state is chosen from y(0).
enum class PlantInit {
  /// Consistent with zero filter states: the filtered parameterization
  /// holds exactly from t = 0.
  Consistent,
  /// xi(0) = y0 / (k R(0)), all derivatives of xi zero.
  Rest,
  /// y(0) = y0 with the free-response derivatives y'(0), ..., y^(n-1)(0) zero.
  OutputRest,
};

/// Layout of the closed-loop state: plant z (n), V_y (n-1), V_u (n-1), c (2n-1).
struct AdaptiveLayout {
  int n = 1;
  int m() const { return n - 1; }
  int z() const { return 0; }
  int vy() const { return n; }
  int vu() const { return n + m(); }
  int c() const { return n + 2 * m(); }
  int c_dim() const { return 2 * m() + 1; }
  int size() const { return c() + c_dim(); }
};

class AdaptiveLoop {
 public:
  AdaptiveLoop(LinearPlant plant, AdaptiveDesign design)
      : plant_(std::move(plant)), design_(std::move(design)), ss_(plant_.realization()) {
    if (plant_.relative_degree() != 1)
      throw std::invalid_argument("adaptive loop: only relative degree 1 plants are supported");
    if (design_.filter_dim() != plant_.n() - 1)
      throw std::invalid_argument("adaptive loop: deg R_m must equal deg Q - 1");
    layout_.n = plant_.n();
  }

  const LinearPlant& plant() const { return plant_; }
  const AdaptiveDesign& design() const { return design_; }
  const StateSpace& plant_ss() const { return ss_; }
  const AdaptiveLayout& layout() const { return layout_; }

  double output(std::span<const double> s) const {
    return ss_.C.dot(Eigen::Map<const Eigen::VectorXd>(s.data(), layout_.n));
  }

  Eigen::VectorXd regressor(std::span<const double> s) const {
    const int m = layout_.m();
    Eigen::VectorXd w(layout_.c_dim());
    for (int i = 0; i < m; ++i) {
      w(i) = s[static_cast<std::size_t>(layout_.vy() + i)];
      w(m + i) = s[static_cast<std::size_t>(layout_.vu() + i)];
    }
    w(2 * m) = output(s);
    return w;
  }

  Eigen::VectorXd estimate(std::span<const double> s) const {
    return Eigen::Map<const Eigen::VectorXd>(s.data() + layout_.c(), layout_.c_dim());
  }

  /// u = c' w + rho(y, t), or nullopt when rho is not finite.
  std::optional<double> control(std::span<const double> s, double t) const {
    const DensityValue r = eval_density(design_.rho(), output(s), t);
    if (!r.is_finite()) return std::nullopt;
    return estimate(s).dot(regressor(s)) + r.value();
  }

  /// Closed-loop vector field.
  Fault operator()(double t, std::span<const double> s, std::span<double> ds) const {
    const int n = layout_.n, m = layout_.m();
    const double y = output(s);
    const DensityValue r = eval_density(design_.rho(), y, t);
    if (!r.is_finite()) return r.is_divergent() ? Fault::Divergent : Fault::OutOfDomain;
    const Eigen::VectorXd w = regressor(s);
    const Eigen::VectorXd c = estimate(s);
    const double u = c.dot(w) + r.value();

    Eigen::Map<const Eigen::VectorXd> z(s.data(), n);
    Eigen::Map<Eigen::VectorXd>(ds.data(), n) = ss_.A * z + ss_.B * u;
    if (m > 0) {
      Eigen::Map<const Eigen::VectorXd> vy(s.data() + layout_.vy(), m);
      Eigen::Map<const Eigen::VectorXd> vu(s.data() + layout_.vu(), m);
      Eigen::Map<Eigen::VectorXd>(ds.data() + layout_.vy(), m) = design_.F() * vy + design_.b() * y;
      Eigen::Map<Eigen::VectorXd>(ds.data() + layout_.vu(), m) = design_.F() * vu + design_.b() * u;
    }
    Eigen::Map<Eigen::VectorXd>(ds.data() + layout_.c(), layout_.c_dim()) = -design_.gain() * y * w;
    return Fault::None;
  }

  /// Initial closed-loop state with output y0, zero filters and zero estimate.
  State initial_state(double y0, PlantInit init = PlantInit::Consistent) const {
    State s(static_cast<std::size_t>(layout_.size()), 0.0);
    Eigen::VectorXd z0;
    switch (init) {
      case PlantInit::Consistent: z0 = consistent_plant_state(y0); break;
      case PlantInit::Rest: z0 = plant_.rest_state(y0); break;
      case PlantInit::OutputRest: z0 = output_rest_state(y0); break;
    }
    for (int i = 0; i < layout_.n; ++i) s[static_cast<std::size_t>(i)] = z0(i);
    return s;
  }

  /// Plant state z0 with C z0 = y0 such that, with zero filter states, the
  /// mismatch e = y' - k (u - theta' w) and its first n-2 derivatives vanish
  /// at t = 0. e obeys R_m(p) e = 0 for any input, so it then stays zero.
  Eigen::VectorXd consistent_plant_state(double y0) const {
    const int n = layout_.n, m = layout_.m();
    if (n == 1) return Eigen::VectorXd::Constant(1, y0 / ss_.C(0));
    const TrueParameters tp = true_parameters(plant_, design_.R_m());
    const Eigen::VectorXd th = tp.theta();
    const int N = n + 2 * m;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    M.block(0, 0, n, n) = ss_.A;
    M.block(n, n, m, m) = design_.F();
    M.block(n, 0, m, n) = design_.b() * ss_.C;
    M.block(n + m, n + m, m, m) = design_.F();
    Eigen::RowVectorXd L = Eigen::RowVectorXd::Zero(N);
    L.head(n) = ss_.C * ss_.A + tp.k * th(2 * m) * ss_.C;
    L.segment(n, m) = tp.k * th.head(m).transpose();
    L.segment(n + m, m) = tp.k * th.segment(m, m).transpose();
    Eigen::MatrixXd sys(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    sys.row(0) = ss_.C;
    rhs(0) = y0;
    Eigen::RowVectorXd Lj = L;
    for (int j = 0; j < n - 1; ++j) {
      sys.row(1 + j) = Lj.head(n);
      Lj = Lj * M;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (!lu.isInvertible()) throw std::runtime_error("adaptive loop: no consistent plant initial state");
    return lu.solve(rhs);
  }

  /// Plant state with C z = y0 and C A^j z = 0 for j = 1..n-1.
  Eigen::VectorXd output_rest_state(double y0) const {
    const int n = layout_.n;
    Eigen::MatrixXd O(n, n);
    Eigen::RowVectorXd r = ss_.C;
    for (int j = 0; j < n; ++j) {
      O.row(j) = r;
      r = r * ss_.A;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = y0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(O);
    if (!lu.isInvertible()) throw std::runtime_error("adaptive loop: plant realization is not observable");
    return lu.solve(rhs);
  }

  std::vector<double> breakpoints(double t0, double t1) const { return design_.rho().breakpoints(t0, t1); }

 private:
  LinearPlant plant_;
  AdaptiveDesign design_;
  StateSpace ss_;
  AdaptiveLayout layout_;
};

inline Trajectory simulate_adaptive(const AdaptiveLoop& loop, double y0, double t0, double t1,
                                    const IntegratorConfig& cfg, PlantInit init = PlantInit::Consistent) {
  return integrate_field(loop, loop.initial_state(y0, init), t0, t1, loop.breakpoints(t0, t1), cfg);
}

/// V(t) = y^2 / 2 + k / (2 gain) |c - theta|^2 and the residual of the
/// identity dV/dt = k rho(y, t) y, with dV/dt from a three-point
/// non-uniform centred difference. Samples whose stencil touches a signal
/// switch, and the two end samples, carry NaN residuals.
struct LyapunovSeries {
  std::vector<double> t;
  std::vector<double> V;
  std::vector<double> residual;
  std::vector<double> expected;  // k rho(y, t) y
};

inline LyapunovSeries lyapunov_monitor(const Trajectory& traj, const AdaptiveLoop& loop, const TrueParameters& tp) {
  const AdaptiveLayout& lay = loop.layout();
  if (traj.dim() != static_cast<std::size_t>(lay.size()))
    throw std::invalid_argument("lyapunov_monitor: trajectory does not carry the parameter estimate");
  const Eigen::VectorXd th = tp.theta();
  const double gain = loop.design().gain();
  LyapunovSeries out;
  const std::size_t n = traj.size();
  out.t = traj.times;
  out.V.resize(n);
  out.expected.resize(n);
  out.residual.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = traj.states[i];
    const double y = loop.output(s);
    const Eigen::VectorXd dc = loop.estimate(s) - th;
    out.V[i] = 0.5 * y * y + tp.k / (2.0 * gain) * dc.squaredNorm();
    const DensityValue r = eval_density(loop.design().rho(), y, traj.times[i]);
    out.expected[i] = r.is_finite() ? tp.k * r.value() * y : std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<double> switches;
  for (const auto& e : traj.events)
    if (e.kind == EventKind::SignalSwitch) switches.push_back(e.time);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double tm = traj.times[i - 1], t0 = traj.times[i], tp1 = traj.times[i + 1];
    bool touches = false;
    for (double sw : switches) touches = touches || (sw >= tm && sw <= tp1);
    if (touches) continue;
    const double h1 = t0 - tm, h2 = tp1 - t0;
    const double d = -h2 / (h1 * (h1 + h2)) * out.V[i - 1] + (h2 - h1) / (h1 * h2) * out.V[i] +
                     h1 / (h2 * (h1 + h2)) * out.V[i + 1];
    out.residual[i] = d - out.expected[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// The five worked cases: plant (p - 1)^3 y = (p + 1)^2 u, F from (l + 1)^2,
// gain 0.1.

struct AdaptiveOverrides {
  std::optional<double> y0;
  std::optional<double> alpha;
  std::optional<double> gain;
  std::optional<double> t_end;
  std::optional<PlantInit> init;
};

struct NamedSignal {
  std::string name;
  Signal signal;
};

struct AdaptiveCase {
  int id = 1;
  std::string description;
  LinearPlant plant{Polynomial{-1.0, 3.0, -3.0, 1.0}, Polynomial{1.0, 2.0, 1.0}, 1.0};
  Polynomial R_m{1.0, 2.0, 1.0};
  double gain = 0.1;
  double alpha = 1.0;
  DensityFn rho = DensityFn::zero();
  double y0 = 4.0;
  double t0 = 0.0;
  double t_end = 10.0;
  PlantInit init = PlantInit::Consistent;
  IntegratorConfig cfg;
  /// Boundary / reference signals written next to the output.
  std::vector<NamedSignal> boundaries;
  /// Open-set constraint the output must respect, if the case has one.
  std::optional<Constraint> constraint;
};

inline DensityFn adaptive_case_density(int id, double alpha) {
  switch (id) {
    case 1: return DensityFn::neg_linear(alpha, Signal::constant(0.0));
    case 2: {
      const Signal h = Signal::step_switch(1.0, 1.0, 0.4);
      return DensityFn::sym_log_tube(alpha, Signal::exp(4.0, -3.0).affine(1.0, 1.0) * h);
    }
    case 3:
      return DensityFn::negated(DensityFn::log_ratio_tube(alpha, Signal::exp(4.0, -0.1).affine(1.0, 0.1),
                                                          Signal::exp(3.0, -0.1).affine(1.0, -0.1)));
    case 4: {
      const Signal y_m = Signal::product({Signal::exp(1.0, -0.1), Signal::sinusoid(1.0, 1.0), Signal::pulse_train(2.5)});
      return DensityFn::neg_linear(alpha, y_m);
    }
    case 5: return DensityFn::neg_log_shift(alpha, Signal::exp(2.0, -0.1).affine(1.0, -1.0));
    default: break;
  }
  throw std::invalid_argument("adaptive case id must be 1..5");
}

inline AdaptiveCase adaptive_case(int id, const AdaptiveOverrides& ov = {}) {
  static constexpr double kAlpha[] = {1.0, 1.0, 5.0, 100.0, 10.0};
  if (id < 1 || id > 5) throw std::invalid_argument("adaptive case id must be 1..5");
  AdaptiveCase c;
  c.id = id;
  c.alpha = ov.alpha.value_or(kAlpha[id - 1]);
  c.gain = ov.gain.value_or(0.1);
  c.y0 = ov.y0.value_or(id == 4 ? 1.0 : 4.0);
  c.t_end = ov.t_end.value_or(id == 1 ? 20.0 : 10.0);
  c.init = ov.init.value_or(PlantInit::Consistent);
  c.rho = adaptive_case_density(id, c.alpha);
  c.cfg.h_max = 0.01;
  // Large-gain densities make the loop stiff; keep steps well inside the
  // explicit stability region.
  if (c.alpha > 10.0) c.cfg.h_max = std::min(c.cfg.h_max, 0.1 / c.alpha);
  c.cfg.h_init = std::min(c.cfg.h_init, c.cfg.h_max);
  switch (id) {
    case 1:
      c.description = "adaptive stabilization, rho = -alpha y";
      break;
    case 2: {
      c.description = "adaptive stabilization in the symmetric tube |y| < (4e^{-3t}+1) h(t)";
      const Signal g = Signal::exp(4.0, -3.0).affine(1.0, 1.0) * Signal::step_switch(1.0, 1.0, 0.4);
      c.boundaries = {{"g", g}, {"neg_g", g.affine(-1.0, 0.0)}};
      c.constraint = Constraint::abs_below(g);
      break;
    }
    case 3: {
      c.description = "adaptive stabilization in the asymmetric tube 3e^{-0.1t}-0.1 < y < 4e^{-0.1t}+0.1";
      const Signal up = Signal::exp(4.0, -0.1).affine(1.0, 0.1);
      const Signal lo = Signal::exp(3.0, -0.1).affine(1.0, -0.1);
      c.boundaries = {{"g_upper", up}, {"g_lower", lo}};
      c.constraint = Constraint::between(lo, up);
      break;
    }
    case 4: {
      c.description = "adaptive tracking of y_m = e^{-0.1t} sin(t) P(t)";
      const Signal y_m = Signal::product({Signal::exp(1.0, -0.1), Signal::sinusoid(1.0, 1.0), Signal::pulse_train(2.5)});
      c.boundaries = {{"y_m", y_m}};
      break;
    }
    case 5: {
      c.description = "sliding above the border g = 2e^{-0.1t} - 1";
      const Signal g = Signal::exp(2.0, -0.1).affine(1.0, -1.0);
      c.boundaries = {{"g", g}};
      c.constraint = Constraint::above(g);
      break;
    }
    default: break;
  }
  return c;
}

struct AdaptiveRun {
  AdaptiveLoop loop;
  Trajectory trajectory;
  /// Output-only view of the trajectory (states = {y}).
  Trajectory output;
  std::vector<double> u;
  std::vector<double> rho;
};

/// Raised when a case's initial output lies outside its density's domain.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline AdaptiveRun run_adaptive(const AdaptiveCase& c) {
  const DensityValue r0 = eval_density(c.rho, c.y0, c.t0);
  if (!r0.is_finite())
    throw ConfigError("initial output y0=" + std::to_string(c.y0) + " lies outside the density's open domain");
  AdaptiveLoop loop(c.plant, AdaptiveDesign(c.R_m, c.gain, c.rho));
  Trajectory traj = simulate_adaptive(loop, c.y0, c.t0, c.t_end, c.cfg, c.init);
  AdaptiveRun run{std::move(loop), std::move(traj), {}, {}, {}};
  run.output.times = run.trajectory.times;
  run.output.events = run.trajectory.events;
  run.output.terminated_reason = run.trajectory.terminated_reason;
  run.output.detail = run.trajectory.detail;
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    const auto& s = run.trajectory.states[i];
    const double t = run.trajectory.times[i];
    const double y = run.loop.output(s);
    run.output.states.push_back(State{y});
    const DensityValue r = eval_density(c.rho, y, t);
    run.rho.push_back(r.is_finite() ? r.value() : std::numeric_limits<double>::quiet_NaN());
    const auto u = run.loop.control(s, t);
    run.u.push_back(u ? *u : std::numeric_limits<double>::quiet_NaN());
  }
  return run;
}

inline AdaptiveRun run_adaptive_case(int id, const AdaptiveOverrides& ov = {}) {
  return run_adaptive(adaptive_case(id, ov));
}

}  // namespace densys
