#pragma once

// Linear plants Q(p) y = k R(p) u and the known-parameter density controllers
//   u = -Q(p) / (k p R(p) (mu p + 1)^(gamma - 1)) [rho(y, t) y]
// that reduce the loop to dy/dt = -rho(y, t) y (exactly for gamma = 1, as
// mu -> 0 otherwise).

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "densys/density.hpp"
#include "densys/integrate.hpp"
#include "densys/polynomial.hpp"

namespace densys {

class LinearPlant {
 public:
  /// Q monic of degree n, R with positive leading coefficient and Hurwitz (or
  /// a positive constant), n > deg R, k > 0.
  LinearPlant(Polynomial Q, Polynomial R, double k) : Q_(std::move(Q)), R_(std::move(R)), k_(k) {
    if (Q_.degree() < 1) throw std::invalid_argument("plant: Q must have degree >= 1");
    if (!Q_.is_monic()) throw std::invalid_argument("plant: Q must be monic");
    if (R_.is_zero()) throw std::invalid_argument("plant: R must be nonzero");
    if (!(R_.leading() > 0.0)) throw std::invalid_argument("plant: R must have a positive leading coefficient");
    if (R_.degree() >= 1 && !is_hurwitz(R_)) throw std::invalid_argument("plant: R must be Hurwitz");
    if (Q_.degree() <= R_.degree()) throw std::invalid_argument("plant: need deg Q > deg R");
    if (!(k_ > 0.0) || !std::isfinite(k_)) throw std::invalid_argument("plant: k must be > 0");
  }

  const Polynomial& Q() const { return Q_; }
  const Polynomial& R() const { return R_; }
  double k() const { return k_; }
  int n() const { return Q_.degree(); }
  int relative_degree() const { return densys::relative_degree(Q_, R_); }

  /// Controllable canonical realization of k R / Q. The state is
  /// (xi, xi', ..., xi^(n-1)) with Q(p) xi = u and y = k R(p) xi.
  StateSpace realization() const { return realize_tf(R_ * k_, Q_); }

  /// Plant state with output y0 and every derivative of xi at rest.
  Eigen::VectorXd rest_state(double y0) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n());
    z(0) = y0 / (k_ * R_[0]);
    return z;
  }

 private:
  Polynomial Q_;
  Polynomial R_;
  double k_;
};

struct KnownLoopResult {
  /// Full closed-loop state: plant (n) then controller (n) then reduced model (1).
  Trajectory full;
  /// Closed-loop output y(t).
  Trajectory output;
  /// Reduced density model dy/dt = -rho(y, t) y, on the same time grid.
  Trajectory reduced;
  StateSpace plant_ss;
  StateSpace controller_ss;
};

/// Controller transfer function Q / (k l R (mu l + 1)^(gamma - 1)).
inline std::pair<Polynomial, Polynomial> known_controller_tf(const LinearPlant& plant, double mu) {
  const int gamma = plant.relative_degree();
  Polynomial den = plant.R() * Polynomial{0.0, plant.k()};
  if (gamma > 1) den = den * Polynomial{1.0, mu}.pow(static_cast<unsigned>(gamma - 1));
  return {plant.Q(), den};
}

/// Simulates plant + known-parameter density controller from output y0.
///
/// The plant starts with its partial state xi at rest except xi(0), which
/// sets y(0) = y0. The controller's partial state is initialised to the same
/// xi so the cancelled plant modes start at zero; any other choice excites
/// them and, for unstable Q, breaks the reduction.
inline KnownLoopResult closed_loop_known(const LinearPlant& plant, const DensityFn& rho, double mu, double y0,
                                         double t0, double t1, const IntegratorConfig& cfg = {}) {
  if (rho.dim() != 1) throw std::invalid_argument("closed_loop_known: density must be one-dimensional");
  const int gamma = plant.relative_degree();
  if (mu < 0.0) throw std::invalid_argument("closed_loop_known: mu must be >= 0");
  if (gamma > 1 && !(mu > 0.0)) throw std::invalid_argument("closed_loop_known: relative degree > 1 needs mu > 0");

  KnownLoopResult res;
  res.plant_ss = plant.realization();
  const auto [cnum, cden] = known_controller_tf(plant, mu);
  res.controller_ss = realize_tf(cnum, cden);
  const int np = res.plant_ss.order();
  const int nc = res.controller_ss.order();
  const StateSpace& P = res.plant_ss;
  const StateSpace& K = res.controller_ss;

  State x0(static_cast<std::size_t>(np + nc + 1), 0.0);
  const Eigen::VectorXd z0 = plant.rest_state(y0);
  const double lead = cden.leading();
  for (int i = 0; i < np; ++i) x0[static_cast<std::size_t>(i)] = z0(i);
  // Controller partial state eta satisfies u = Q(p) (eta / lead).
  for (int i = 0; i < std::min(np, nc); ++i) x0[static_cast<std::size_t>(np + i)] = lead * z0(i);
  x0.back() = y0;

  auto field = [&](double t, std::span<const double> x, std::span<double> dx) -> Fault {
    Eigen::Map<const Eigen::VectorXd> z(x.data(), np);
    Eigen::Map<const Eigen::VectorXd> xc(x.data() + np, nc);
    const double y = P.C.dot(z);
    const double yr = x[static_cast<std::size_t>(np + nc)];
    const DensityValue r = eval_density(rho, y, t);
    const DensityValue rr = eval_density(rho, yr, t);
    if (!r.is_finite() || !rr.is_finite()) {
      const bool div = r.is_divergent() || rr.is_divergent();
      return div ? Fault::Divergent : Fault::OutOfDomain;
    }
    const double e = -r.value() * y;
    const double u = (nc > 0 ? K.C.dot(xc) : 0.0) + K.D * e;
    Eigen::Map<Eigen::VectorXd> dz(dx.data(), np);
    Eigen::Map<Eigen::VectorXd> dxc(dx.data() + np, nc);
    dz = P.A * z + P.B * u;
    if (nc > 0) dxc = K.A * xc + K.B * e;
    dx[static_cast<std::size_t>(np + nc)] = -rr.value() * yr;
    return Fault::None;
  };
  res.full = integrate_field(field, std::move(x0), t0, t1, rho.breakpoints(t0, t1), cfg);

  auto project = [&](auto&& fn) {
    Trajectory out;
    out.times = res.full.times;
    out.events = res.full.events;
    out.terminated_reason = res.full.terminated_reason;
    out.detail = res.full.detail;
    out.states.reserve(res.full.size());
    for (const auto& s : res.full.states) out.states.push_back(State{fn(s)});
    return out;
  };
  res.output = project([&](const State& s) {
    return P.C.dot(Eigen::Map<const Eigen::VectorXd>(s.data(), np));
  });
  res.reduced = project([&](const State& s) { return s[static_cast<std::size_t>(np + nc)]; });
  return res;
}

}  // namespace densys
