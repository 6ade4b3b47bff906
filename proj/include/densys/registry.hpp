#pragma once

// Built-in scenarios, one per figure or worked example.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "densys/adaptive.hpp"
#include "densys/config.hpp"

namespace densys {

namespace registry_detail {

inline Scenario density_scenario(std::string id, std::string figure, std::string description, SystemKind system,
                                 std::vector<DensityFn> densities, std::vector<State> seeds, double t_end) {
  Scenario s;
  s.id = std::move(id);
  s.figure = std::move(figure);
  s.description = std::move(description);
  s.type = ScenarioType::Density;
  s.system = system;
  s.densities = std::move(densities);
  s.seeds = std::move(seeds);
  s.t_end = t_end;
  return s;
}

/// Eight seeds on a spiral with radii 1.15 ... 1.85 (or the given range).
inline std::vector<State> ring_seeds(double r_lo, double r_hi) {
  std::vector<State> out;
  for (int k = 0; k < 8; ++k) {
    const double r = r_lo + (r_hi - r_lo) * k / 7.0;
    const double th = k * std::numbers::pi / 4.0 + 0.1;
    out.push_back({r * std::cos(th), r * std::sin(th)});
  }
  return out;
}

inline RegionMapSpec unit_square_map(double half_width, std::size_t n) {
  return {{{-half_width, half_width}, {-half_width, half_width}}, {n, n}, 0.0};
}

inline Scenario from_adaptive_case(const AdaptiveCase& c) {
  Scenario s;
  s.id = "adapt" + std::to_string(c.id);
  s.figure = "Example 3 case " + std::to_string(c.id);
  s.description = c.description;
  s.type = ScenarioType::Adaptive;
  AdaptiveSpec a;
  a.Q = c.plant.Q();
  a.R = c.plant.R();
  a.k = c.plant.k();
  a.R_m = c.R_m;
  a.gain = c.gain;
  a.rho = c.rho;
  a.y0 = c.y0;
  a.init = c.init;
  a.boundaries = c.boundaries;
  s.adaptive = std::move(a);
  s.constraint = c.constraint;
  s.t_start = c.t0;
  s.t_end = c.t_end;
  s.integrator = c.cfg;
  return s;
}

}  // namespace registry_detail

/// All built-in scenarios, sorted by id.
inline std::vector<Scenario> builtin_scenarios() {
  using namespace registry_detail;
  using S = Signal;
  std::vector<Scenario> out;

  out.push_back(density_scenario("fig1a", "Fig. 1a", "constant density rho = alpha, exponential decay",
                                 SystemKind::Scalar, {DensityFn::constant(1.0)}, {{2.0}}, 10.0));

  {
    const Signal w = S::sum({S::constant(1.0), S::sinusoid(0.5, 2.0), S::step_switch(5.0, 0.0, 0.5)});
    Scenario s = density_scenario("fig1b", "Fig. 1b", "barrier density alpha / (w - |x|), trajectories stay in |x| < w",
                                  SystemKind::Scalar, {DensityFn::barrier(1.0, w)},
                                  {{0.9}, {0.5}, {0.1}, {-0.3}, {-0.7}, {-0.95}}, 10.0);
    s.constraint = Constraint::abs_below(w);
    out.push_back(std::move(s));
  }
  {
    const Signal w = S::step_switch(4.0, 2.0, 3.0) + S::sinusoid(0.2, 0.5);
    Scenario s = density_scenario("fig2a", "Fig. 2a", "tracking density alpha (x - w) sign(x)", SystemKind::Scalar,
                                  {DensityFn::track_sign(1.0, w)}, {{0.5}}, 10.0);
    s.attraction = PointBoundary{w};
    out.push_back(std::move(s));
  }
  {
    const Signal up = S::sinusoid(0.5, 1.0).affine(1.0, 3.0);
    const Signal lo = S::sinusoid(0.5, 1.0).affine(1.0, 1.0);
    Scenario s = density_scenario("fig2b", "Fig. 2b", "log-ratio tube between 1 + 0.5 sin t and 3 + 0.5 sin t",
                                  SystemKind::Scalar, {DensityFn::log_ratio_tube(1.0, up, lo)}, {{2.5}}, 10.0);
    s.constraint = Constraint::between(lo, up);
    s.attraction = PointBoundary{S::sinusoid(0.5, 1.0).affine(1.0, 2.0)};
    out.push_back(std::move(s));
  }
  {
    const Signal g = S::sinusoid(0.5, 1.0).affine(1.0, 1.0);
    Scenario s = density_scenario("fig3", "Fig. 3", "positive half-line, rho = alpha ln(x - g), equilibrium x = g + 1",
                                  SystemKind::ScalarPositive, {DensityFn::log_shift(1.0, g)}, {{3.0}}, 10.0);
    s.constraint = Constraint::above(g);
    s.attraction = PointBoundary{g.affine(1.0, 1.0)};
    out.push_back(std::move(s));
  }
  {
    const DensityFn d = DensityFn::planar_log_ratio(1.0, S::constant(3.0), S::constant(2.0));
    Scenario s = density_scenario("fig4a", "Fig. 4a", "planar annulus 2 < |x1| + |x2| < 3", SystemKind::Planar, {d, d},
                                  {{0.0, 2.5}}, 10.0);
    s.constraint = Constraint::level_between(1.0, S::constant(2.0), S::constant(3.0));
    s.attraction = LevelSetBoundary{1.0, S::constant(2.5)};
    out.push_back(std::move(s));
  }
  {
    const double up = std::pow(3.0, 0.6);
    const DensityFn d = DensityFn::planar_log_ratio(0.6, S::constant(up), S::constant(1.0));
    Scenario s = density_scenario("fig4b", "Fig. 4b", "planar band 1 < |x1|^0.6 + |x2|^0.6 < 3^0.6", SystemKind::Planar,
                                  {d, d}, {{0.0, 2.5}}, 10.0);
    s.constraint = Constraint::level_between(0.6, S::constant(1.0), S::constant(up));
    s.attraction = LevelSetBoundary{0.6, S::constant(0.5 * (1.0 + up))};
    out.push_back(std::move(s));
  }
  {
    Scenario s = density_scenario("fig5", "Fig. 5", "rho1 = x1^2 - 1, rho2 = x1^2: attraction to the unit circle",
                                  SystemKind::Planar, {DensityFn::poly_disc(-1.0, 1.0, 0.0), DensityFn::poly_disc(0.0, 1.0, 0.0)},
                                  {{2.0, 1.0}, {0.2, 0.1}}, 20.0);
    s.region_map = unit_square_map(2.0, 41);
    out.push_back(std::move(s));
  }
  for (const auto& [id, fig, beta] : {std::tuple{"fig6a", "Fig. 6a", 1.0}, std::tuple{"fig6b", "Fig. 6b", 0.5}}) {
    Scenario s = density_scenario(id, fig,
                                  "rho1 = 20 ln(|x1|^b + |x2|^b - 1), rho2 = 0, b = " + std::string(beta == 1.0 ? "1" : "0.5"),
                                  SystemKind::Planar, {DensityFn::planar_log_shift(20.0, beta), DensityFn::zero(2)},
                                  {{2.0, 2.0}}, 10.0);
    s.integrator.h_max = 0.01;
    s.region_map = unit_square_map(2.0, 41);
    out.push_back(std::move(s));
  }
  {
    Scenario s = density_scenario("fig_alex1a", "Example 3 (w = e^t)", "rho = x - w, w = e^t: gap w - x tends to a constant",
                                  SystemKind::ScalarPositive, {DensityFn::linear(1.0, S::exp(1.0, 1.0))}, {{2.0}}, 10.0);
    // The gap is O(1) while x grows to e^10; resolve it.
    s.integrator.rtol = 1e-12;
    s.integrator.atol = 1e-12;
    s.attraction = PointBoundary{S::exp(1.0, 1.0)};
    out.push_back(std::move(s));
  }
  {
    Scenario s = density_scenario("fig_alex1b", "Example 3 (w = e^{e^t})", "rho = x - w, w = e^{e^t}: gap w - x grows",
                                  SystemKind::ScalarPositive, {DensityFn::linear(1.0, S::double_exp())}, {{2.0}}, 2.5);
    s.attraction = PointBoundary{S::double_exp()};
    out.push_back(std::move(s));
  }
  {
    Scenario s = density_scenario("fig_alex2a", "Example 3, weighted sign (w = e^t)",
                                  "rho = w sign(x - w), w = e^t: x reaches w", SystemKind::ScalarPositive,
                                  {DensityFn::weighted_sign(S::exp(1.0, 1.0))}, {{2.0}}, 3.0);
    s.integrator.rtol = 1e-5;
    s.integrator.atol = 1e-9;
    s.attraction = PointBoundary{S::exp(1.0, 1.0)};
    out.push_back(std::move(s));
  }
  {
    Scenario s = density_scenario("fig_alex2b", "Example 3, weighted sign (w = e^{e^t})",
                                  "rho = w sign(x - w), w = e^{e^t}: x reaches w", SystemKind::ScalarPositive,
                                  {DensityFn::weighted_sign(S::double_exp())}, {{2.0}}, 1.0);
    s.integrator.rtol = 2e-6;
    s.integrator.atol = 1e-10;
    s.attraction = PointBoundary{S::double_exp()};
    out.push_back(std::move(s));
  }
  {
    const DensityFn d = DensityFn::exp_hole(1, 0.98);
    Scenario s = density_scenario("fig_bh_a", "Example 4, black hole", "rho = exp((r^2 - 1)^-0.98): attraction to the unit disc",
                                  SystemKind::Planar, {d, d}, ring_seeds(1.15, 1.85), 5.0);
    s.region_map = unit_square_map(2.0, 100);
    out.push_back(std::move(s));
  }
  {
    const DensityFn d = DensityFn::log_disc(-1);
    Scenario s = density_scenario("fig_bh_b", "Example 4, black hole", "rho = -ln(r^2 - 1): attraction to the unit disc from r^2 < 2",
                                  SystemKind::Planar, {d, d}, ring_seeds(1.05, 1.4), 5.0);
    s.region_map = unit_square_map(2.0, 100);
    out.push_back(std::move(s));
  }
  {
    const DensityFn d = DensityFn::exp_hole(-1, 0.98);
    Scenario s = density_scenario("fig_wh_a", "Example 4, white hole", "rho = -exp((r^2 - 1)^-0.98): repulsion from the unit disc",
                                  SystemKind::Planar, {d, d}, ring_seeds(1.15, 1.85), 5.0);
    s.region_map = unit_square_map(2.0, 100);
    out.push_back(std::move(s));
  }
  {
    const DensityFn d = DensityFn::log_disc(1);
    Scenario s = density_scenario("fig_wh_b", "Example 4, white hole", "rho = ln(r^2 - 1): repulsion from the unit disc toward r^2 = 2",
                                  SystemKind::Planar, {d, d}, ring_seeds(1.15, 1.85), 10.0);
    s.region_map = unit_square_map(2.0, 100);
    s.attraction = LevelSetBoundary{2.0, S::constant(2.0)};
    out.push_back(std::move(s));
  }
  {
    Scenario s;
    s.id = "known_rd1";
    s.figure = "Sec. 3.1";
    s.description = "known parameters, (p-1)^3 y = (p+1)^2 u, reduced model dy/dt = -y";
    s.type = ScenarioType::Known;
    s.known = KnownSpec{Polynomial{-1.0, 3.0, -3.0, 1.0}, Polynomial{1.0, 2.0, 1.0}, 1.0, DensityFn::constant(1.0), {0.0}, 4.0};
    s.t_end = 10.0;
    out.push_back(std::move(s));
  }
  {
    Scenario s;
    s.id = "known_mu";
    s.figure = "Sec. 3.1";
    s.description = "known parameters, p^2 y = u (relative degree 2), mu -> 0 study";
    s.type = ScenarioType::Known;
    s.known = KnownSpec{Polynomial{0.0, 0.0, 1.0}, Polynomial{1.0}, 1.0, DensityFn::constant(1.0), {0.1, 0.01, 0.001}, 1.0};
    s.t_end = 10.0;
    out.push_back(std::move(s));
  }
  for (int id = 1; id <= 5; ++id) out.push_back(from_adaptive_case(adaptive_case(id)));

  std::sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

inline std::optional<Scenario> find_scenario(const std::string& id) {
  for (auto& s : builtin_scenarios())
    if (s.id == id) return s;
  return std::nullopt;
}

/// Scenarios named by `target`: an exact id, or a group prefix such as
/// "fig_bh" (fig_bh_a, fig_bh_b) or "fig_alex2" (fig_alex2a, fig_alex2b).
inline std::vector<Scenario> resolve_scenarios(const std::string& target) {
  std::vector<Scenario> out;
  auto all = builtin_scenarios();
  for (auto& s : all)
    if (s.id == target) return {s};
  for (auto& s : all) {
    if (s.id.size() <= target.size() || s.id.compare(0, target.size(), target) != 0) continue;
    const std::string rest = s.id.substr(target.size());
    const bool letter = rest.size() == 1 && rest[0] >= 'a' && rest[0] <= 'z';
    const bool suffixed = rest.size() == 2 && rest[0] == '_' && rest[1] >= 'a' && rest[1] <= 'z';
    if (letter || suffixed) out.push_back(s);
  }
  return out;
}

/// Converts an adaptive scenario back into the loop description used by run_adaptive.
inline AdaptiveCase adaptive_case_from(const Scenario& s) {
  const AdaptiveSpec& a = s.adaptive.value();
  AdaptiveCase c;
  c.id = 0;
  c.description = s.description;
  c.plant = LinearPlant(a.Q, a.R, a.k);
  c.R_m = a.R_m;
  c.gain = a.gain;
  c.rho = a.rho;
  c.y0 = a.y0;
  c.t0 = s.t_start;
  c.t_end = s.t_end;
  c.init = a.init;
  c.cfg = s.integrator;
  c.boundaries = a.boundaries;
  c.constraint = s.constraint;
  return c;
}

}  // namespace densys
