#pragma once

// Runs a scenario and renders its CSV artifacts.
//
// Every file is produced in memory first and written only when the run
// succeeds, so a failed run leaves nothing behind.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "densys/adaptive.hpp"
#include "densys/config.hpp"
#include "densys/integrate.hpp"
#include "densys/plant.hpp"
#include "densys/registry.hpp"
#include "densys/system.hpp"

namespace densys {

enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitConfig = 2, kExitIntegration = 3 };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned jobs = 1;
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<double> t_end;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string summary;
  std::vector<OutputFile> files;
};

/// 17 significant digits; non-finite values as nan, inf, -inf.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double density_number(const DensityValue& v) {
  if (v.is_finite()) return v.value();
  if (v.is_divergent()) return v.sign() * std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

inline void append_events(std::ostringstream& os, const Trajectory& tr) {
  for (const auto& e : tr.events) os << "# event," << fmt(e.time) << ',' << to_string(e.kind) << '\n';
}

/// t,x1[,x2],V,vdot,rho1[,rho2] plus event comment lines.
inline std::string trajectory_csv(const DensitySystem& sys, const std::vector<DensityFn>& densities, const Trajectory& tr) {
  std::ostringstream os;
  const std::size_t d = static_cast<std::size_t>(sys.dim());
  os << 't';
  for (std::size_t i = 0; i < d; ++i) os << ",x" << i + 1;
  os << ",V,vdot";
  for (std::size_t i = 0; i < densities.size(); ++i) os << ",rho" << i + 1;
  os << '\n';
  const QuadraticV V{sys.dim()};
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const State& x = tr.states[k];
    const double t = tr.times[k];
    os << fmt(t);
    for (double v : x) os << ',' << fmt(v);
    const auto vd = vdot(sys, x, t);
    os << ',' << fmt(V(x)) << ',' << fmt(vd.ok() ? vd.value : std::numeric_limits<double>::quiet_NaN());
    for (const auto& rho : densities) os << ',' << fmt(density_number(rho.eval(x, t)));
    os << '\n';
  }
  append_events(os, tr);
  return os.str();
}

/// x1,x2,class,vdot in row-major order; scalar maps leave x2 empty.
inline std::string region_map_csv(const RegionMap& map) {
  std::ostringstream os;
  os << "x1,x2,class,vdot\n";
  for (const auto& c : map.cells) {
    os << fmt(c.x[0]) << ',';
    if (c.x.size() > 1) os << fmt(c.x[1]);
    os << ',' << to_code(c.cls) << ',' << fmt(c.vdot) << '\n';
  }
  return os.str();
}

namespace runner_detail {

inline std::string traj_name(const std::string& id, std::size_t k, std::size_t count) {
  return count == 1 ? id + "_traj.csv" : id + "_traj_" + std::to_string(k) + ".csv";
}

inline std::string state_text(const State& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + fmt(x[i]);
  return s + ")";
}

inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline bool useless(const Trajectory& tr) {
  return tr.terminated_reason == Termination::InvalidInitialState ||
         (tr.terminated_reason == Termination::StepLimit && tr.size() <= 1);
}

inline RunResult run_density(const Scenario& s, const RunOptions& opt) {
  RunResult res;
  const DensitySystem sys = s.make_system();
  const auto trajs = sweep(sys, s.seeds, s.t_start, s.t_end, s.integrator, opt.jobs);
  std::size_t useless_count = 0, violations = 0;
  std::string verdicts;
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const Trajectory& tr = trajs[k];
    if (useless(tr)) {
      ++useless_count;
      continue;
    }
    res.files.push_back({traj_name(s.id, k, trajs.size()), trajectory_csv(sys, s.densities, tr)});
    if (s.constraint) violations += count_violations(*s.constraint, tr);
    if (s.attraction && tr.size() > 0) {
      const auto rep = attraction_report(tr, *s.attraction);
      verdicts += (verdicts.empty() ? "" : ",") + std::string(to_string(rep.verdict));
    }
  }
  if (useless_count == trajs.size()) {
    res.exit_code = kExitIntegration;
    res.files.clear();
    res.summary = s.id + ": integration failed: " + (trajs.empty() ? std::string("no seeds") : trajs.front().detail);
    return res;
  }
  if (s.region_map) {
    const RegionMap map = densys::region_map(sys, QuadraticV{sys.dim()}, s.region_map->bounds, s.region_map->grid,
                                             s.region_map->t);
    res.files.push_back({s.id + "_regionmap.csv", region_map_csv(map)});
  }
  std::string summary = s.id + ": ";
  if (trajs.size() == 1) {
    const Trajectory& tr = trajs.front();
    summary += std::string(to_string(tr.terminated_reason)) + " at t=" + short_num(tr.t_end()) +
               ", x=" + state_text(tr.back());
  } else {
    std::map<std::string, std::size_t> by_reason;
    for (const auto& tr : trajs) ++by_reason[std::string(to_string(tr.terminated_reason))];
    summary += std::to_string(trajs.size()) + " trajectories (";
    bool first = true;
    for (const auto& [reason, count] : by_reason) {
      summary += (first ? "" : ", ") + std::to_string(count) + " " + reason;
      first = false;
    }
    summary += ")";
  }
  if (s.attraction) summary += ", attraction=" + verdicts;
  if (s.constraint)
    summary += violations == 0 ? ", constraint=ok" : ", constraint=violated(" + std::to_string(violations) + ")";
  res.summary = std::move(summary);
  return res;
}

inline RunResult run_known(const Scenario& s) {
  RunResult res;
  const KnownSpec& k = *s.known;
  const LinearPlant plant(k.Q, k.R, k.k);
  std::string gaps;
  std::string last_state;
  for (std::size_t m = 0; m < k.mu.size(); ++m) {
    const KnownLoopResult r = closed_loop_known(plant, k.rho, k.mu[m], k.y0, s.t_start, s.t_end, s.integrator);
    if (useless(r.full)) {
      res.exit_code = kExitIntegration;
      res.files.clear();
      res.summary = s.id + ": integration failed: " + r.full.detail;
      return res;
    }
    const int np = r.plant_ss.order(), nc = r.controller_ss.order();
    std::ostringstream os;
    os << "t,y,y_reduced,rho,u\n";
    double gap = 0.0;
    for (std::size_t i = 0; i < r.full.size(); ++i) {
      const State& x = r.full.states[i];
      const double t = r.full.times[i];
      const double y = r.output.states[i][0], yr = r.reduced.states[i][0];
      const DensityValue rho = eval_density(k.rho, y, t);
      const double e = rho.is_finite() ? -rho.value() * y : std::numeric_limits<double>::quiet_NaN();
      double u = r.controller_ss.D * e;
      for (int j = 0; j < nc; ++j) u += r.controller_ss.C(j) * x[static_cast<std::size_t>(np + j)];
      gap = std::max(gap, std::abs(y - yr));
      os << fmt(t) << ',' << fmt(y) << ',' << fmt(yr) << ',' << fmt(density_number(rho)) << ',' << fmt(u) << '\n';
    }
    append_events(os, r.full);
    res.files.push_back({traj_name(s.id, m, k.mu.size()), os.str()});
    gaps += (gaps.empty() ? "" : ",") + ("mu=" + short_num(k.mu[m]) + ":" + short_num(gap));
    last_state = std::string(to_string(r.full.terminated_reason)) + " at t=" + short_num(r.full.t_end()) +
                 ", y=" + fmt(r.output.back()[0]);
  }
  res.summary = s.id + ": " + last_state + ", sup|y - y_reduced| " + gaps;
  return res;
}

inline RunResult run_adaptive_scenario(const Scenario& s) {
  RunResult res;
  const AdaptiveCase c = adaptive_case_from(s);
  const AdaptiveRun run = run_adaptive(c);
  if (useless(run.trajectory)) {
    res.exit_code = kExitIntegration;
    res.summary = s.id + ": integration failed: " + run.trajectory.detail;
    return res;
  }
  const TrueParameters tp = true_parameters(run.loop.plant(), run.loop.design().R_m());
  const LyapunovSeries mon = lyapunov_monitor(run.trajectory, run.loop, tp);
  const int nc = run.loop.layout().c_dim();
  std::ostringstream os;
  os << "t,y,u,rho,V_lyap,residual";
  for (int i = 0; i < nc; ++i) os << ",c_" << i + 1;
  for (const auto& b : c.boundaries) os << ',' << b.name;
  os << '\n';
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    const double t = run.trajectory.times[i];
    os << fmt(t) << ',' << fmt(run.output.states[i][0]) << ',' << fmt(run.u[i]) << ',' << fmt(run.rho[i]) << ','
       << fmt(mon.V[i]) << ',' << fmt(mon.residual[i]);
    const Eigen::VectorXd est = run.loop.estimate(run.trajectory.states[i]);
    for (int j = 0; j < nc; ++j) os << ',' << fmt(est(j));
    for (const auto& b : c.boundaries) os << ',' << fmt(b.signal(t));
    os << '\n';
  }
  append_events(os, run.trajectory);
  res.files.push_back({s.id + "_traj.csv", os.str()});
  std::string summary = s.id + ": " + std::string(to_string(run.trajectory.terminated_reason)) + " at t=" +
                        short_num(run.trajectory.t_end()) + ", y=" + fmt(run.output.back()[0]);
  if (c.constraint) {
    const std::size_t v = count_violations(*c.constraint, run.output);
    summary += v == 0 ? ", constraint=ok" : ", constraint=violated(" + std::to_string(v) + ")";
  }
  res.summary = std::move(summary);
  return res;
}

}  // namespace runner_detail

/// Applies command-line overrides, which win over the scenario's own values.
inline Scenario apply_overrides(Scenario s, const RunOptions& opt) {
  if (opt.rtol) s.integrator.rtol = *opt.rtol;
  if (opt.atol) s.integrator.atol = *opt.atol;
  if (opt.t_end) {
    if (!(*opt.t_end > s.t_start)) throw ConfigError("--t-end must exceed the scenario's t_start");
    s.t_end = *opt.t_end;
  }
  try {
    s.integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

/// Runs a scenario without touching the filesystem.
inline RunResult run_scenario(const Scenario& scenario, const RunOptions& opt = {}) {
  RunResult res;
  try {
    const Scenario s = apply_overrides(scenario, opt);
    switch (s.type) {
      case ScenarioType::Density: return runner_detail::run_density(s, opt);
      case ScenarioType::Known: return runner_detail::run_known(s);
      case ScenarioType::Adaptive: return runner_detail::run_adaptive_scenario(s);
    }
  } catch (const ConfigError& e) {
    res.exit_code = kExitConfig;
    res.summary = scenario.id + ": config error: " + e.what();
  } catch (const IntegrationError& e) {
    res.exit_code = kExitIntegration;
    res.summary = scenario.id + ": integration failed: " + e.what();
  } catch (const std::invalid_argument& e) {
    res.exit_code = kExitConfig;
    res.summary = scenario.id + ": config error: " + e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitIntegration;
    res.summary = scenario.id + ": run failed: " + e.what();
  }
  res.files.clear();
  return res;
}

/// Writes the files of a successful run. Returns false (and removes anything
/// already written) on an I/O failure.
inline bool write_outputs(const RunResult& res, const std::filesystem::path& dir, std::string* error = nullptr) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> written;
  for (const auto& f : res.files) {
    const auto path = dir / f.name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << f.content;
    out.close();
    if (!out) {
      for (const auto& p : written) std::filesystem::remove(p, ec);
      std::filesystem::remove(path, ec);
      if (error) *error = "cannot write " + path.string();
      return false;
    }
    written.push_back(path);
  }
  return true;
}

}  // namespace densys
