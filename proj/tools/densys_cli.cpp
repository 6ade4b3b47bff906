// densys: list and run density-system scenarios.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "densys/densys.hpp"

namespace {

bool looks_like_path(const std::string& target) {
  return target.find('/') != std::string::npos || target.ends_with(".json") || std::filesystem::is_regular_file(target);
}

int run_target(const std::string& target, const densys::RunOptions& opt) {
  std::vector<densys::Scenario> scenarios;
  if (looks_like_path(target)) {
    try {
      scenarios.push_back(densys::parse_config(target));
    } catch (const densys::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return densys::kExitConfig;
    }
  } else {
    scenarios = densys::resolve_scenarios(target);
    if (scenarios.empty()) {
      std::cerr << "config error: unknown scenario \"" << target << "\" (see `densys list`)\n";
      return densys::kExitConfig;
    }
  }
  int worst = densys::kExitOk;
  for (const auto& s : scenarios) {
    const densys::RunResult res = densys::run_scenario(s, opt);
    if (res.exit_code != densys::kExitOk) {
      std::cerr << res.summary << '\n';
      worst = std::max(worst, res.exit_code);
      continue;
    }
    std::string err;
    if (!densys::write_outputs(res, opt.out_dir, &err)) {
      std::cerr << s.id << ": " << err << '\n';
      worst = std::max(worst, static_cast<int>(densys::kExitIo));
      continue;
    }
    std::cout << res.summary << '\n';
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-system simulator: figure scenarios, sweeps, region maps and adaptive loops"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List built-in scenarios");

  densys::RunOptions opt;
  std::string target;
  std::string out_dir = ".";
  double rtol = 0, atol = 0, t_end = 0;
  auto* run = app.add_subcommand("run", "Run a built-in scenario (or group prefix) or a JSON config file");
  run->add_option("target", target, "Scenario id, group prefix, or path to a .json config")->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--jobs", opt.jobs, "Worker threads for multi-seed sweeps")->check(CLI::PositiveNumber);
  auto* o_rtol = run->add_option("--rtol", rtol, "Relative tolerance override")->check(CLI::PositiveNumber);
  auto* o_atol = run->add_option("--atol", atol, "Absolute tolerance override")->check(CLI::PositiveNumber);
  auto* o_tend = run->add_option("--t-end", t_end, "Final time override");

  std::string dump_target;
  auto* dump = app.add_subcommand("dump", "Print the canonical JSON config of a built-in scenario");
  dump->add_option("id", dump_target, "Scenario id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : densys::kExitConfig;
  }

  if (*list) {
    for (const auto& s : densys::builtin_scenarios()) std::cout << s.id << '\t' << s.figure << '\t' << s.description << '\n';
    return 0;
  }
  if (*dump) {
    const auto s = densys::find_scenario(dump_target);
    if (!s) {
      std::cerr << "config error: unknown scenario \"" << dump_target << "\"\n";
      return densys::kExitConfig;
    }
    std::cout << densys::serialize_scenario(*s);
    return 0;
  }
  opt.out_dir = out_dir;
  if (*o_rtol) opt.rtol = rtol;
  if (*o_atol) opt.atol = atol;
  if (*o_tend) opt.t_end = t_end;
  return run_target(target, opt);
}
