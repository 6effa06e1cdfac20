// blockalt command line: load a problem or scenario, run the coordinate
// solver or a baseline, and emit JSON plot data.
//
// Exit codes: 0 success, 1 usage or parse error, 2 infeasible/ill-posed input.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blockalt/baselines.hpp"
#include "blockalt/blockalt.hpp"

namespace {

using namespace blockalt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

int default_workers() {
  if (const char* env = std::getenv("BLOCKALT_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

struct CommonOpts {
  std::string problem_path;
  std::string method = "bai";
  int n_starts = 32;
  std::uint64_t seed = 0;
  int workers = default_workers();
  std::string out;
  std::string sampler = "hybrid";
  double x_tol = 1e-8;
  double cost_tol = 1e-10;
  int max_iters = 1000;
};

SampleMethod sampler_from_name(const std::string& name) {
  if (name == "hybrid") return SampleMethod::Hybrid;
  if (name == "grid") return SampleMethod::Grid;
  if (name == "lhs") return SampleMethod::Lhs;
  if (name == "monte_carlo") return SampleMethod::MonteCarlo;
  throw CLI::ValidationError("--sampler", "unknown sampler '" + name + "'");
}

SolverConfig solver_config(const CommonOpts& opt) {
  SolverConfig cfg;
  cfg.max_iterations = opt.max_iters;
  cfg.x_tol = opt.x_tol;
  cfg.cost_tol = opt.cost_tol;
  return cfg;
}

SolverReport run_method(const Problem& problem, const std::string& method,
                        const StartSet& starts, const CommonOpts& opt) {
  if (method == "bai") return run_multistart(problem, starts, solver_config(opt), opt.workers);
  MetaConfig meta;
  meta.seed = opt.seed;
  if (method == "ga") return ga_solve(problem, starts, meta);
  if (method == "pso") return pso_solve(problem, starts, meta);
  throw CLI::ValidationError("--method", "unknown method '" + method + "'");
}

int cmd_solve(const CommonOpts& opt) {
  Problem problem = load_problem(opt.problem_path);
  SamplerConfig sampler;
  sampler.n_points = opt.n_starts;
  sampler.seed = opt.seed;
  sampler.method = sampler_from_name(opt.sampler);
  StartSet starts;
  try {
    starts = sample(problem, sampler);
  } catch (const SamplerError& e) {
    std::fprintf(stderr, "no feasible start found: %s\n", e.what());
    return kExitInfeasible;
  }

  SolverReport report;
  try {
    report = run_method(problem, opt.method, starts, opt);
  } catch (const AllStartsFailedError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitInfeasible;
  }
  nlohmann::json j = to_json(report);
  j["n_starts"] = opt.n_starts;
  j["sampler"] = opt.sampler;
  if (!opt.out.empty()) write_json_file(opt.out, j);
  else std::cout << j.dump(2) << "\n";

  std::printf("best cost %.12g at (", report.best_cost);
  for (std::size_t i = 0; i < report.best_point.size(); ++i)
    std::printf("%s%.9g", i ? ", " : "", report.best_point[i]);
  std::printf(")\n");
  if (!report.best_feasible) {
    std::fprintf(stderr, "warning: best point is not feasible\n");
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_sample(const CommonOpts& opt) {
  Problem problem = load_problem(opt.problem_path);
  SamplerConfig sampler;
  sampler.n_points = opt.n_starts;
  sampler.seed = opt.seed;
  sampler.method = sampler_from_name(opt.sampler);
  StartSet starts;
  try {
    starts = sample(problem, sampler);
  } catch (const SamplerError& e) {
    std::fprintf(stderr, "sampler failed: %s\n", e.what());
    return kExitInfeasible;
  }
  nlohmann::json j = to_json(starts);
  if (!opt.out.empty()) write_json_file(opt.out, j);
  else std::cout << j.dump(2) << "\n";
  return kExitOk;
}

struct CompareOpts {
  CommonOpts common;
  std::vector<int> sweep{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  double success_cost_tol = 1e-4;
  double success_point_tol = 1e-3;
  int reference_n = 64;
};

int cmd_compare(const CompareOpts& opt) {
  Problem problem = load_problem(opt.common.problem_path);

  // Reference optimum: the coordinate solver from a large hybrid start set.
  SamplerConfig ref_sampler;
  ref_sampler.n_points = opt.reference_n;
  ref_sampler.seed = opt.common.seed;
  SolverReport reference;
  try {
    reference = run_multistart(problem, sample(problem, ref_sampler),
                               solver_config(opt.common), opt.common.workers);
  } catch (const SamplerError& e) {
    std::fprintf(stderr, "no feasible start found: %s\n", e.what());
    return kExitInfeasible;
  }

  auto success = [&](const SolverReport& r) {
    if (!r.best_feasible) return false;
    if (std::fabs(r.best_cost - reference.best_cost) > opt.success_cost_tol) return false;
    for (std::size_t i = 0; i < r.best_point.size(); ++i)
      if (std::fabs(r.best_point[i] - reference.best_point[i]) > opt.success_point_tol)
        return false;
    return true;
  };

  nlohmann::json sweep_rows = nlohmann::json::array();
  const std::vector<std::string> methods{"bai", "pso", "ga"};
  std::map<std::string, int> min_n;
  for (int n : opt.sweep) {
    SamplerConfig sc;
    sc.n_points = n;
    sc.seed = opt.common.seed;
    StartSet starts = sample(problem, sc);
    nlohmann::json row;
    row["n"] = n;
    for (const std::string& method : methods) {
      SolverReport r = run_method(problem, method, starts, opt.common);
      bool ok = success(r);
      row["methods"][method] = {{"success", ok},
                                {"best_cost", r.best_cost},
                                {"best_feasible", r.best_feasible},
                                {"wall_time_s", r.wall_time_s}};
      if (ok && !min_n.count(method)) min_n[method] = n;
    }
    sweep_rows.push_back(std::move(row));
  }

  nlohmann::json j;
  j["schema"] = "blockalt.comparison/1";
  j["seed"] = opt.common.seed;
  j["reference"] = {{"point", reference.best_point},
                    {"cost", reference.best_cost},
                    {"n_starts", opt.reference_n}};
  j["success_cost_tol"] = opt.success_cost_tol;
  j["success_point_tol"] = opt.success_point_tol;
  j["sweep"] = sweep_rows;
  for (const std::string& method : methods)
    j["min_n"][method] = min_n.count(method) ? nlohmann::json(min_n[method])
                                             : nlohmann::json(nullptr);
  if (!opt.common.out.empty()) write_json_file(opt.common.out, j);
  else std::cout << j.dump(2) << "\n";

  for (const std::string& method : methods) {
    if (min_n.count(method)) std::printf("%s reaches the reference at N = %d\n",
                                         method.c_str(), min_n[method]);
    else std::printf("%s never reached the reference in this sweep\n", method.c_str());
  }
  return kExitOk;
}

struct ControlOpts {
  std::string scenario_path;
  std::string controller = "both";  // osap | lqr | both
  std::string out_prefix = "telemetry";
  double duration = -1.0;  // override when >= 0
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_control(const ControlOpts& opt) {
  Scenario base = load_scenario(opt.scenario_path);
  if (opt.duration >= 0.0) base.duration_s = opt.duration;
  if (opt.seed_set) base.seed = opt.seed;

  std::vector<ControllerKind> kinds;
  if (opt.controller == "osap") kinds = {ControllerKind::Osap};
  else if (opt.controller == "lqr") kinds = {ControllerKind::Lqr};
  else if (opt.controller == "both") kinds = {ControllerKind::Osap, ControllerKind::Lqr};
  else {
    std::fprintf(stderr, "unknown controller '%s'\n", opt.controller.c_str());
    return kExitUsage;
  }

  for (ControllerKind kind : kinds) {
    Scenario s = base;
    s.controller = kind;
    Telemetry tel = run_closed_loop(s);
    const char* tag = kind == ControllerKind::Osap ? "osap" : "lqr";
    write_json_file(opt.out_prefix + "_" + tag + ".json", to_json(tel, s));
    write_text_file(opt.out_prefix + "_" + tag + ".csv", telemetry_csv(tel));
    double y_last = tel.size() ? tel.y.back() : s.t_amb_C;
    std::printf("%s: %zu ticks, %d rejected, final y %.2f C -> %s_{json,csv}\n", tag,
                tel.size(), tel.rejected_ticks, y_last,
                (opt.out_prefix + "_" + tag).c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block-alternating constrained optimization toolkit"};
  app.require_subcommand(1);

  CommonOpts solve_opt;
  CLI::App* solve_cmd = app.add_subcommand("solve", "minimize a problem file");
  solve_cmd->add_option("problem", solve_opt.problem_path, "problem file")->required();
  solve_cmd->add_option("--method", solve_opt.method, "bai | ga | pso");
  solve_cmd->add_option("--n", solve_opt.n_starts, "number of start points")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", solve_opt.seed, "sampler seed");
  solve_cmd->add_option("--workers", solve_opt.workers, "parallel solve workers");
  solve_cmd->add_option("--out", solve_opt.out, "report JSON path");
  solve_cmd->add_option("--sampler", solve_opt.sampler,
                        "hybrid | grid | lhs | monte_carlo");
  solve_cmd->add_option("--x-tol", solve_opt.x_tol, "coordinate tolerance");
  solve_cmd->add_option("--cost-tol", solve_opt.cost_tol, "cost tolerance");
  solve_cmd->add_option("--max-iters", solve_opt.max_iters, "iteration cap");

  CommonOpts sample_opt;
  CLI::App* sample_cmd = app.add_subcommand("sample", "emit a start set as JSON");
  sample_cmd->add_option("problem", sample_opt.problem_path, "problem file")->required();
  sample_cmd->add_option("--n", sample_opt.n_starts, "number of points")
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample_opt.seed, "sampler seed");
  sample_cmd->add_option("--sampler", sample_opt.sampler,
                         "hybrid | grid | lhs | monte_carlo");
  sample_cmd->add_option("--out", sample_opt.out, "output JSON path");

  CompareOpts compare_opt;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "sweep start counts across bai, pso, ga");
  compare_cmd->add_option("problem", compare_opt.common.problem_path, "problem file")
      ->required();
  compare_cmd->add_option("--seed", compare_opt.common.seed, "sampler seed");
  compare_cmd->add_option("--workers", compare_opt.common.workers, "solve workers");
  compare_cmd->add_option("--out", compare_opt.common.out, "comparison JSON path");
  compare_cmd->add_option("--sweep", compare_opt.sweep, "start counts to test");
  compare_cmd->add_option("--success-cost-tol", compare_opt.success_cost_tol,
                          "cost tolerance against the reference");
  compare_cmd->add_option("--success-point-tol", compare_opt.success_point_tol,
                          "per-coordinate tolerance against the reference");
  compare_cmd->add_option("--reference-n", compare_opt.reference_n,
                          "start count for the reference solve");

  ControlOpts control_opt;
  CLI::App* control_cmd =
      app.add_subcommand("control", "run the thermal closed-loop scenario");
  control_cmd->add_option("scenario", control_opt.scenario_path, "scenario file")
      ->required();
  control_cmd->add_option("--controller", control_opt.controller, "osap | lqr | both");
  control_cmd->add_option("--out-prefix", control_opt.out_prefix,
                          "telemetry file prefix");
  control_cmd->add_option("--duration", control_opt.duration, "override duration [s]");
  control_cmd->add_option("--seed", control_opt.seed, "override seed")
      ->each([&](const std::string&) { control_opt.seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_opt);
    if (sample_cmd->parsed()) return cmd_sample(sample_opt);
    if (compare_cmd->parsed()) return cmd_compare(compare_opt);
    if (control_cmd->parsed()) return cmd_control(control_opt);
  } catch (const FileFormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const InfeasibleStartError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  } catch (const SamplerError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
