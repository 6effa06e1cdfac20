#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "blockalt/sampling.hpp"
#include "blockalt/solver.hpp"

// Independent solves from every start point, optionally spread over worker
// threads. Aggregation is a deterministic reduction over start indices, so
// the report is identical for any worker count (wall time aside): the winner
// is the lowest final cost, ties within cost_tol broken by fewer iterations,
// then by lower start index.

namespace blockalt {

struct StartOutcome {
  Point start;
  Point final;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool truncated = false;
  bool failed = false;
  std::string error;
};

struct SolverReport {
  std::string method = "bai";
  Point best_point;
  double best_cost = std::numeric_limits<double>::infinity();
  int winner_index = -1;
  bool best_feasible = true;
  std::vector<StartOutcome> per_start;
  RunTrace winner_trace;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

struct AllStartsFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline SolverReport run_multistart(const Problem& p, const StartSet& starts,
                                   const SolverConfig& cfg = {}, int workers = 1) {
  if (starts.points.empty())
    throw std::invalid_argument("start set is empty");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");

  const auto t0 = std::chrono::steady_clock::now();
  const int n_starts = static_cast<int>(starts.points.size());
  std::vector<StartOutcome> outcomes(static_cast<std::size_t>(n_starts));
  std::vector<RunTrace> traces(static_cast<std::size_t>(n_starts));

  auto solve_one = [&](int i) {
    StartOutcome& out = outcomes[static_cast<std::size_t>(i)];
    out.start = starts.points[static_cast<std::size_t>(i)];
    try {
      SolveResult r = solve(p, out.start, cfg);
      out.final = std::move(r.x);
      out.cost = r.cost;
      out.iterations = r.iterations;
      out.truncated = r.truncated;
      traces[static_cast<std::size_t>(i)] = std::move(r.trace);
    } catch (const std::exception& e) {
      out.failed = true;
      out.error = e.what();
    }
  };

  if (workers == 1 || n_starts == 1) {
    for (int i = 0; i < n_starts; ++i) solve_one(i);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n_starts) return;
        solve_one(i);
      }
    };
    std::vector<std::thread> pool;
    int spawn = std::min(workers, n_starts);
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SolverReport report;
  report.seed = starts.seed;
  report.per_start = std::move(outcomes);
  for (int i = 0; i < n_starts; ++i) {
    const StartOutcome& out = report.per_start[static_cast<std::size_t>(i)];
    if (out.failed) continue;
    bool better = false;
    if (report.winner_index < 0) {
      better = true;
    } else if (out.cost < report.best_cost - cfg.cost_tol) {
      better = true;
    } else if (out.cost <= report.best_cost + cfg.cost_tol) {
      const StartOutcome& cur =
          report.per_start[static_cast<std::size_t>(report.winner_index)];
      better = out.iterations < cur.iterations;
    }
    if (better) {
      report.winner_index = i;
      report.best_cost = out.cost;
    }
  }
  if (report.winner_index < 0)
    throw AllStartsFailedError("every start failed to solve");
  report.best_point =
      report.per_start[static_cast<std::size_t>(report.winner_index)].final;
  report.best_cost =
      report.per_start[static_cast<std::size_t>(report.winner_index)].cost;
  report.winner_trace = std::move(traces[static_cast<std::size_t>(report.winner_index)]);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace blockalt
