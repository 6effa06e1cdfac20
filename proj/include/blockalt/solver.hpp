#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockalt/scalar.hpp"

// Cyclic block-alternating minimization: visit coordinates 1..n in order,
// solve the constrained 1-D restriction for the visited coordinate, update
// it, repeat. Feasibility of the iterate is preserved by construction and
// the cost sequence is non-increasing because a coordinate only moves when
// the 1-D solve strictly improves on the incoming value.

namespace blockalt {

struct SolverConfig {
  int max_iterations = 1000;  // counted in coordinate updates
  double x_tol = 1e-8;        // per-coordinate movement threshold
  double cost_tol = 1e-10;    // cost improvement threshold
  ScalarOptions scalar{};     // pass-through tolerances for the 1-D solves
};

struct InfeasibleStartError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IterationRecord {
  int k = 0;      // update counter; 0 is the initial point
  int coord = 0;  // 1-based coordinate updated at this step; 0 for the initial record
  Point point;
  double cost = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  bool truncated = false;

  int updates() const { return static_cast<int>(iterations.size()) - 1; }
  int full_cycles(int n) const { return (updates() + n - 1) / n; }
};

struct CoordinateStep {
  Point x;
  double cost = 0.0;
  bool moved = false;
  bool probe_warning = false;  // the 1-D solve saw only domain faults
};

struct SolveResult {
  Point x;
  double cost = 0.0;
  int iterations = 0;  // coordinate updates performed
  bool truncated = false;
  RunTrace trace;
};

// One coordinate update. The incoming point must be feasible; the returned
// point differs from it in at most coordinate `coord`. The incoming value is
// kept whenever the 1-D minimum fails to beat it by more than cost_tol
// (flat restrictions stay put, which keeps convergence detection honest).
inline CoordinateStep coordinate_step(const Problem& p, const Point& x, int coord,
                                      const SolverConfig& cfg = {},
                                      double incoming_cost = std::nan("")) {
  if (coord < 1 || coord > p.n())
    throw std::invalid_argument("coordinate index out of range");
  CoordinateStep step;
  step.x = x;
  if (std::isnan(incoming_cost)) {
    std::optional<double> c = p.try_cost_at(x);
    incoming_cost = c ? *c : std::numeric_limits<double>::infinity();
  }
  step.cost = incoming_cost;

  Interval iv = feasible_interval(p, x, coord, cfg.scalar);
  ScalarSolution sol = minimize_1d(p, x, coord, iv, cfg.scalar);
  step.probe_warning = sol.all_probes_failed;
  if (sol.all_probes_failed) return step;

  if (sol.cost < incoming_cost - cfg.cost_tol &&
      sol.value != x[static_cast<std::size_t>(coord - 1)]) {
    step.x[static_cast<std::size_t>(coord - 1)] = sol.value;
    step.cost = sol.cost;
    step.moved = true;
  }
  return step;
}

// Full solve from a feasible start. Iterates k = 1, 2, ...; the coordinate
// visited at update k is ((k - 1) mod n) + 1. Stops once a window of n
// consecutive updates moved no coordinate by more than x_tol and decreased
// the cost by no more than cost_tol, or at max_iterations (then the result
// carries a truncation flag instead of failing).
inline SolveResult solve(const Problem& p, const Point& x0,
                         const SolverConfig& cfg = {}) {
  const int n = p.n();
  if (cfg.max_iterations < n)
    throw std::invalid_argument("max_iterations must be at least the variable count");
  if (!(cfg.x_tol > 0.0) || !(cfg.cost_tol > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (static_cast<int>(x0.size()) != n)
    throw std::invalid_argument("start point has wrong dimension");

  FeasibilityVerdict verdict = p.check_feasible(x0, cfg.scalar.feas_tol);
  if (!verdict.feasible)
    throw InfeasibleStartError("start point is infeasible (worst violation " +
                               std::to_string(verdict.worst_violation) + ")");

  SolveResult result;
  result.x = x0;
  std::optional<double> c0 = p.try_cost_at(x0);
  if (!c0) throw DomainError("cost undefined at start point", x0.empty() ? 0.0 : x0[0]);
  result.cost = *c0;

  result.trace.iterations.push_back({0, 0, x0, result.cost});
  std::vector<double> deltas;  // per-update max coordinate movement

  bool converged = false;
  int k = 0;
  while (k < cfg.max_iterations) {
    ++k;
    int coord = ((k - 1) % n) + 1;
    CoordinateStep step = coordinate_step(p, result.x, coord, cfg, result.cost);
    double delta = std::fabs(step.x[static_cast<std::size_t>(coord - 1)] -
                             result.x[static_cast<std::size_t>(coord - 1)]);
    result.x = std::move(step.x);
    result.cost = step.cost;
    result.trace.iterations.push_back({k, coord, result.x, result.cost});
    deltas.push_back(delta);

    if (k >= n) {
      double max_move = 0.0;
      for (int j = k - n; j < k; ++j) max_move = std::max(max_move, deltas[static_cast<std::size_t>(j)]);
      double cost_drop = result.trace.iterations[static_cast<std::size_t>(k - n)].cost - result.cost;
      if (max_move <= cfg.x_tol && cost_drop <= cfg.cost_tol) {
        converged = true;
        break;
      }
    }
  }

  result.iterations = k;
  result.truncated = !converged;
  result.trace.truncated = result.truncated;
  return result;
}

}  // namespace blockalt
