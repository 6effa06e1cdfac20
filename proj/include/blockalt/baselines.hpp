#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <vector>

#include "blockalt/multistart.hpp"
#include "blockalt/rng.hpp"

// Population baselines consuming the same start sets as the coordinate
// solver: a generational GA (tournament selection, whole-arithmetic
// crossover, Gaussian mutation clipped to the box) and global-best PSO with
// the usual constriction-style coefficients. Constraints enter through a
// static quadratic penalty; the reported best is the cheapest individual
// that was actually feasible, and a run that never saw a feasible individual
// is flagged instead of silently returning a violated point.

namespace blockalt {

struct MetaConfig {
  int max_iterations = 200;
  double penalty_weight = 1e6;

  // GA
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;        // per gene
  double mutation_sigma_frac = 0.05; // of the box width, per dimension
  int tournament_size = 2;

  // PSO
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double velocity_clamp_frac = 0.20; // of the box width, per dimension

  std::uint64_t seed = 0;
  double feas_tol = Problem::kDefaultFeasTol;
  double cost_tol = 1e-10;  // report tie tolerance, mirrors SolverConfig
};

namespace detail {

inline double penalized_fitness(const Problem& p, const Point& x,
                                double penalty_weight) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::optional<double> c = p.try_cost_at(x);
  if (!c) return inf;
  double penalty = 0.0;
  for (const Expr& g : p.constraints()) {
    std::optional<double> v = g.try_eval(x);
    if (!v) return inf;
    if (*v > 0.0) penalty += (*v) * (*v);
  }
  return *c + penalty_weight * penalty;
}

struct BestTracker {
  Point point;
  double cost = std::numeric_limits<double>::infinity();
  double fitness = std::numeric_limits<double>::infinity();
  bool has_feasible = false;

  // Keeps the cheapest feasible point seen; while nothing feasible has shown
  // up yet, tracks the best penalized fitness as a fallback.
  void offer(const Problem& p, const Point& x, double fitness_value,
             double feas_tol) {
    std::optional<double> c = p.try_cost_at(x);
    bool feasible = c && p.check_feasible(x, feas_tol).feasible;
    if (feasible) {
      if (!has_feasible || *c < cost) {
        has_feasible = true;
        cost = *c;
        fitness = fitness_value;
        point = x;
      }
    } else if (!has_feasible && fitness_value < fitness) {
      fitness = fitness_value;
      cost = fitness_value;
      point = x;
    }
  }
};

inline void record_generation(RunTrace& trace, int generation,
                              const BestTracker& best) {
  trace.iterations.push_back({generation, 0, best.point, best.cost});
}

}  // namespace detail

inline SolverReport ga_solve(const Problem& p, const StartSet& starts,
                             const MetaConfig& cfg = {}) {
  if (starts.points.empty()) throw std::invalid_argument("empty population");
  const auto t0 = std::chrono::steady_clock::now();
  const int n = p.n();
  const int pop_size = static_cast<int>(starts.points.size());
  SplitMix64 rng = substream(cfg.seed, 0x6741ULL);  // 'gA'

  std::vector<double> sigma(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    const Bounds& b = p.bounds()[static_cast<std::size_t>(d)];
    sigma[static_cast<std::size_t>(d)] = cfg.mutation_sigma_frac * (b.hi - b.lo);
  }

  std::vector<Point> pop = starts.points;
  std::vector<double> fitness(static_cast<std::size_t>(pop_size));
  detail::BestTracker best;
  RunTrace trace;

  auto evaluate = [&](int generation) {
    for (int i = 0; i < pop_size; ++i) {
      fitness[static_cast<std::size_t>(i)] =
          detail::penalized_fitness(p, pop[static_cast<std::size_t>(i)], cfg.penalty_weight);
      best.offer(p, pop[static_cast<std::size_t>(i)], fitness[static_cast<std::size_t>(i)],
                 cfg.feas_tol);
    }
    detail::record_generation(trace, generation, best);
  };
  evaluate(0);

  auto tournament = [&]() -> int {
    int winner = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pop_size)));
    for (int t = 1; t < cfg.tournament_size; ++t) {
      int rival = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pop_size)));
      if (fitness[static_cast<std::size_t>(rival)] < fitness[static_cast<std::size_t>(winner)])
        winner = rival;
    }
    return winner;
  };

  std::vector<Point> next(static_cast<std::size_t>(pop_size));
  for (int gen = 1; gen <= cfg.max_iterations; ++gen) {
    for (int i = 0; i < pop_size; ++i) {
      const Point& a = pop[static_cast<std::size_t>(tournament())];
      const Point& b = pop[static_cast<std::size_t>(tournament())];
      Point child(static_cast<std::size_t>(n));
      double lambda = rng.next_double();
      bool cross = rng.next_double() < cfg.crossover_rate;
      for (int d = 0; d < n; ++d) {
        double v = cross ? lambda * a[static_cast<std::size_t>(d)] +
                               (1.0 - lambda) * b[static_cast<std::size_t>(d)]
                         : a[static_cast<std::size_t>(d)];
        child[static_cast<std::size_t>(d)] = v;
      }
      for (int d = 0; d < n; ++d) {
        if (rng.next_double() < cfg.mutation_rate)
          child[static_cast<std::size_t>(d)] +=
              sigma[static_cast<std::size_t>(d)] * rng.next_normal();
        const Bounds& bd = p.bounds()[static_cast<std::size_t>(d)];
        child[static_cast<std::size_t>(d)] =
            std::clamp(child[static_cast<std::size_t>(d)], bd.lo, bd.hi);
      }
      next[static_cast<std::size_t>(i)] = std::move(child);
    }
    pop.swap(next);
    evaluate(gen);
  }

  SolverReport report;
  report.method = "ga";
  report.seed = cfg.seed;
  report.best_point = best.point;
  report.best_cost = best.cost;
  report.best_feasible = best.has_feasible;
  report.winner_index = 0;
  StartOutcome outcome;
  outcome.start = starts.points.front();
  outcome.final = best.point;
  outcome.cost = best.cost;
  outcome.iterations = cfg.max_iterations;
  report.per_start.push_back(std::move(outcome));
  report.winner_trace = std::move(trace);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

inline SolverReport pso_solve(const Problem& p, const StartSet& starts,
                              const MetaConfig& cfg = {}) {
  if (starts.points.empty()) throw std::invalid_argument("empty swarm");
  const auto t0 = std::chrono::steady_clock::now();
  const int n = p.n();
  const int swarm_size = static_cast<int>(starts.points.size());
  SplitMix64 rng = substream(cfg.seed, 0x7053ULL);  // 'pS'

  std::vector<double> vmax(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    const Bounds& b = p.bounds()[static_cast<std::size_t>(d)];
    vmax[static_cast<std::size_t>(d)] = cfg.velocity_clamp_frac * (b.hi - b.lo);
  }

  std::vector<Point> pos = starts.points;
  std::vector<Point> vel(static_cast<std::size_t>(swarm_size),
                         Point(static_cast<std::size_t>(n), 0.0));
  std::vector<Point> pbest = pos;
  std::vector<double> pbest_fit(static_cast<std::size_t>(swarm_size));
  detail::BestTracker best;
  RunTrace trace;

  int gbest = 0;
  for (int i = 0; i < swarm_size; ++i) {
    pbest_fit[static_cast<std::size_t>(i)] =
        detail::penalized_fitness(p, pos[static_cast<std::size_t>(i)], cfg.penalty_weight);
    best.offer(p, pos[static_cast<std::size_t>(i)], pbest_fit[static_cast<std::size_t>(i)],
               cfg.feas_tol);
    if (pbest_fit[static_cast<std::size_t>(i)] < pbest_fit[static_cast<std::size_t>(gbest)])
      gbest = i;
  }
  detail::record_generation(trace, 0, best);

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    for (int i = 0; i < swarm_size; ++i) {
      Point& x = pos[static_cast<std::size_t>(i)];
      Point& v = vel[static_cast<std::size_t>(i)];
      for (int d = 0; d < n; ++d) {
        double r1 = rng.next_double();
        double r2 = rng.next_double();
        double pull_personal =
            pbest[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] -
            x[static_cast<std::size_t>(d)];
        double pull_global =
            pbest[static_cast<std::size_t>(gbest)][static_cast<std::size_t>(d)] -
            x[static_cast<std::size_t>(d)];
        double nv = cfg.inertia * v[static_cast<std::size_t>(d)] +
                    cfg.cognitive * r1 * pull_personal +
                    cfg.social * r2 * pull_global;
        nv = std::clamp(nv, -vmax[static_cast<std::size_t>(d)],
                        vmax[static_cast<std::size_t>(d)]);
        v[static_cast<std::size_t>(d)] = nv;
        const Bounds& b = p.bounds()[static_cast<std::size_t>(d)];
        x[static_cast<std::size_t>(d)] =
            std::clamp(x[static_cast<std::size_t>(d)] + nv, b.lo, b.hi);
      }
      double fit = detail::penalized_fitness(p, x, cfg.penalty_weight);
      best.offer(p, x, fit, cfg.feas_tol);
      if (fit < pbest_fit[static_cast<std::size_t>(i)]) {
        pbest_fit[static_cast<std::size_t>(i)] = fit;
        pbest[static_cast<std::size_t>(i)] = x;
      }
      if (fit < pbest_fit[static_cast<std::size_t>(gbest)]) gbest = i;
    }
    detail::record_generation(trace, iter, best);
  }

  SolverReport report;
  report.method = "pso";
  report.seed = cfg.seed;
  report.best_point = best.point;
  report.best_cost = best.cost;
  report.best_feasible = best.has_feasible;
  report.winner_index = 0;
  StartOutcome outcome;
  outcome.start = starts.points.front();
  outcome.final = best.point;
  outcome.cost = best.cost;
  outcome.iterations = cfg.max_iterations;
  report.per_start.push_back(std::move(outcome));
  report.winner_trace = std::move(trace);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace blockalt
