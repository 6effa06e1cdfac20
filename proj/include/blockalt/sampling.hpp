#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockalt/problem.hpp"
#include "blockalt/rng.hpp"

// Feasible-start generation. Four methods share one entry point:
//   grid        - lattice over the box, infeasible nodes dropped, the N
//                 cheapest survivors kept
//   lhs         - Latin hypercube: one uniform sample per equal stratum and
//                 dimension, with independent per-dimension permutations
//   monte_carlo - uniform box rejection sampling
//   hybrid      - round(N/2) cheapest grid survivors (half-to-even) plus
//                 N - round(N/2) LHS points
// Everything is a pure function of (problem, config), so identical inputs
// reproduce identical start sets.

namespace blockalt {

enum class SampleMethod { Hybrid, Grid, Lhs, MonteCarlo };

enum class Provenance { Grid, Lhs, MonteCarlo };

struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplerConfig {
  int n_points = 1;
  SampleMethod method = SampleMethod::Hybrid;
  std::uint64_t seed = 0;
  int grid_candidate_cap = 100000;  // lattice size budget, all dimensions combined
  int rejection_cap = 100;          // retry budget per required point
  double feas_tol = Problem::kDefaultFeasTol;
};

struct StartSet {
  std::vector<Point> points;
  std::vector<Provenance> provenance;
  SampleMethod method = SampleMethod::Hybrid;
  std::uint64_t seed = 0;
  bool grid_shortfall = false;  // hybrid wanted more grid points than survived
  bool lhs_fallback = false;    // some LHS slots fell back to grid candidates
};

inline const char* to_string(SampleMethod m) {
  switch (m) {
    case SampleMethod::Hybrid: return "hybrid";
    case SampleMethod::Grid: return "grid";
    case SampleMethod::Lhs: return "lhs";
    case SampleMethod::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Grid: return "grid";
    case Provenance::Lhs: return "lhs";
    case Provenance::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

// round(N/2) with ties broken to the nearest even integer, so N = 5 gives 2
// and N = 7 gives 4 on every platform.
inline int half_round_even(int n) {
  int half = n / 2;
  if (n % 2 == 0) return half;
  return (half % 2 == 0) ? half : half + 1;
}

namespace detail {

// Largest m with m^n <= cap, floored at 3 points per dimension.
inline int grid_resolution(int n_dims, long long cap) {
  auto fits = [&](long long m) {
    long long product = 1;
    for (int i = 0; i < n_dims; ++i) {
      if (product > cap / m) return false;
      product *= m;
    }
    return product <= cap;
  };
  long long m = 1;
  while (fits(m + 1)) ++m;
  return static_cast<int>(std::max<long long>(3, m));
}

}  // namespace detail

struct GridCandidate {
  Point point;
  double cost;
};

// Lattice candidates: m equally spaced values per dimension spanning
// [lo, hi] inclusive, infeasible nodes discarded, survivors returned with
// their costs. Empty result means no lattice node was feasible.
inline std::vector<GridCandidate> grid_candidates(const Problem& p,
                                                  const SamplerConfig& cfg = {}) {
  const int n = p.n();
  const int m = detail::grid_resolution(n, cfg.grid_candidate_cap);
  long long total = 1;
  for (int i = 0; i < n; ++i) {
    total *= m;
    if (total > std::max<long long>(cfg.grid_candidate_cap, 2'000'000))
      throw SamplerError("grid lattice too large for this dimension count");
  }

  std::vector<GridCandidate> out;
  Point x(static_cast<std::size_t>(n));
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  auto value_at = [&](int dim, int step) {
    const Bounds& b = p.bounds()[static_cast<std::size_t>(dim)];
    if (m == 1) return b.lo;
    return b.lo + (b.hi - b.lo) * static_cast<double>(step) / static_cast<double>(m - 1);
  };
  for (long long count = 0; count < total; ++count) {
    for (int d = 0; d < n; ++d) x[static_cast<std::size_t>(d)] = value_at(d, idx[static_cast<std::size_t>(d)]);
    if (p.check_feasible(x, cfg.feas_tol).feasible) {
      std::optional<double> c = p.try_cost_at(x);
      if (c) out.push_back({x, *c});
    }
    for (int d = n - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < m) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return out;
}

// One raw Latin hypercube draw: `count` points, no feasibility filtering.
// Per dimension, an independent uniform permutation assigns each point a
// stratum and the point is placed uniformly inside it. Consumption order of
// the generator is fixed: per dimension, first the shuffle, then one uniform
// per point.
inline std::vector<Point> lhs_raw(const std::vector<Bounds>& bounds, int count,
                                  SplitMix64& rng) {
  const int n = static_cast<int>(bounds.size());
  std::vector<Point> pts(static_cast<std::size_t>(count),
                         Point(static_cast<std::size_t>(n)));
  std::vector<int> strata(static_cast<std::size_t>(count));
  for (int d = 0; d < n; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    for (int i = count - 1; i > 0; --i) {
      int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
      std::swap(strata[static_cast<std::size_t>(i)], strata[static_cast<std::size_t>(j)]);
    }
    const Bounds& b = bounds[static_cast<std::size_t>(d)];
    double width = (b.hi - b.lo) / static_cast<double>(count);
    for (int i = 0; i < count; ++i) {
      double u = rng.next_double();
      pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] =
          b.lo + (static_cast<double>(strata[static_cast<std::size_t>(i)]) + u) * width;
    }
  }
  return pts;
}

// Feasible LHS points. Infeasible raw samples are dropped and whole fresh
// draws (attempt k uses substream(seed, k)) top the pool up, capped at
// rejection_cap attempts. Any remaining shortfall falls back per point to
// the nearest feasible grid candidate; if that is impossible the sampler
// fails. `fallback_used`, when given, reports how many points fell back.
inline std::vector<Point> lhs(const Problem& p, int count, std::uint64_t seed,
                              const SamplerConfig& cfg = {},
                              int* fallback_used = nullptr) {
  if (fallback_used) *fallback_used = 0;
  if (count <= 0) return {};
  std::vector<Point> pool;
  std::vector<Point> last_rejected;
  for (int attempt = 0; attempt < std::max(1, cfg.rejection_cap); ++attempt) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(attempt));
    std::vector<Point> raw = lhs_raw(p.bounds(), count, rng);
    last_rejected.clear();
    for (Point& pt : raw) {
      if (static_cast<int>(pool.size()) >= count) break;
      if (p.check_feasible(pt, cfg.feas_tol).feasible)
        pool.push_back(std::move(pt));
      else
        last_rejected.push_back(std::move(pt));
    }
    if (static_cast<int>(pool.size()) >= count) return pool;
  }

  // Shortfall: substitute the nearest feasible lattice node for each raw
  // sample that was rejected on the final attempt.
  std::vector<GridCandidate> grid = grid_candidates(p, cfg);
  if (grid.empty())
    throw SamplerError("LHS could not reach " + std::to_string(count) +
                       " feasible points within the rejection cap and no grid "
                       "fallback exists");
  std::size_t next_reject = 0;
  while (static_cast<int>(pool.size()) < count) {
    const Point& anchor = next_reject < last_rejected.size()
                              ? last_rejected[next_reject]
                              : grid.front().point;
    ++next_reject;
    const GridCandidate* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const GridCandidate& g : grid) {
      double d = 0.0;
      for (std::size_t i = 0; i < anchor.size(); ++i) {
        double diff = g.point[i] - anchor[i];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = &g;
      }
    }
    pool.push_back(best->point);
    if (fallback_used) ++(*fallback_used);
  }
  return pool;
}

// Uniform rejection sampler. Point j draws from substream(seed, j), so one
// point's rejection count never perturbs its siblings.
inline std::vector<Point> monte_carlo(const Problem& p, int count,
                                      std::uint64_t seed,
                                      const SamplerConfig& cfg = {}) {
  if (count <= 0) return {};
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  const int n = p.n();
  for (int j = 0; j < count; ++j) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(j));
    bool found = false;
    for (int attempt = 0; attempt < std::max(1, cfg.rejection_cap); ++attempt) {
      Point x(static_cast<std::size_t>(n));
      for (int d = 0; d < n; ++d) {
        const Bounds& b = p.bounds()[static_cast<std::size_t>(d)];
        x[static_cast<std::size_t>(d)] = rng.next_in(b.lo, b.hi);
      }
      if (p.check_feasible(x, cfg.feas_tol).feasible) {
        out.push_back(std::move(x));
        found = true;
        break;
      }
    }
    if (!found)
      throw SamplerError("Monte Carlo sampling exhausted the rejection cap at point " +
                         std::to_string(j));
  }
  return out;
}

// The hybrid start set: cheapest round(N/2) grid survivors (cost ties broken
// by lexicographic point order) plus LHS for the remainder. A grid shortfall
// is backfilled with extra LHS points and flagged.
inline StartSet hybrid(const Problem& p, const SamplerConfig& cfg) {
  StartSet set;
  set.method = SampleMethod::Hybrid;
  set.seed = cfg.seed;
  const int want_grid = half_round_even(cfg.n_points);

  std::vector<GridCandidate> grid;
  if (want_grid > 0) grid = grid_candidates(p, cfg);
  std::sort(grid.begin(), grid.end(), [](const GridCandidate& a, const GridCandidate& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.point < b.point;
  });
  const int got_grid = std::min<int>(want_grid, static_cast<int>(grid.size()));
  set.grid_shortfall = got_grid < want_grid;

  for (int i = 0; i < got_grid; ++i) {
    set.points.push_back(grid[static_cast<std::size_t>(i)].point);
    set.provenance.push_back(Provenance::Grid);
  }
  int want_lhs = cfg.n_points - got_grid;
  int fallback = 0;
  std::vector<Point> tail = lhs(p, want_lhs, cfg.seed, cfg, &fallback);
  set.lhs_fallback = fallback > 0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    // Points that fell back to lattice nodes are labelled honestly.
    bool fell_back = i >= tail.size() - static_cast<std::size_t>(fallback);
    set.points.push_back(std::move(tail[i]));
    set.provenance.push_back(fell_back ? Provenance::Grid : Provenance::Lhs);
  }
  return set;
}

// Dispatcher for the four methods. Every returned point is feasible.
inline StartSet sample(const Problem& p, const SamplerConfig& cfg) {
  if (cfg.n_points < 1) throw std::invalid_argument("n_points must be at least 1");
  if (cfg.grid_candidate_cap < 1 || cfg.rejection_cap < 1)
    throw std::invalid_argument("sampler caps must be at least 1");

  StartSet set;
  set.method = cfg.method;
  set.seed = cfg.seed;
  switch (cfg.method) {
    case SampleMethod::Hybrid:
      return hybrid(p, cfg);
    case SampleMethod::Grid: {
      std::vector<GridCandidate> grid = grid_candidates(p, cfg);
      if (static_cast<int>(grid.size()) < cfg.n_points)
        throw SamplerError("grid produced only " + std::to_string(grid.size()) +
                           " feasible candidates of " + std::to_string(cfg.n_points) +
                           " requested");
      std::sort(grid.begin(), grid.end(),
                [](const GridCandidate& a, const GridCandidate& b) {
                  if (a.cost != b.cost) return a.cost < b.cost;
                  return a.point < b.point;
                });
      for (int i = 0; i < cfg.n_points; ++i) {
        set.points.push_back(grid[static_cast<std::size_t>(i)].point);
        set.provenance.push_back(Provenance::Grid);
      }
      return set;
    }
    case SampleMethod::Lhs: {
      int fallback = 0;
      std::vector<Point> pts = lhs(p, cfg.n_points, cfg.seed, cfg, &fallback);
      set.lhs_fallback = fallback > 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        bool fell_back = i >= pts.size() - static_cast<std::size_t>(fallback);
        set.points.push_back(std::move(pts[i]));
        set.provenance.push_back(fell_back ? Provenance::Grid : Provenance::Lhs);
      }
      return set;
    }
    case SampleMethod::MonteCarlo: {
      std::vector<Point> pts = monte_carlo(p, cfg.n_points, cfg.seed, cfg);
      for (Point& pt : pts) {
        set.points.push_back(std::move(pt));
        set.provenance.push_back(Provenance::MonteCarlo);
      }
      return set;
    }
  }
  throw std::logic_error("unknown sampling method");
}

}  // namespace blockalt
