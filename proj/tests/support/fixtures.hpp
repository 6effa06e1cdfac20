#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "blockalt/blockalt.hpp"

// Shared fixtures: the bundled benchmark problems, an independent reference
// solution for the coupled three-variable problem, and a generator of random
// problems that are convex in each coordinate but coupled across them.

namespace fixtures {

inline blockalt::Problem coupled3() {
  using namespace blockalt;
  return Problem({{0, 3}, {2, 10}, {-1, 1}},
                 parse_expression("(x1 - x2)^2 + (1/x2 + 2)^2 + 0.5*x3^2", 3),
                 {parse_constraint("x1 + x2 <= 5", 3),
                  parse_constraint("x1*x3 >= 2", 3)},
                 {"x1 + x2 <= 5", "x1*x3 >= 2"});
}

inline blockalt::Problem basin2() {
  using namespace blockalt;
  return Problem(
      {{0.5, 3}, {0, 3}},
      parse_expression("-5*exp(-(x1 - 1.2)^2/0.08) + 0.02*(x1 - 1.2)^4 + "
                       "0.02*(x1 - 1.2)^2 + 10*(x2 - 1.2)^2 + 10",
                       2),
      {parse_constraint("x1 >= 0.5", 2), parse_constraint("x2 <= 1/(x1 - 0.5)", 2)},
      {"x1 >= 0.5", "x2 <= 1/(x1 - 0.5)"});
}

inline blockalt::Problem pair_match() {
  using namespace blockalt;
  return Problem({{-2, 2}, {-2, 2}}, parse_expression("(x1 - x2)^2", 2), {});
}

inline blockalt::Problem split_region() {
  using namespace blockalt;
  return Problem({{-3, 3}, {-3, 3}},
                 parse_expression("(x1 - 1)^2 + (x2 + 1)^2", 2),
                 {parse_constraint("x1*x2 + 0.5 <= 0", 2),
                  parse_constraint("(x1 - 1)*(x2 + 1) - 0.5 <= 0", 2)});
}

inline blockalt::Problem sphere2() {
  using namespace blockalt;
  return Problem({{-5, 5}, {-5, 5}}, parse_expression("x1^2 + x2^2", 2), {});
}

// ---------------------------------------------------------------------------
// Independent reference for coupled3. Hand-coded arithmetic throughout (no
// Expr, no library solver): a dense feasible lattice scan, coordinate-wise
// refinement from the best node, and a final polish that also slides along
// the active constraint pair (x1 + x2 = 5, x1*x3 = 2), cross-checked by
// bisecting the stationarity condition of the reduced one-variable cost.
struct Coupled3Reference {
  double x1, x2, x3, cost;
};

namespace detail {

inline double c3_cost(double x1, double x2, double x3) {
  double a = x1 - x2;
  double b = 1.0 / x2 + 2.0;
  return a * a + b * b + 0.5 * x3 * x3;
}

inline bool c3_feasible(double x1, double x2, double x3, double tol = 1e-12) {
  return x1 >= -tol && x1 <= 3 + tol && x2 >= 2 - tol && x2 <= 10 + tol &&
         x3 >= -1 - tol && x3 <= 1 + tol && x1 + x2 <= 5 + tol &&
         x1 * x3 >= 2 - tol;
}

}  // namespace detail

// Grid scan (points per dimension) + local refinement.
inline Coupled3Reference coupled3_scan_reference(int points_per_dim = 200) {
  using detail::c3_cost;
  using detail::c3_feasible;
  const double lo[3] = {0, 2, -1}, hi[3] = {3, 10, 1};
  double best[3] = {2.5, 2.5, 0.8};
  double best_cost = c3_cost(best[0], best[1], best[2]);
  const int m = points_per_dim;
  for (int i = 0; i < m; ++i) {
    double x1 = lo[0] + (hi[0] - lo[0]) * i / (m - 1);
    for (int j = 0; j < m; ++j) {
      double x2 = lo[1] + (hi[1] - lo[1]) * j / (m - 1);
      if (x1 + x2 > 5) break;  // x2 ascending; rest of the row infeasible
      for (int k = 0; k < m; ++k) {
        double x3 = lo[2] + (hi[2] - lo[2]) * k / (m - 1);
        if (x1 * x3 < 2) continue;
        double c = c3_cost(x1, x2, x3);
        if (c < best_cost) {
          best_cost = c;
          best[0] = x1;
          best[1] = x2;
          best[2] = x3;
        }
      }
    }
  }

  // Coordinate refinement: shrinking line scans around the best point.
  double range[3] = {(hi[0] - lo[0]) / (m - 1), (hi[1] - lo[1]) / (m - 1),
                     (hi[2] - lo[2]) / (m - 1)};
  for (int round = 0; round < 40; ++round) {
    for (int d = 0; d < 3; ++d) {
      double a = std::max(lo[d], best[d] - range[d]);
      double b = std::min(hi[d], best[d] + range[d]);
      for (int s = 0; s <= 400; ++s) {
        double v = a + (b - a) * s / 400.0;
        double x1 = d == 0 ? v : best[0];
        double x2 = d == 1 ? v : best[1];
        double x3 = d == 2 ? v : best[2];
        if (!c3_feasible(x1, x2, x3)) continue;
        double c = c3_cost(x1, x2, x3);
        if (c < best_cost) {
          best_cost = c;
          best[0] = x1;
          best[1] = x2;
          best[2] = x3;
        }
      }
    }
    // Paired move along the active constraints: x1 = 5 - x2, x3 = 2/x1.
    {
      double a = std::max(2.0, best[1] - range[1]);
      double b = std::min(3.0, best[1] + range[1]);
      for (int s = 0; s <= 400; ++s) {
        double x2 = a + (b - a) * s / 400.0;
        double x1 = 5.0 - x2;
        double x3 = 2.0 / x1;
        if (!c3_feasible(x1, x2, x3)) continue;
        double c = c3_cost(x1, x2, x3);
        if (c < best_cost) {
          best_cost = c;
          best[0] = x1;
          best[1] = x2;
          best[2] = x3;
        }
      }
    }
    for (int d = 0; d < 3; ++d) range[d] *= 0.5;
  }
  return {best[0], best[1], best[2], best_cost};
}

// Second, purely analytic route: with both coupling constraints active the
// cost reduces to F(x2) = (5-2*x2)^2 + (1/x2+2)^2 + 2/(5-x2)^2; bisect F'.
inline Coupled3Reference coupled3_stationarity_reference() {
  auto dF = [](double x2) {
    return -4.0 * (5.0 - 2.0 * x2) - 2.0 * (1.0 / x2 + 2.0) / (x2 * x2) +
           4.0 / std::pow(5.0 - x2, 3);
  };
  double lo = 2.4, hi = 2.7;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (dF(mid) < 0 ? lo : hi) = mid;
  }
  double x2 = 0.5 * (lo + hi), x1 = 5.0 - x2, x3 = 2.0 / x1;
  return {x1, x2, x3, detail::c3_cost(x1, x2, x3)};
}

// ---------------------------------------------------------------------------
// Random problems that are convex in each coordinate. Costs are separable
// quadratics plus bilinear couplings (linear in every single coordinate, so
// per-coordinate convexity holds while the joint Hessian can be indefinite);
// constraints are bilinear/affine with the offset chosen so that a sampled
// anchor point satisfies them. Returns the problem plus one feasible start.
struct GeneratedProblem {
  blockalt::Problem problem;
  blockalt::Point feasible_start;
};

inline GeneratedProblem random_coordinate_convex_problem(std::uint64_t seed) {
  using namespace blockalt;
  SplitMix64 rng = substream(seed, 0xC0DEULL);
  for (int attempt = 0; attempt < 64; ++attempt) {
    int n = 2 + static_cast<int>(rng.next_below(3));  // 2..4
    std::vector<Bounds> bounds;
    for (int d = 0; d < n; ++d) {
      double lo = rng.next_in(-3.0, 0.0);
      double hi = lo + rng.next_in(1.0, 5.0);
      bounds.push_back({lo, hi});
    }

    std::string cost;
    for (int d = 0; d < n; ++d) {
      double a = rng.next_in(0.2, 2.0);
      double b = rng.next_in(bounds[d].lo - 0.5, bounds[d].hi + 0.5);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s(%.17g)*(x%d - (%.17g))^2",
                    d ? " + " : "", a, d + 1, b);
      cost += buf;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.next_double() < 0.6) {
          char buf[96];
          std::snprintf(buf, sizeof(buf), " + (%.17g)*x%d*x%d",
                        rng.next_in(-1.5, 1.5), i + 1, j + 1);
          cost += buf;
        }

    Point anchor(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) anchor[d] = rng.next_in(bounds[d].lo, bounds[d].hi);

    std::vector<std::string> constraint_text;
    int n_constraints = static_cast<int>(rng.next_below(4));  // 0..3
    for (int c = 0; c < n_constraints; ++c) {
      int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      if (j == i) j = (i + 1) % n;
      double alpha = rng.next_in(-1.0, 1.0);
      double beta = rng.next_in(-1.0, 1.0);
      double gamma = rng.next_in(-1.0, 1.0);
      double at_anchor = alpha * anchor[i] * anchor[j] + beta * anchor[i] +
                         gamma * anchor[j];
      double delta = at_anchor + rng.next_in(0.1, 1.0);  // anchor stays feasible
      char buf[192];
      std::snprintf(buf, sizeof(buf),
                    "(%.17g)*x%d*x%d + (%.17g)*x%d + (%.17g)*x%d <= (%.17g)",
                    alpha, i + 1, j + 1, beta, i + 1, gamma, j + 1, delta);
      constraint_text.push_back(buf);
    }

    std::vector<Expr> constraints;
    for (const std::string& t : constraint_text)
      constraints.push_back(parse_constraint(t, n));
    Problem problem(std::move(bounds), parse_expression(cost, n),
                    std::move(constraints), constraint_text);
    if (problem.check_feasible(anchor).feasible)
      return {std::move(problem), std::move(anchor)};
  }
  throw std::runtime_error("problem generator failed to find a feasible anchor");
}

}  // namespace fixtures
