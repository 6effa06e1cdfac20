#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "blockalt/problem.hpp"

// Per-coordinate machinery: extract the feasible interval of one coordinate
// with all other coordinates frozen, then minimize the 1-D restriction of
// the cost over it. Both routines are derivative-free; the cost restriction
// is assumed unimodal on the interval (convex in the intended problem class)
// and domain faults during probing act as +inf, which pushes the search away.

namespace blockalt {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate() const { return !(hi > lo); }
};

struct ScalarSolution {
  double value = 0.0;   // minimizer, always inside the interval
  double cost = 0.0;    // cost restriction at `value`
  Interval interval{};  // the interval that was searched
  int probes = 0;       // cost evaluations spent
  bool all_probes_failed = false;  // every probe hit a domain fault
};

struct ScalarOptions {
  double interval_tol = 1e-10;  // bisection width for constraint endpoints
  double line_tol = 1e-9;       // golden-section bracket width
  double feas_tol = 1e-9;       // slack allowed on g(x) <= 0 during probing
};

namespace detail {

// Frozen-coordinate probe buffer: copy once, poke one slot repeatedly.
class CoordinateProbe {
public:
  CoordinateProbe(std::span<const double> x, int coord)
      : values_(x.begin(), x.end()), slot_(static_cast<std::size_t>(coord - 1)) {}

  std::span<const double> at(double v) {
    values_[slot_] = v;
    return values_;
  }

private:
  std::vector<double> values_;
  std::size_t slot_;
};

}  // namespace detail

// Intersection over all constraints of the 1-D sublevel set {x_i : g_j <= 0}
// along coordinate `coord`, intersected with the box bound. Under
// per-coordinate convexity each sublevel set is an interval containing the
// incoming coordinate, so probing a joint predicate is enough. Endpoints are
// located by geometric expansion from the known-feasible point followed by
// bisection to width `interval_tol`; the feasible inner iterate is returned,
// so the result always contains x_i. If no feasible neighbor exists on
// either side the interval degenerates to [x_i, x_i] (a pinned coordinate).
inline Interval feasible_interval(const Problem& p, std::span<const double> x,
                                  int coord, const ScalarOptions& opt = {}) {
  const Bounds& box = p.bound(coord);
  double xi = x[static_cast<std::size_t>(coord - 1)];
  if (xi < box.lo) xi = box.lo;
  if (xi > box.hi) xi = box.hi;

  if (p.constraints().empty()) return {box.lo, box.hi};

  detail::CoordinateProbe probe(x, coord);
  auto ok = [&](double v) {
    std::span<const double> probed = probe.at(v);
    for (const Expr& g : p.constraints()) {
      std::optional<double> value = g.try_eval(probed);
      if (!value || *value > opt.feas_tol) return false;
    }
    return true;
  };

  if (!ok(xi)) return {xi, xi};  // incoming point itself pinned

  // Both box endpoints strictly satisfied: the sublevel interval covers the
  // whole box, no search needed.
  bool lo_ok = (box.lo == xi) || ok(box.lo);
  bool hi_ok = (box.hi == xi) || ok(box.hi);
  if (lo_ok && hi_ok) return {box.lo, box.hi};

  auto push = [&](double limit, bool limit_ok) {
    if (limit_ok) return limit;
    double width = std::fabs(limit - xi);
    if (width <= opt.interval_tol) return xi;
    double inner = xi;            // feasible
    double outer = limit;         // infeasible unless proven otherwise
    double step = std::max(opt.interval_tol, width * 0x1.0p-20);
    double direction = (limit > xi) ? 1.0 : -1.0;
    for (;;) {
      double cand = xi + direction * step;
      if ((direction > 0 && cand >= limit) || (direction < 0 && cand <= limit)) break;
      if (!ok(cand)) { outer = cand; break; }
      inner = cand;
      step *= 2.0;
    }
    while (std::fabs(outer - inner) > opt.interval_tol) {
      double mid = 0.5 * (inner + outer);
      if (mid == inner || mid == outer) break;
      if (ok(mid)) inner = mid; else outer = mid;
    }
    return inner;
  };

  double lo = push(box.lo, lo_ok);
  double hi = push(box.hi, hi_ok);
  return {lo, hi};
}

// Golden-section search over `iv`, shrinking the bracket to width
// `line_tol`. Returns the bracket midpoint unless one of the interval
// endpoints beats it (boundary minima), and never a point outside the
// interval. A degenerate interval returns x_i unchanged. Probes that fault
// evaluate as +inf; if every probe faults the incoming value is returned
// with `all_probes_failed` set.
inline ScalarSolution minimize_1d(const Problem& p, std::span<const double> x,
                                  int coord, Interval iv,
                                  const ScalarOptions& opt = {}) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  detail::CoordinateProbe probe(x, coord);
  ScalarSolution out;
  out.interval = iv;

  bool any_finite = false;
  auto f = [&](double v) {
    ++out.probes;
    std::optional<double> c = p.try_cost_at(probe.at(v));
    if (!c) return inf;
    any_finite = true;
    return *c;
  };

  const double xi = x[static_cast<std::size_t>(coord - 1)];
  if (iv.degenerate()) {
    out.value = xi;
    out.cost = f(xi);
    out.all_probes_failed = !any_finite;
    return out;
  }

  constexpr double invphi = 0.6180339887498948482;
  double a = iv.lo, b = iv.hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > opt.line_tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }

  double mid = 0.5 * (a + b);
  double best_v = mid, best_c = f(mid);
  double flo = f(iv.lo);
  if (flo < best_c) { best_c = flo; best_v = iv.lo; }
  double fhi = f(iv.hi);
  if (fhi < best_c) { best_c = fhi; best_v = iv.hi; }

  if (!any_finite) {
    out.value = xi;
    out.cost = inf;
    out.all_probes_failed = true;
    return out;
  }
  out.value = best_v;
  out.cost = best_c;
  return out;
}

}  // namespace blockalt
