#pragma once

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blockalt/expr.hpp"

namespace blockalt {

using Point = std::vector<double>;

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct Violation {
  enum class Kind { BoundLower, BoundUpper, Constraint };
  Kind kind;
  int index;      // variable index (bounds) or constraint index, 0-based
  double amount;  // positive residual; +inf when evaluation faulted
};

struct FeasibilityVerdict {
  bool feasible = false;
  double worst_violation = 0.0;  // max over bound residuals and constraint values
  std::vector<Violation> violations;
};

// One problem instance: n box-bounded variables, a scalar cost, and a list
// of inequality constraints each already normalized to g(x) <= 0. Immutable
// after construction, so instances can be shared freely across threads.
class Problem {
public:
  static constexpr double kDefaultFeasTol = 1e-9;

  Problem(std::vector<Bounds> bounds, Expr cost, std::vector<Expr> constraints,
          std::vector<std::string> constraint_text = {})
      : bounds_(std::move(bounds)),
        cost_(std::move(cost)),
        constraints_(std::move(constraints)),
        constraint_text_(std::move(constraint_text)) {
    if (bounds_.empty()) throw std::invalid_argument("problem needs at least one variable");
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      const Bounds& b = bounds_[i];
      if (!std::isfinite(b.lo) || !std::isfinite(b.hi))
        throw std::invalid_argument("bounds for x" + std::to_string(i + 1) +
                                    " must be finite");
      if (b.lo > b.hi)
        throw std::invalid_argument("bounds for x" + std::to_string(i + 1) +
                                    " are inverted");
    }
    const int n = static_cast<int>(bounds_.size());
    if (cost_.max_var() > n)
      throw std::invalid_argument("cost references x" + std::to_string(cost_.max_var()) +
                                  " but the problem has " + std::to_string(n) +
                                  " variable(s)");
    for (const Expr& g : constraints_)
      if (g.max_var() > n)
        throw std::invalid_argument("constraint references x" +
                                    std::to_string(g.max_var()) +
                                    " but the problem has " + std::to_string(n) +
                                    " variable(s)");
  }

  int n() const { return static_cast<int>(bounds_.size()); }
  const std::vector<Bounds>& bounds() const { return bounds_; }
  const Bounds& bound(int var) const { return bounds_[static_cast<std::size_t>(var - 1)]; }
  const Expr& cost() const { return cost_; }
  const std::vector<Expr>& constraints() const { return constraints_; }
  const std::vector<std::string>& constraint_text() const { return constraint_text_; }

  double cost_at(std::span<const double> x) const { return cost_.eval(x); }
  std::optional<double> try_cost_at(std::span<const double> x) const noexcept {
    return cost_.try_eval(x);
  }

  // Feasible iff x lies within every bound and every g_j(x) <= tol. A domain
  // fault in any g_j counts as infeasible with violation +inf.
  FeasibilityVerdict check_feasible(std::span<const double> x,
                                    double tol = kDefaultFeasTol) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    FeasibilityVerdict verdict;
    verdict.worst_violation = -inf;
    if (x.size() < bounds_.size()) {
      verdict.feasible = false;
      verdict.worst_violation = inf;
      return verdict;
    }
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      if (!std::isfinite(x[i])) {
        verdict.violations.push_back({Violation::Kind::BoundLower,
                                      static_cast<int>(i), inf});
        verdict.worst_violation = inf;
        continue;
      }
      double below = bounds_[i].lo - x[i];
      double above = x[i] - bounds_[i].hi;
      verdict.worst_violation = std::max(verdict.worst_violation, below);
      verdict.worst_violation = std::max(verdict.worst_violation, above);
      if (below > tol)
        verdict.violations.push_back({Violation::Kind::BoundLower,
                                      static_cast<int>(i), below});
      if (above > tol)
        verdict.violations.push_back({Violation::Kind::BoundUpper,
                                      static_cast<int>(i), above});
    }
    for (std::size_t j = 0; j < constraints_.size(); ++j) {
      std::optional<double> g = constraints_[j].try_eval(x);
      double value = g.value_or(inf);
      verdict.worst_violation = std::max(verdict.worst_violation, value);
      if (value > tol)
        verdict.violations.push_back({Violation::Kind::Constraint,
                                      static_cast<int>(j), value});
    }
    verdict.feasible = verdict.worst_violation <= tol;
    return verdict;
  }

private:
  std::vector<Bounds> bounds_;
  Expr cost_;
  std::vector<Expr> constraints_;
  std::vector<std::string> constraint_text_;
};

}  // namespace blockalt
