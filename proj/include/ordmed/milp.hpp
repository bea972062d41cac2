#pragma once

// Exact LP-based branch-and-bound for MILPs whose integer variables are all
// binary.
//
// Node selection is best-bound with a depth-first plunge whenever there is no
// incumbent yet or the incumbent has just improved. Branching picks the most
// fractional binary (lowest index on ties). Each node re-optimizes its parent's
// basis with the dual simplex.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <vector>

#include "ordmed/linear_program.hpp"
#include "ordmed/simplex.hpp"

namespace ordmed {

struct MilpProblem {
  /// Candidate point offered by a problem-specific heuristic. Receives the
  /// node relaxation's primal values, or an empty span when no relaxation was
  /// solved (problem too large for the dense kernel).
  using IncumbentHook = std::function<std::optional<std::vector<double>>(std::span<const double>)>;

  LinearProgram lp;
  std::vector<bool> binary;
  /// Objective takes integer values at every integer-feasible point, so a
  /// subtree whose bound rounds up to the incumbent can be discarded.
  bool integral_objective = false;
  /// Known a-priori bound in the LP's sense (lower for min, upper for max).
  std::optional<double> known_bound;
  IncumbentHook incumbent_hook;
  /// Candidate points offered before the root relaxation.
  std::vector<std::vector<double>> warm_starts;

  void validate() const {
    lp.validate();
    require(binary.size() == static_cast<std::size_t>(lp.num_cols()), ErrorCategory::kData,
            "binary mask length does not match the column count");
    for (std::size_t j = 0; j < binary.size(); ++j)
      if (binary[j])
        require(lp.col_lo[j] == 0.0 && lp.col_hi[j] == 1.0, ErrorCategory::kData,
                "binary columns must have bounds [0, 1]");
  }
};

struct MilpLimits {
  long max_nodes = 1'000'000;
  double max_seconds = 60.0;
  double tol_gap = 1e-9;
  double tol_int = 1e-6;
  double tol_feas = 1e-7;
  /// Beyond this many rows the dense-kernel relaxation is skipped and only
  /// the incumbent hook runs.
  int max_relaxation_rows = 6000;
  /// Per-node trace (node id, bound, depth, branch variable) when non-null.
  std::ostream* trace = nullptr;
  bool record_bound_history = false;
};

enum class MilpStatus { kOptimal, kFeasibleWithGap, kInfeasible, kNoSolution };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kFeasibleWithGap: return "feasible-with-gap";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kNoSolution: return "no-solution";
  }
  return "?";
}

struct MilpSolution {
  MilpStatus status = MilpStatus::kNoSolution;
  std::vector<double> x;
  double objective = 0.0;
  /// Proven bound on the optimum in the LP's sense.
  double bound = 0.0;
  long nodes = 0;
  long lp_iterations = 0;
  long incumbent_updates = 0;
  long numerical_failures = 0;
  double wall_seconds = 0.0;
  std::vector<double> bound_history;

  bool has_incumbent() const { return !x.empty(); }
  double gap() const { return has_incumbent() ? std::abs(objective - bound) : kInf; }
};

namespace detail {

struct BoundChange {
  int var;
  double lo, hi;
};

struct BnbNode {
  double bound;  // minimization sense
  long id;
  int depth;
  std::vector<BoundChange> changes;
  SimplexSolver::Basis basis;
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

}  // namespace detail

inline MilpSolution solve_milp(const MilpProblem& p, const MilpLimits& limits = {}) {
  p.validate();
  require(limits.max_nodes > 0 && limits.max_seconds > 0 && limits.tol_gap > 0, ErrorCategory::kUsage,
          "MILP limits must be positive");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  const double sign = p.lp.sense == ObjSense::kMaximize ? -1.0 : 1.0;
  const auto n = static_cast<std::size_t>(p.lp.num_cols());

  MilpSolution out;
  double inc = kInf;  // incumbent objective, minimization sense
  std::vector<double> inc_x;

  auto prunable = [&](double bound) {
    if (inc == kInf) return false;
    if (p.integral_objective) return std::ceil(bound - 1e-6) >= inc - 1e-9;
    return bound >= inc - limits.tol_gap;
  };

  auto offer = [&](std::vector<double> x) -> bool {
    if (x.size() != n) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!p.binary[j]) continue;
      if (std::abs(x[j] - std::round(x[j])) > limits.tol_int) return false;
      x[j] = std::round(x[j]);
    }
    if (p.lp.max_violation(x) > limits.tol_feas) return false;
    const double obj = sign * p.lp.evaluate(x);
    const bool better = obj < inc - limits.tol_gap;
    const bool tie_smaller = !better && std::abs(obj - inc) <= limits.tol_gap &&
                             std::lexicographical_compare(x.begin(), x.end(), inc_x.begin(), inc_x.end());
    if (!better && !tie_smaller) return false;
    inc = obj;
    inc_x = std::move(x);
    ++out.incumbent_updates;
    return better;
  };

  auto run_hook = [&](std::span<const double> relax) -> bool {
    if (!p.incumbent_hook) return false;
    auto cand = p.incumbent_hook(relax);
    return cand && offer(std::move(*cand));
  };

  auto finalize = [&](bool exhausted, double open_bound) {
    out.wall_seconds = elapsed();
    if (inc == kInf) {
      out.status = exhausted ? MilpStatus::kInfeasible : MilpStatus::kNoSolution;
      out.bound = sign * open_bound;
      return out;
    }
    out.x = inc_x;
    out.objective = sign * inc;
    if (exhausted || open_bound >= inc - limits.tol_gap) {
      out.status = MilpStatus::kOptimal;
      out.bound = out.objective;
    } else {
      out.status = MilpStatus::kFeasibleWithGap;
      out.bound = sign * std::min(open_bound, inc);
    }
    return out;
  };

  const double a_priori = p.known_bound ? sign * *p.known_bound : -kInf;
  for (const auto& w : p.warm_starts) offer(w);
  if (prunable(a_priori)) return finalize(true, kInf);

  if (p.lp.num_rows() > limits.max_relaxation_rows) {
    run_hook({});
    return finalize(false, a_priori);
  }

  SimplexSolver lp(p.lp);
  LpSolution root = lp.solve();
  out.lp_iterations += root.iterations;
  if (root.status == LpStatus::kInfeasible) {
    run_hook({});
    return finalize(inc == kInf, kInf);
  }
  if (root.status != LpStatus::kOptimal) {
    run_hook({});
    ++out.numerical_failures;
    return finalize(false, a_priori);
  }

  std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>, detail::NodeOrder> open;
  long next_id = 0;
  std::optional<detail::BnbNode> plunge_next;
  open.push({std::max(a_priori, sign * root.objective), next_id++, 0, {}, lp.basis()});

  double last_global = -kInf;
  bool first = true;
  bool diving = true;
  while (!open.empty() || plunge_next) {
    double open_min = open.empty() ? kInf : open.top().bound;
    if (out.nodes >= limits.max_nodes || elapsed() >= limits.max_seconds) {
      if (plunge_next) open_min = std::min(open_min, plunge_next->bound);
      return finalize(false, open_min);
    }
    detail::BnbNode node;
    if (plunge_next) {
      node = std::move(*plunge_next);
      plunge_next.reset();
    } else {
      node = open.top();
      open.pop();
    }
    const double global = std::min(node.bound, open_min);
    last_global = std::max(last_global, global);
    if (limits.record_bound_history) out.bound_history.push_back(sign * global);
    if (prunable(node.bound)) {
      diving = false;
      continue;
    }
    ++out.nodes;

    LpSolution sol;
    if (first) {
      sol = root;
      first = false;
    } else {
      lp.restore_bounds();
      for (const auto& c : node.changes) lp.set_bounds(c.var, c.lo, c.hi);
      lp.load_basis(node.basis);
      sol = lp.resolve();
      if (sol.status == LpStatus::kIterationLimit) {
        sol = lp.solve();
        ++out.numerical_failures;
      }
    }
    out.lp_iterations += sol.iterations;
    if (sol.status != LpStatus::kOptimal) {
      if (limits.trace) *limits.trace << "node " << node.id << " depth " << node.depth << " infeasible\n";
      diving = false;
      continue;
    }
    const double bound = std::max(node.bound, sign * sol.objective);
    if (prunable(bound)) {
      diving = false;
      continue;
    }

    bool improved = run_hook(sol.x);

    // Most fractional binary, lowest index on ties.
    int branch = -1;
    double best_frac = limits.tol_int;
    for (std::size_t j = 0; j < n; ++j) {
      if (!p.binary[j]) continue;
      const double f = std::abs(sol.x[j] - std::round(sol.x[j]));
      if (f > best_frac) {
        best_frac = f;
        branch = static_cast<int>(j);
      }
    }
    if (limits.trace)
      *limits.trace << "node " << node.id << " bound " << sign * bound << " depth " << node.depth << " branch "
                    << branch << "\n";

    if (branch < 0) {
      // Integral relaxation: polish the continuous part with binaries fixed.
      std::vector<double> cand = sol.x;
      for (std::size_t j = 0; j < n; ++j)
        if (p.binary[j]) {
          cand[j] = std::round(cand[j]);
          lp.set_bounds(static_cast<int>(j), cand[j], cand[j]);
        }
      LpSolution fixed = lp.resolve();
      out.lp_iterations += fixed.iterations;
      if (fixed.status == LpStatus::kOptimal) {
        for (std::size_t j = 0; j < n; ++j)
          if (p.binary[j]) fixed.x[j] = cand[j];
        improved = offer(std::move(fixed.x)) || improved;
      } else {
        improved = offer(std::move(cand)) || improved;
      }
      diving = improved;
      if (improved && !open.empty()) {
        // Plunge from the best open node after an improvement.
        plunge_next = open.top();
        open.pop();
      }
      continue;
    }

    const SimplexSolver::Basis basis = lp.basis();
    const double xv = sol.x[static_cast<std::size_t>(branch)];
    detail::BnbNode down{bound, next_id++, node.depth + 1, node.changes, basis};
    down.changes.push_back({branch, 0.0, 0.0});
    detail::BnbNode up{bound, next_id++, node.depth + 1, std::move(node.changes), basis};
    up.changes.push_back({branch, 1.0, 1.0});
    const bool prefer_up = xv >= 0.5;
    diving = diving || improved || inc == kInf;
    if (diving) {
      plunge_next = prefer_up ? std::move(up) : std::move(down);
      open.push(prefer_up ? std::move(down) : std::move(up));
    } else {
      open.push(std::move(down));
      open.push(std::move(up));
    }
  }
  return finalize(true, kInf);
}

}  // namespace ordmed
