#pragma once

// Best-first branch and bound for mixed-integer linear programs.
//
// Nodes are ordered by parent LP bound (ties by creation id), branch on the
// most fractional integer variable (ties by lowest index), and children are
// warm-started with the dual simplex from the parent basis.  The search stops
// when the relative gap between incumbent and best open bound closes.

#include <cmath>
#include <memory>
#include <queue>
#include <vector>

#include "ndcgem/lp/model.hpp"
#include "ndcgem/lp/simplex.hpp"

namespace ndcgem::lp {

struct MipOptions {
  double gap = 1e-4;          // relative incumbent-to-bound gap
  double tol_integer = 1e-6;  // integrality tolerance
  long max_nodes = 50000;
  SimplexOptions lp;
};

class MipSolver {
 public:
  MipSolver(const LinearModel& model, MipOptions opt = {})
      : opt_(opt), simplex_(model, opt.lp) {
    for (int j = 0; j < model.n_vars(); ++j) {
      if (model.vars[j].integer) int_vars_.push_back(j);
      root_lb_.push_back(model.vars[j].lb);
      root_ub_.push_back(model.vars[j].ub);
    }
  }

  MipSolution solve() {
    MipSolution out;
    LpSolution root = simplex_.solve();
    out.lp_iterations = root.iterations;
    out.nodes = 1;
    if (root.status == LpStatus::infeasible) {
      out.status = MipStatus::infeasible;
      return out;
    }
    if (root.status == LpStatus::unbounded) {
      out.status = MipStatus::unbounded;
      return out;
    }
    out.best_bound = root.objective;
    if (try_incumbent(root, &out)) {
      out.status = MipStatus::optimal;
      return out;
    }

    struct Node {
      double bound;
      long id;
      int var;
      double lb, ub;  // branch bound on var, on top of the parent's
      std::shared_ptr<const std::vector<double>> parent_lb, parent_ub;
      std::shared_ptr<const Basis> basis;
    };
    auto worse = [](const Node& a, const Node& b) {
      if (a.bound != b.bound) return a.bound > b.bound;
      return a.id > b.id;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);

    long next_id = 0;
    auto push_children = [&](const LpSolution& sol, int var,
                             const std::shared_ptr<const std::vector<double>>& plb,
                             const std::shared_ptr<const std::vector<double>>& pub) {
      const auto basis = std::make_shared<const Basis>(simplex_.basis());
      const double x = sol.x[var];
      const double lo = std::floor(x + opt_.tol_integer);
      open.push({sol.objective, next_id++, var, (*plb)[var], lo, plb, pub, basis});
      open.push({sol.objective, next_id++, var, lo + 1.0, (*pub)[var], plb, pub, basis});
    };

    const auto root_lb = std::make_shared<const std::vector<double>>(root_lb_);
    const auto root_ub = std::make_shared<const std::vector<double>>(root_ub_);
    push_children(root, branch_var(root), root_lb, root_ub);

    bool closed_by_gap = false;
    while (!open.empty()) {
      Node node = open.top();
      open.pop();
      out.best_bound = node.bound;
      if (has_incumbent_ && gap_closed(node.bound)) {
        closed_by_gap = true;
        break;
      }
      if (++out.nodes > opt_.max_nodes) {
        out.status = has_incumbent_ ? MipStatus::node_limit : MipStatus::infeasible;
        finish(&out);
        return out;
      }

      auto lb = std::make_shared<std::vector<double>>(*node.parent_lb);
      auto ub = std::make_shared<std::vector<double>>(*node.parent_ub);
      (*lb)[node.var] = node.lb;
      (*ub)[node.var] = node.ub;
      if ((*lb)[node.var] > (*ub)[node.var] + 1e-12) continue;  // empty branch

      apply_bounds(*lb, *ub);
      LpSolution sol;
      try {
        sol = simplex_.solve_warm(*node.basis);
      } catch (const SolverError&) {
        sol = simplex_.solve();
      }
      out.lp_iterations += sol.iterations;
      if (sol.status == LpStatus::unbounded) {
        out.status = MipStatus::unbounded;
        return out;
      }
      if (sol.status != LpStatus::optimal) continue;
      if (has_incumbent_ && !improves(sol.objective)) continue;
      if (try_incumbent(sol, &out)) continue;
      push_children(sol, branch_var(sol),
                    std::shared_ptr<const std::vector<double>>(lb),
                    std::shared_ptr<const std::vector<double>>(ub));
    }

    if (!has_incumbent_) {
      out.status = MipStatus::infeasible;
      return out;
    }
    out.status = MipStatus::optimal;
    if (!closed_by_gap) out.best_bound = incumbent_obj_;  // tree exhausted
    finish(&out);
    return out;
  }

  // After a successful solve: pin every integer variable at its incumbent
  // value and re-solve the LP from the incumbent basis.  The result carries
  // the duals of the continuous problem with the commitment fixed.
  LpSolution resolve_fixed() {
    if (!has_incumbent_) throw SolverError("resolve_fixed without incumbent");
    auto lb = root_lb_;
    auto ub = root_ub_;
    for (int j : int_vars_) lb[j] = ub[j] = incumbent_x_[j];
    apply_bounds(lb, ub);
    try {
      return simplex_.solve_warm(incumbent_basis_);
    } catch (const SolverError&) {
      return simplex_.solve();
    }
  }

 private:
  MipOptions opt_;
  Simplex simplex_;
  std::vector<int> int_vars_;
  std::vector<double> root_lb_, root_ub_;
  bool has_incumbent_ = false;
  double incumbent_obj_ = kInf;
  std::vector<double> incumbent_x_;
  Basis incumbent_basis_;

  void apply_bounds(const std::vector<double>& lb, const std::vector<double>& ub) {
    for (size_t j = 0; j < lb.size(); ++j)
      simplex_.set_var_bounds(static_cast<int>(j), lb[j], ub[j]);
  }

  int branch_var(const LpSolution& sol) const {
    int best = -1;
    double best_dist = kInf;
    for (int j : int_vars_) {
      const double f = sol.x[j] - std::floor(sol.x[j]);
      if (std::min(f, 1.0 - f) <= opt_.tol_integer) continue;
      const double dist = std::abs(f - 0.5);
      if (dist < best_dist - 1e-15) {
        best_dist = dist;
        best = j;
      }
    }
    return best;
  }

  bool integral(const LpSolution& sol) const { return branch_var(sol) < 0; }

  bool improves(double obj) const {
    return obj < incumbent_obj_ - 1e-12 * (1.0 + std::abs(incumbent_obj_));
  }

  bool gap_closed(double bound) const {
    return (incumbent_obj_ - bound) <= opt_.gap * std::max(1.0, std::abs(incumbent_obj_));
  }

  // If integral, record as incumbent.  Returns true when the node is fathomed.
  bool try_incumbent(const LpSolution& sol, MipSolution* out) {
    if (!integral(sol)) return false;
    if (!has_incumbent_ || improves(sol.objective)) {
      has_incumbent_ = true;
      incumbent_obj_ = sol.objective;
      incumbent_x_ = sol.x;
      for (int j : int_vars_) incumbent_x_[j] = std::round(incumbent_x_[j]);
      incumbent_basis_ = simplex_.basis();
      out->objective = incumbent_obj_;
      out->x = incumbent_x_;
    }
    return true;
  }

  void finish(MipSolution* out) {
    out->objective = incumbent_obj_;
    out->x = incumbent_x_;
    // Open nodes all carry bounds >= the last popped one (best-first order),
    // and fathomed leaves were pruned against the incumbent, so this is a
    // valid global lower bound.
    out->best_bound = std::min(out->best_bound, incumbent_obj_);
  }
};

inline MipSolution solve_mip(const LinearModel& model, MipOptions opt = {}) {
  MipSolver s(model, opt);
  return s.solve();
}

}  // namespace ndcgem::lp
