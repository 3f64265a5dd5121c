#pragma once

// Linear/mixed-integer model container shared by the solver and builders.

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ndcgem/common.hpp"

namespace ndcgem::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense : char { le = 'L', ge = 'G', eq = 'E' };

struct LinearModel {
  struct Var {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
    double cost = 0.0;
    bool integer = false;
  };
  struct Row {
    std::string name;
    Sense sense = Sense::le;
    double rhs = 0.0;
    std::vector<std::pair<int, double>> terms;  // (var, coef); duplicates sum
  };

  std::vector<Var> vars;
  std::vector<Row> rows;

  int n_vars() const { return static_cast<int>(vars.size()); }
  int n_rows() const { return static_cast<int>(rows.size()); }

  int add_var(std::string name, double lb, double ub, double cost = 0.0,
              bool integer = false) {
    if (lb > ub)
      throw ValidationError("variable " + name + ": lb > ub");
    vars.push_back({std::move(name), lb, ub, cost, integer});
    return n_vars() - 1;
  }

  int add_row(std::string name, Sense sense, double rhs,
              std::vector<std::pair<int, double>> terms = {}) {
    rows.push_back({std::move(name), sense, rhs, std::move(terms)});
    return n_rows() - 1;
  }

  void add_term(int row, int var, double coef) {
    if (coef != 0.0) rows[row].terms.emplace_back(var, coef);
  }

  bool has_integers() const {
    for (const auto& v : vars)
      if (v.integer) return true;
    return false;
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;             // per variable
  std::vector<double> duals;         // per row, d(objective)/d(rhs)
  std::vector<double> reduced_cost;  // per variable
  std::vector<double> row_activity;  // per row
  long iterations = 0;

  bool ok() const { return status == LpStatus::optimal; }
};

enum class MipStatus { optimal, infeasible, unbounded, node_limit };

struct MipSolution {
  MipStatus status = MipStatus::node_limit;
  double objective = 0.0;
  double best_bound = -kInf;
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;

  bool ok() const { return status == MipStatus::optimal; }
};

}  // namespace ndcgem::lp
