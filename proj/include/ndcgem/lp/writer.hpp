#pragma once

// CPLEX LP-format dump of a LinearModel, for debugging cleared problems with
// external tools.  Variable and row names fall back to x<i>/r<i> when empty.

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "ndcgem/common.hpp"
#include "ndcgem/lp/model.hpp"

namespace ndcgem::lp {

namespace detail {

inline std::string var_name(const LinearModel& m, int j) {
  return m.vars[j].name.empty() ? "x" + std::to_string(j) : m.vars[j].name;
}

inline void write_terms(std::ostream& os, const LinearModel& m,
                        const std::vector<std::pair<int, double>>& terms) {
  bool first = true;
  for (const auto& [j, coef] : terms) {
    if (coef == 0.0) continue;
    if (first) {
      os << (coef < 0 ? "- " : "");
      first = false;
    } else {
      os << (coef < 0 ? " - " : " + ");
    }
    const double a = coef < 0 ? -coef : coef;
    if (a != 1.0) os << a << " ";
    os << var_name(m, j);
  }
  if (first) os << "0 " << var_name(m, 0);
}

}  // namespace detail

inline void write_lp_format(const LinearModel& m, std::ostream& os) {
  os.precision(17);
  os << "Minimize\n obj: ";
  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < m.n_vars(); ++j)
    if (m.vars[j].cost != 0.0) obj.emplace_back(j, m.vars[j].cost);
  detail::write_terms(os, m, obj);
  os << "\nSubject To\n";
  for (int i = 0; i < m.n_rows(); ++i) {
    const auto& row = m.rows[i];
    os << " " << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ": ";
    detail::write_terms(os, m, row.terms);
    switch (row.sense) {
      case Sense::le: os << " <= "; break;
      case Sense::ge: os << " >= "; break;
      case Sense::eq: os << " = "; break;
    }
    os << row.rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < m.n_vars(); ++j) {
    const auto& v = m.vars[j];
    const std::string name = detail::var_name(m, j);
    if (v.lb == -kInf && v.ub == kInf) os << " " << name << " free\n";
    else if (v.lb == -kInf) os << " -inf <= " << name << " <= " << v.ub << "\n";
    else if (v.ub == kInf) os << " " << name << " >= " << v.lb << "\n";
    else os << " " << v.lb << " <= " << name << " <= " << v.ub << "\n";
  }
  bool any_int = false;
  for (int j = 0; j < m.n_vars(); ++j) {
    if (!m.vars[j].integer) continue;
    if (!any_int) {
      os << "Generals\n";
      any_int = true;
    }
    os << " " << detail::var_name(m, j) << "\n";
  }
  os << "End\n";
}

inline void write_lp_file(const LinearModel& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open LP dump file: " + path);
  write_lp_format(m, os);
}

}  // namespace ndcgem::lp
