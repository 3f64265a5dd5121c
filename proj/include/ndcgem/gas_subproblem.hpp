#pragma once

// Per-hour gas transmission feasibility check. Given booked GFU capacities,
// day-ahead curtailments, and an (augmented) supply schedule, finds the
// cheapest combination of supply adjustments, extra curtailment, and
// undelivered bookings consistent with Weymouth pipeline physics and
// compressor operating envelopes. Nonconvex physics is handled by successive
// linear programming in squared-pressure space with a trust region; nodal
// duals of the final frozen LP parameterize the feasibility cut.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ndcgem/gas_physics.hpp"
#include "ndcgem/lp/simplex.hpp"
#include "ndcgem/master.hpp"
#include "ndcgem/model.hpp"
#include "ndcgem/network.hpp"

namespace ndcgem {

struct SubproblemInput {
  int hour = 0;
  std::vector<double> booked;     // x* per unit, zero for non-GFUs (kcf/h)
  std::vector<double> curtailed;  // day-ahead curtailment per gas load (kcf/h)
  std::vector<double> supply;     // augmented base schedule per supplier (kcf/h)
  std::vector<double> gas_value;  // zeta per unit ($/kcf, >= 0)
  bool allow_extra_curtail = true;  // pinned off for the baseline check
};

// Physics fields are evaluated at the converged SLP point; adjustment fields
// come from the frozen LP that also supplies the duals.
struct GasState {
  std::vector<double> sq_pressure;                       // per node, psia^2
  std::vector<double> pipe_flow;                         // per pipeline
  std::vector<double> comp_power, comp_flow, comp_draw;  // per compressor
  std::vector<double> supply_adj_pos, supply_adj_neg;    // per supplier
  std::vector<double> curtail_pos, curtail_neg;          // per gas load
  std::vector<double> delivered;                         // x-hat per unit
};

struct SubproblemResult {
  double objective = 0.0;  // G* >= 0
  bool converged = false;
  int iterations = 0;
  std::vector<double> node_dual;  // mu per gas node: $ per extra kcf/h of load
  double unsatisfied = 0.0;       // sum_g (x* - x-hat)
  double max_residual = 0.0;      // worst |y - weymouth(Pi)| at the solution
  GasState state;
};

struct SubproblemOptions {
  double step_tol = 1e-4;      // relative step that counts as converged
  int max_iterations = 50;
  double trust_init = 0.1;     // fraction of each variable's range
  double trust_floor = 1e-6;
  double delivery_eps = 1e-12;  // $/kcf nudge so x-hat is unique at zeta = 0
  double residual_target = 1e-7;  // kcf/h polish goal for the final LP
  int polish_cap = 20;
  std::ostream* trace = nullptr;  // per-iteration log when set
  lp::SimplexOptions lp;
};

class GasSubproblem {
 public:
  explicit GasSubproblem(const JointSystem& sys, SubproblemOptions opt = {})
      : sys_(sys), adj_(gas_adjacency(sys)), opt_(opt) {
    prepare();
  }

  SubproblemResult solve(const SubproblemInput& in) const;

 private:
  struct Ids {
    std::vector<int> sq, ypipe, h, ycomp, theta, sp, sm, lpos, lneg, xhat;
  };
  struct Point {
    std::vector<double> sq, h;       // trust-region center
    std::vector<double> ypipe, ycomp;  // flows defining the tangents
    double merit = std::numeric_limits<double>::infinity();
  };

  const JointSystem& sys_;
  GasAdjacency adj_;
  SubproblemOptions opt_;
  std::vector<double> sq_lo_, sq_hi_;  // squared pressure bounds per node
  std::vector<double> eps_flow_;       // small-flow threshold per pipeline
  std::vector<double> comp_sign_;      // fixed transport direction per compressor

  void prepare();
  Point initial_point(const SubproblemInput& in) const;
  lp::LinearModel build_lp(const SubproblemInput& in, const Point& at, double trust,
                           bool with_trust, Ids* ids,
                           std::vector<int>* balance_rows) const;
  // Puts the tangent flows back on the physics manifold at (sq, h).
  void refresh_flows(Point* pt) const;
  double physics_residual(const Ids& ids, const std::vector<double>& x,
                          double* max_pipe) const;
  double adjust_cost(const SubproblemInput& in, const Ids& ids,
                     const std::vector<double>& x) const;
};

inline void GasSubproblem::prepare() {
  const int nn = sys_.n_gas_nodes();
  sq_lo_.resize(nn);
  sq_hi_.resize(nn);
  for (int n = 0; n < nn; ++n) {
    const auto& pb = sys_.economics.pressure_bounds.at(sys_.gas_nodes[n].id);
    sq_lo_[n] = pb.min * pb.min;
    sq_hi_[n] = pb.max * pb.max;
  }
  eps_flow_.resize(sys_.pipelines.size());
  for (size_t p = 0; p < sys_.pipelines.size(); ++p) {
    const int m = sys_.gas_node_index.at(sys_.pipelines[p].from_node);
    const int n = sys_.gas_node_index.at(sys_.pipelines[p].to_node);
    eps_flow_[p] = 1e-3 * sys_.pipelines[p].weymouth_const *
                   std::sqrt(std::max(sq_hi_[m], sq_hi_[n]));
  }
  // A compressor must keep a positive denominator everywhere in the pressure
  // box, otherwise the linearization can step into a pole.
  for (const auto& c : sys_.compressors) {
    const int m = sys_.gas_node_index.at(c.from_node);
    const int n = sys_.gas_node_index.at(c.to_node);
    const double worst = std::max(sq_hi_[m], sq_hi_[n]) / std::min(sq_lo_[m], sq_lo_[n]);
    if (c.k1 != 0.0 && c.k2 - c.k1 * std::pow(worst, 0.5 * c.alpha) <= 0.0)
      throw ConfigError("compressor " + c.id +
                        ": k2 - k1*ratio^alpha can reach zero inside the pressure bounds");
    // The flow law flips sign discontinuously where the squared pressures
    // meet, and the cheapest operating point can sit exactly there (burning
    // surplus gas as compressor fuel is free while selling it back costs mu).
    // An LP cannot straddle a jump, so each machine transports one way,
    // chosen by the pressure boxes; the sign boundary itself stays feasible.
    comp_sign_.push_back(0.5 * (sq_lo_[m] + sq_hi_[m]) >= 0.5 * (sq_lo_[n] + sq_hi_[n])
                             ? 1.0
                             : -1.0);
  }
}

inline GasSubproblem::Point GasSubproblem::initial_point(const SubproblemInput& in) const {
  Point pt;
  const int nn = sys_.n_gas_nodes();
  pt.sq.resize(nn);
  for (int n = 0; n < nn; ++n) pt.sq[n] = 0.5 * (sq_lo_[n] + sq_hi_[n]);
  pt.h.resize(sys_.compressors.size());
  for (size_t c = 0; c < sys_.compressors.size(); ++c)
    pt.h[c] = 0.5 * (sys_.compressors[c].h_min + sys_.compressors[c].h_max);

  // Least-squares balance fit seeds the flows so the first tangents carry
  // sensible magnitudes (all nodes start at the same midpoint pressure).
  const int nb = static_cast<int>(sys_.pipelines.size() + sys_.compressors.size());
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nn, std::max(nb, 1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn);
  for (int n = 0; n < nn; ++n) {
    const auto& a = adj_.at(n);
    for (auto [p, dir] : a.pipelines) E(n, p) = dir;
    for (auto [c, dir] : a.compressors) E(n, static_cast<int>(sys_.pipelines.size()) + c) = dir;
    double net = 0.0;  // injection the branches must carry away
    for (int j : a.suppliers) net += in.supply[j];
    for (int d : a.loads)
      net -= sys_.gas_loads[d].profile[in.hour] - in.curtailed[d];
    for (int g : a.gfus) net -= in.booked[g];
    for (int c : a.taps) net -= compressor_gas(pt.h[c], sys_.compressors[c].gas_coeffs);
    rhs(n) = -net;  // E*y = -net: branch inflow covers the deficit
  }
  Eigen::VectorXd y = nb > 0 ? Eigen::VectorXd(E.completeOrthogonalDecomposition().solve(rhs))
                             : Eigen::VectorXd::Zero(1);
  pt.ypipe.resize(sys_.pipelines.size());
  for (size_t p = 0; p < sys_.pipelines.size(); ++p) pt.ypipe[p] = y(static_cast<int>(p));
  pt.ycomp.resize(sys_.compressors.size());
  for (size_t c = 0; c < sys_.compressors.size(); ++c)
    pt.ycomp[c] = y(static_cast<int>(sys_.pipelines.size() + c));
  return pt;
}

inline lp::LinearModel GasSubproblem::build_lp(const SubproblemInput& in, const Point& at,
                                               double trust, bool with_trust, Ids* ids,
                                               std::vector<int>* balance_rows) const {
  lp::LinearModel m;
  const int nn = sys_.n_gas_nodes();
  const int np = static_cast<int>(sys_.pipelines.size());
  const int nc = static_cast<int>(sys_.compressors.size());
  const int nj = static_cast<int>(sys_.suppliers.size());
  const int nd = static_cast<int>(sys_.gas_loads.size());
  const int nu = static_cast<int>(sys_.units.size());

  ids->sq.resize(nn);
  for (int n = 0; n < nn; ++n) {
    double lo = sq_lo_[n], hi = sq_hi_[n];
    if (with_trust) {
      const double r = trust * (sq_hi_[n] - sq_lo_[n]);
      lo = std::max(lo, at.sq[n] - r);
      hi = std::min(hi, at.sq[n] + r);
    }
    ids->sq[n] = m.add_var("sq_" + sys_.gas_nodes[n].id, lo, hi, 0.0);
  }
  ids->ypipe.resize(np);
  for (int p = 0; p < np; ++p)
    ids->ypipe[p] = m.add_var("y_" + sys_.pipelines[p].id, -lp::kInf, lp::kInf, 0.0);
  ids->h.resize(nc);
  ids->ycomp.resize(nc);
  ids->theta.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const Compressor& cmp = sys_.compressors[c];
    double lo = cmp.h_min, hi = cmp.h_max;
    if (with_trust && hi > lo) {
      const double r = trust * (cmp.h_max - cmp.h_min);
      lo = std::max(lo, at.h[c] - r);
      hi = std::min(hi, at.h[c] + r);
    }
    ids->h[c] = m.add_var("h_" + cmp.id, lo, hi, 0.0);
    ids->ycomp[c] = m.add_var("yc_" + cmp.id, -lp::kInf, lp::kInf, 0.0);
    ids->theta[c] = m.add_var("th_" + cmp.id, 0.0, lp::kInf, 0.0);
  }
  ids->sp.resize(nj);
  ids->sm.resize(nj);
  for (int j = 0; j < nj; ++j) {
    const double mu = sys_.suppliers[j].unit_cost;
    ids->sp[j] = m.add_var("sp_" + sys_.suppliers[j].id, 0.0, lp::kInf, mu);
    ids->sm[j] = m.add_var("sm_" + sys_.suppliers[j].id, 0.0, lp::kInf, mu);
  }
  ids->lpos.resize(nd);
  ids->lneg.resize(nd);
  for (int d = 0; d < nd; ++d) {
    const double cap = in.allow_extra_curtail ? lp::kInf : 0.0;
    const double lam = sys_.gas_loads[d].curtail_cost;
    ids->lpos[d] = m.add_var("lp_" + sys_.gas_loads[d].id, 0.0, cap, lam);
    ids->lneg[d] = m.add_var("lm_" + sys_.gas_loads[d].id, 0.0, cap, lam);
  }
  ids->xhat.assign(nu, -1);
  for (int g = 0; g < nu; ++g)
    if (sys_.units[g].is_gfu)
      ids->xhat[g] = m.add_var("xh_" + sys_.units[g].id, 0.0, in.booked[g],
                               -(in.gas_value[g] + opt_.delivery_eps));

  // Pipeline tangents: y = (C^2/2|yh|)(Pi_m - Pi_n) + yh/2, or the small-flow
  // secant through the origin.
  for (int p = 0; p < np; ++p) {
    const Pipeline& pipe = sys_.pipelines[p];
    const int nm = sys_.gas_node_index.at(pipe.from_node);
    const int nn2 = sys_.gas_node_index.at(pipe.to_node);
    const double c2 = pipe.weymouth_const * pipe.weymouth_const;
    const double yh = at.ypipe[p];
    double slope, rhs;
    if (std::abs(yh) > eps_flow_[p]) {
      slope = c2 / (2.0 * std::abs(yh));
      rhs = 0.5 * yh;
    } else {
      slope = c2 / (2.0 * eps_flow_[p]);
      rhs = 0.0;
    }
    int r = m.add_row("wey_" + pipe.id, lp::Sense::eq, rhs);
    m.add_term(r, ids->ypipe[p], 1.0);
    m.add_term(r, ids->sq[nm], -slope);
    m.add_term(r, ids->sq[nn2], slope);
  }
  // Compressor tangents: flow and fuel draw around (Pi-hat, h-hat), on the
  // machine's fixed transport branch. The direction row keeps every LP point
  // on that branch, where the flow law is smooth.
  for (int c = 0; c < nc; ++c) {
    const Compressor& cmp = sys_.compressors[c];
    const int nm = sys_.gas_node_index.at(cmp.from_node);
    const int nn2 = sys_.gas_node_index.at(cmp.to_node);
    const double sgn = comp_sign_[c];
    const double sm = at.sq[nm], sn = at.sq[nn2];
    // Incumbents satisfy the direction row, so the branch decides which side
    // is the high-pressure one; at an exact tie the incumbent ordering would
    // not.
    const double hi = sgn > 0.0 ? sm : sn, lo = sgn > 0.0 ? sn : sm;
    const double ratio_a = cmp.k1 != 0.0 ? std::pow(hi / lo, 0.5 * cmp.alpha) : 0.0;
    const double denom = cmp.k2 - cmp.k1 * ratio_a;
    const double dydh = sgn / denom;
    double dyd_hi = 0.0, dyd_lo = 0.0;
    if (cmp.k1 != 0.0) {
      const double dydratio = sgn * at.h[c] * cmp.k1 / (denom * denom);
      dyd_hi = dydratio * 0.5 * cmp.alpha * ratio_a / hi;
      dyd_lo = -dydratio * 0.5 * cmp.alpha * ratio_a / lo;
    }
    const double dydm = sgn > 0.0 ? dyd_hi : dyd_lo;
    const double dydn = sgn > 0.0 ? dyd_lo : dyd_hi;
    const double y0 = sgn * at.h[c] / denom;
    int r = m.add_row("cflow_" + cmp.id, lp::Sense::eq,
                      y0 - dydh * at.h[c] - dydm * sm - dydn * sn);
    m.add_term(r, ids->ycomp[c], 1.0);
    m.add_term(r, ids->h[c], -dydh);
    m.add_term(r, ids->sq[nm], -dydm);
    m.add_term(r, ids->sq[nn2], -dydn);

    int rd = m.add_row("cdir_" + cmp.id, lp::Sense::ge, 0.0);
    m.add_term(rd, ids->sq[nm], sgn);
    m.add_term(rd, ids->sq[nn2], -sgn);

    const double ds = compressor_gas_slope(at.h[c], cmp.gas_coeffs);
    int rt = m.add_row("cgas_" + cmp.id, lp::Sense::eq,
                       compressor_gas(at.h[c], cmp.gas_coeffs) - ds * at.h[c]);
    m.add_term(rt, ids->theta[c], 1.0);
    m.add_term(rt, ids->h[c], -ds);
  }
  // Realized supply and curtailment stay inside their physical windows.
  for (int j = 0; j < nj; ++j) {
    int rhi = m.add_row("sup_hi_" + sys_.suppliers[j].id, lp::Sense::le,
                        sys_.suppliers[j].capacity - in.supply[j]);
    m.add_term(rhi, ids->sp[j], 1.0);
    m.add_term(rhi, ids->sm[j], -1.0);
    int rlo = m.add_row("sup_lo_" + sys_.suppliers[j].id, lp::Sense::le, in.supply[j]);
    m.add_term(rlo, ids->sm[j], 1.0);
    m.add_term(rlo, ids->sp[j], -1.0);
  }
  if (in.allow_extra_curtail) {
    for (int d = 0; d < nd; ++d) {
      const double load = sys_.gas_loads[d].profile[in.hour];
      int rhi = m.add_row("cur_hi_" + sys_.gas_loads[d].id, lp::Sense::le,
                          load - in.curtailed[d]);
      m.add_term(rhi, ids->lpos[d], 1.0);
      m.add_term(rhi, ids->lneg[d], -1.0);
      int rlo = m.add_row("cur_lo_" + sys_.gas_loads[d].id, lp::Sense::le, in.curtailed[d]);
      m.add_term(rlo, ids->lneg[d], 1.0);
      m.add_term(rlo, ids->lpos[d], -1.0);
    }
  }
  // Nodal balance; the duals of these rows price gas at each node.
  balance_rows->resize(nn);
  for (int n = 0; n < nn; ++n) {
    const auto& a = adj_.at(n);
    double rhs = 0.0;
    for (int d : a.loads) rhs += sys_.gas_loads[d].profile[in.hour] - in.curtailed[d];
    for (int j : a.suppliers) rhs -= in.supply[j];
    int r = m.add_row("nbal_" + sys_.gas_nodes[n].id, lp::Sense::eq, rhs);
    for (int j : a.suppliers) {
      m.add_term(r, ids->sp[j], 1.0);
      m.add_term(r, ids->sm[j], -1.0);
    }
    for (int d : a.loads) {
      m.add_term(r, ids->lpos[d], 1.0);
      m.add_term(r, ids->lneg[d], -1.0);
    }
    for (int g : a.gfus) m.add_term(r, ids->xhat[g], -1.0);
    for (int c : a.taps) m.add_term(r, ids->theta[c], -1.0);
    for (auto [p, dir] : a.pipelines) m.add_term(r, ids->ypipe[p], dir);
    for (auto [c, dir] : a.compressors) m.add_term(r, ids->ycomp[c], dir);
    (*balance_rows)[n] = r;
  }
  return m;
}

inline void GasSubproblem::refresh_flows(Point* pt) const {
  for (size_t p = 0; p < sys_.pipelines.size(); ++p) {
    const int nm = sys_.gas_node_index.at(sys_.pipelines[p].from_node);
    const int nn = sys_.gas_node_index.at(sys_.pipelines[p].to_node);
    pt->ypipe[p] =
        pipeline_flow_sq(pt->sq[nm], pt->sq[nn], sys_.pipelines[p].weymouth_const);
  }
  for (size_t c = 0; c < sys_.compressors.size(); ++c) {
    const Compressor& cmp = sys_.compressors[c];
    const int nm = sys_.gas_node_index.at(cmp.from_node);
    const int nn = sys_.gas_node_index.at(cmp.to_node);
    // Magnitude is symmetric in hi/lo, so this is the fixed-branch value.
    pt->ycomp[c] = comp_sign_[c] * std::abs(compressor_flow_sq(
                                       pt->sq[nm], pt->sq[nn], pt->h[c], cmp.k1,
                                       cmp.k2, cmp.alpha, cmp.id));
  }
}

inline double GasSubproblem::physics_residual(const Ids& ids, const std::vector<double>& x,
                                              double* max_pipe) const {
  double total = 0.0, worst = 0.0;
  for (size_t p = 0; p < sys_.pipelines.size(); ++p) {
    const int nm = sys_.gas_node_index.at(sys_.pipelines[p].from_node);
    const int nn = sys_.gas_node_index.at(sys_.pipelines[p].to_node);
    const double truth =
        pipeline_flow_sq(x[ids.sq[nm]], x[ids.sq[nn]], sys_.pipelines[p].weymouth_const);
    const double r = std::abs(x[ids.ypipe[p]] - truth);
    total += r;
    worst = std::max(worst, r);
  }
  for (size_t c = 0; c < sys_.compressors.size(); ++c) {
    const Compressor& cmp = sys_.compressors[c];
    const int nm = sys_.gas_node_index.at(cmp.from_node);
    const int nn = sys_.gas_node_index.at(cmp.to_node);
    const double truth =
        comp_sign_[c] * std::abs(compressor_flow_sq(x[ids.sq[nm]], x[ids.sq[nn]],
                                                    x[ids.h[c]], cmp.k1, cmp.k2,
                                                    cmp.alpha, cmp.id));
    total += std::abs(x[ids.ycomp[c]] - truth);
    total += std::abs(x[ids.theta[c]] - compressor_gas(x[ids.h[c]], cmp.gas_coeffs));
  }
  if (max_pipe) *max_pipe = worst;
  return total;
}

inline double GasSubproblem::adjust_cost(const SubproblemInput& in, const Ids& ids,
                                         const std::vector<double>& x) const {
  double cost = 0.0;
  for (size_t j = 0; j < sys_.suppliers.size(); ++j)
    cost += sys_.suppliers[j].unit_cost * (x[ids.sp[j]] + x[ids.sm[j]]);
  for (size_t d = 0; d < sys_.gas_loads.size(); ++d)
    cost += sys_.gas_loads[d].curtail_cost * (x[ids.lpos[d]] + x[ids.lneg[d]]);
  for (size_t g = 0; g < sys_.units.size(); ++g)
    if (ids.xhat[g] >= 0)
      cost += (in.gas_value[g] + opt_.delivery_eps) * (in.booked[g] - x[ids.xhat[g]]);
  return cost;
}

inline SubproblemResult GasSubproblem::solve(const SubproblemInput& in) const {
  const int nu = static_cast<int>(sys_.units.size());
  // Exact-penalty weight: anything above the largest price (the largest
  // possible balance dual) makes physics violations unprofitable; a modest
  // multiple avoids rejecting the tangent overshoot of honest long steps.
  double penalty = 1.0;
  for (const auto& j : sys_.suppliers) penalty = std::max(penalty, j.unit_cost);
  for (const auto& d : sys_.gas_loads) penalty = std::max(penalty, d.curtail_cost);
  for (int g = 0; g < nu; ++g) penalty = std::max(penalty, in.gas_value[g]);
  penalty = 10.0 * (1.0 + penalty);

  Point inc = initial_point(in);
  double trust = opt_.trust_init;
  int improve_streak = 0;
  bool converged = false;
  int used = 0;

  SubproblemResult out;
  for (int it = 0; it < opt_.max_iterations; ++it) {
    used = it + 1;
    Ids ids;
    std::vector<int> balance;
    auto model = build_lp(in, inc, trust, true, &ids, &balance);
    auto sol = lp::solve_lp(model, opt_.lp);
    if (sol.status == lp::LpStatus::infeasible) {
      // The trust box cut off every balanced point; widen and retry. At full
      // range the restriction is gone, so infeasibility there is real.
      if (trust >= 1.0)
        throw SolverError("gas check hour " + std::to_string(in.hour) +
                          ": infeasible even with curtailment options");
      trust = std::min(1.0, trust * 2.0);
      continue;
    }
    if (sol.status != lp::LpStatus::optimal)
      throw SolverError("gas check hour " + std::to_string(in.hour) +
                        ": LP did not solve");

    const double merit = adjust_cost(in, ids, sol.x) +
                         penalty * physics_residual(ids, sol.x, nullptr);
    double step = 0.0;
    for (int n = 0; n < sys_.n_gas_nodes(); ++n)
      step = std::max(step, std::abs(sol.x[ids.sq[n]] - inc.sq[n]) /
                                std::max(1e-12, sq_hi_[n] - sq_lo_[n]));
    for (size_t c = 0; c < sys_.compressors.size(); ++c) {
      const double range = sys_.compressors[c].h_max - sys_.compressors[c].h_min;
      if (range > 0)
        step = std::max(step, std::abs(sol.x[ids.h[c]] - inc.h[c]) / range);
    }

    const bool improved = merit < inc.merit - 1e-9 * (1.0 + std::abs(inc.merit));
    const bool accepted = merit <= inc.merit + 1e-9 * (1.0 + std::abs(inc.merit));
    if (opt_.trace) {
      *opt_.trace << "slp hour " << in.hour << " iter " << used << ": trust=" << trust
                  << " merit=" << merit << " step=" << step
                  << (accepted ? "" : " rejected");
      for (size_t p = 0; p < sys_.pipelines.size(); ++p) {
        const int nm = sys_.gas_node_index.at(sys_.pipelines[p].from_node);
        const int nn = sys_.gas_node_index.at(sys_.pipelines[p].to_node);
        const double truth = pipeline_flow_sq(sol.x[ids.sq[nm]], sol.x[ids.sq[nn]],
                                              sys_.pipelines[p].weymouth_const);
        *opt_.trace << " " << sys_.pipelines[p].id << "=" << sol.x[ids.ypipe[p]]
                    << "/" << truth;
      }
      for (size_t c = 0; c < sys_.compressors.size(); ++c) {
        const Compressor& cmp = sys_.compressors[c];
        const int nm = sys_.gas_node_index.at(cmp.from_node);
        const int nn = sys_.gas_node_index.at(cmp.to_node);
        const double truth = comp_sign_[c] *
                             std::abs(compressor_flow_sq(
                                 sol.x[ids.sq[nm]], sol.x[ids.sq[nn]], sol.x[ids.h[c]],
                                 cmp.k1, cmp.k2, cmp.alpha, cmp.id));
        *opt_.trace << " " << cmp.id << "=" << sol.x[ids.ycomp[c]] << "/" << truth
                    << " h=" << sol.x[ids.h[c]];
      }
      *opt_.trace << "\n";
    }
    if (accepted) {
      for (int n = 0; n < sys_.n_gas_nodes(); ++n) inc.sq[n] = sol.x[ids.sq[n]];
      for (size_t c = 0; c < sys_.compressors.size(); ++c) inc.h[c] = sol.x[ids.h[c]];
      // Re-derive the tangent flows from the physics so every linearization
      // sits on the manifold.
      refresh_flows(&inc);
      inc.merit = merit;
      improve_streak = improved ? improve_streak + 1 : 0;
      if (improve_streak >= 2) {
        trust = std::min(1.0, trust * 2.0);
        improve_streak = 0;
      }
      if (step <= opt_.step_tol) {
        converged = true;
        break;
      }
    } else {
      trust = std::max(opt_.trust_floor, trust * 0.5);
      improve_streak = 0;
      if (trust <= opt_.trust_floor) break;
    }
  }

  // Final LP around the converged point: its duals price the nodal balances
  // and its primal settles the adjustments. Re-linearizing moves the LP
  // optimum a little off the tangent point, so the solve is repeated from its
  // own solution (a contraction near the fixed point) until the physics
  // residual is negligible. A modest box around the incumbent keeps each pass
  // from jumping to a far vertex; duals stay those of the unboxed LP as long
  // as no box bound is active, which is re-checked and the box widened until
  // it holds.
  Ids ids;
  std::vector<int> balance;
  lp::LpSolution sol;
  double best_res = std::numeric_limits<double>::infinity();
  Point best_at = inc;
  double radius = 0.01;
  for (int pass = 0; pass < opt_.polish_cap; ++pass) {
    Ids cur_ids;
    std::vector<int> cur_bal;
    auto frozen = build_lp(in, inc, radius, true, &cur_ids, &cur_bal);
    auto cur = lp::solve_lp(frozen, opt_.lp);
    if (cur.status == lp::LpStatus::infeasible && radius < 1.0) {
      radius = std::min(1.0, radius * 4.0);
      continue;
    }
    if (cur.status != lp::LpStatus::optimal)
      throw SolverError("gas check hour " + std::to_string(in.hour) +
                        ": final LP did not solve (status " +
                        std::to_string(static_cast<int>(cur.status)) + ", pass " +
                        std::to_string(pass) + ")");

    // A box bound strictly inside the physical bounds must not be active,
    // otherwise the duals would price the box instead of the physics.
    bool box_active = false;
    for (int n = 0; n < sys_.n_gas_nodes() && !box_active; ++n) {
      const double r = radius * (sq_hi_[n] - sq_lo_[n]);
      const double v = cur.x[cur_ids.sq[n]], tol = 1e-9 * (1.0 + std::abs(v));
      if ((inc.sq[n] - r > sq_lo_[n] && v <= inc.sq[n] - r + tol) ||
          (inc.sq[n] + r < sq_hi_[n] && v >= inc.sq[n] + r - tol))
        box_active = true;
    }
    for (size_t c = 0; c < sys_.compressors.size() && !box_active; ++c) {
      const Compressor& cmp = sys_.compressors[c];
      const double r = radius * (cmp.h_max - cmp.h_min);
      const double v = cur.x[cur_ids.h[c]], tol = 1e-9 * (1.0 + std::abs(v));
      if ((inc.h[c] - r > cmp.h_min && v <= inc.h[c] - r + tol) ||
          (inc.h[c] + r < cmp.h_max && v >= inc.h[c] + r - tol))
        box_active = true;
    }

    Point next = inc;
    for (int n = 0; n < sys_.n_gas_nodes(); ++n) next.sq[n] = cur.x[cur_ids.sq[n]];
    for (size_t c = 0; c < sys_.compressors.size(); ++c) next.h[c] = cur.x[cur_ids.h[c]];
    refresh_flows(&next);
    double worst = 0.0;
    physics_residual(cur_ids, cur.x, &worst);
    if (opt_.trace)
      *opt_.trace << "slp hour " << in.hour << " final pass " << pass
                  << ": radius=" << radius << " residual=" << worst
                  << (box_active ? " box-active" : "") << "\n";
    if (!box_active && worst < best_res) {
      best_res = worst;
      ids = cur_ids;
      balance = std::move(cur_bal);
      sol = std::move(cur);
      best_at = next;
    }
    if (box_active) {
      radius = std::min(1.0, radius * 4.0);
    } else if (worst > 4.0 * best_res && best_res <= 1e-4) {
      // Drifting away from an already-good point: damp and restart there.
      inc = best_at;
      radius = std::max(1e-4, radius * 0.25);
    } else {
      inc = std::move(next);
    }
    if (best_res <= opt_.residual_target && !box_active) break;
  }
  if (!std::isfinite(best_res))
    throw SolverError("gas check hour " + std::to_string(in.hour) +
                      ": final LP never cleared its step box");

  out.converged = converged;
  out.iterations = used;
  out.max_residual = best_res;
  out.state.sq_pressure = best_at.sq;
  out.state.pipe_flow = best_at.ypipe;
  out.state.comp_power = best_at.h;
  out.state.comp_flow = best_at.ycomp;
  double booked_value = 0.0;
  for (int g = 0; g < nu; ++g)
    booked_value += (in.gas_value[g] + opt_.delivery_eps) * in.booked[g];
  out.objective = sol.objective + booked_value;
  if (out.objective < 0.0 && out.objective > -1e-6) out.objective = 0.0;
  out.node_dual.resize(sys_.n_gas_nodes());
  for (int n = 0; n < sys_.n_gas_nodes(); ++n) out.node_dual[n] = sol.duals[balance[n]];

  GasState& st = out.state;
  st.comp_draw.resize(sys_.compressors.size());
  for (size_t c = 0; c < sys_.compressors.size(); ++c)
    st.comp_draw[c] = compressor_gas(st.comp_power[c], sys_.compressors[c].gas_coeffs);
  st.supply_adj_pos.resize(sys_.suppliers.size());
  st.supply_adj_neg.resize(sys_.suppliers.size());
  for (size_t j = 0; j < sys_.suppliers.size(); ++j) {
    st.supply_adj_pos[j] = sol.x[ids.sp[j]];
    st.supply_adj_neg[j] = sol.x[ids.sm[j]];
  }
  st.curtail_pos.resize(sys_.gas_loads.size());
  st.curtail_neg.resize(sys_.gas_loads.size());
  for (size_t d = 0; d < sys_.gas_loads.size(); ++d) {
    st.curtail_pos[d] = sol.x[ids.lpos[d]];
    st.curtail_neg[d] = sol.x[ids.lneg[d]];
  }
  st.delivered.assign(nu, 0.0);
  for (int g = 0; g < nu; ++g) {
    if (ids.xhat[g] < 0) continue;
    st.delivered[g] = sol.x[ids.xhat[g]];
    out.unsatisfied += std::max(0.0, in.booked[g] - st.delivered[g]);
  }
  return out;
}

// Feasibility cut from the nodal duals: more booking at a scarce node
// tightens, more curtailment there relaxes. Violated by exactly G* at the
// generating point.
inline BendersCut make_feasibility_cut(const JointSystem& sys, const SubproblemInput& in,
                                       const SubproblemResult& res) {
  BendersCut cut;
  cut.hour = in.hour;
  cut.x_coef.assign(sys.units.size(), 0.0);
  cut.shed_coef.assign(sys.gas_loads.size(), 0.0);
  cut.rhs = -res.objective;
  for (size_t g = 0; g < sys.units.size(); ++g) {
    if (!sys.units[g].is_gfu) continue;
    const double mu = res.node_dual[sys.gas_node_index.at(sys.units[g].gas_node)];
    cut.x_coef[g] = mu;
    cut.rhs += mu * in.booked[g];
  }
  for (size_t d = 0; d < sys.gas_loads.size(); ++d) {
    const double mu = res.node_dual[sys.gas_node_index.at(sys.gas_loads[d].node)];
    cut.shed_coef[d] = mu;
    cut.rhs -= mu * in.curtailed[d];
  }
  return cut;
}

}  // namespace ndcgem
