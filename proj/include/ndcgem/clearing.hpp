#pragma once

// Coordination engine: the outer Benders loop between the stochastic
// commitment master and the per-hour gas feasibility sub-problems, dual-based
// price extraction, the power-only baseline flow, and Monte-Carlo real-time
// cost simulation of a finished day-ahead schedule.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ndcgem/gas_subproblem.hpp"
#include "ndcgem/lp/mip.hpp"
#include "ndcgem/lp/simplex.hpp"
#include "ndcgem/lp/writer.hpp"
#include "ndcgem/master.hpp"
#include "ndcgem/model.hpp"
#include "ndcgem/network.hpp"
#include "ndcgem/scenario.hpp"

namespace ndcgem {

// Dual-based prices of the fixed-integer master LP.  A bus's energy price
// aggregates the balance and line duals of every block, making it the exact
// objective sensitivity to one extra MWh of load at that bus; the forecast
// block alone would understate the price by its small weight.
struct PriceResult {
  std::vector<std::vector<double>> lmep;       // [bus][t] $/MWh
  std::vector<double> gas_price;               // [t] $/kcf, uniform over nodes
  std::vector<std::vector<double>> capacity;   // [unit][t] $/kcf, GFUs only
  std::vector<double> energy_dual;             // [t] summed balance duals
  std::vector<std::vector<double>> line_dual;  // [line][t] summed hi+lo duals
  std::vector<double> cut_dual;                // beta >= 0, aligned with cuts
};

// One outer iteration of the coordination loop: SLP effort spent, booked gas
// still undeliverable, and cuts appended this round.
struct OuterIteration {
  int iteration = 0;  // 1-based
  long subproblem_iterations = 0;
  double unsatisfied = 0.0;  // kcf/h summed over hours
  int cuts_added = 0;
};

// One hourly feasibility check, kept for every outer iteration (diagnostics).
struct HourDetail {
  int iteration = 0;  // 1-based outer iteration
  int hour = 0;
  long slp_iterations = 0;
  double objective = 0.0;    // G* $
  double unsatisfied = 0.0;  // kcf/h
};

struct ClearingOptions {
  lp::MipOptions mip;
  SubproblemOptions gas;
  int max_outer = 20;
  double cut_threshold = 1e-6;  // $ of sub-problem objective tolerated
  std::ostream* trace = nullptr;
  std::string lp_dump_dir;  // when set, master models are written here
};

struct ClearingResult {
  MasterKind kind = MasterKind::coordinated;
  MasterSolution schedule;
  PriceResult prices;
  std::vector<std::vector<double>> gas_value;  // zeta [unit][t] $/kcf
  std::vector<BendersCut> cuts;
  std::vector<OuterIteration> log;
  std::vector<HourDetail> hour_log;          // every (iteration, hour) check
  std::vector<SubproblemResult> hourly_gas;  // final feasibility pass, per hour
  std::vector<double> compressor_draw;       // kcf/h per hour, final pass
  double expected_cost = 0.0;  // baseline includes the assumed gas bulk cost
  double wall_seconds = 0.0;
};

// Fix every integer variable at its rounded incumbent value and re-solve the
// LP; the duals of this resolve define all prices.
inline lp::LpSolution fix_and_resolve(const lp::LinearModel& model,
                                      const std::vector<double>& incumbent,
                                      lp::SimplexOptions opt = {}) {
  lp::LinearModel fixed = model;
  for (int j = 0; j < model.n_vars(); ++j) {
    if (!model.vars[j].integer) continue;
    const double v = std::round(incumbent[j]);
    fixed.vars[j].lb = fixed.vars[j].ub = v;
    fixed.vars[j].integer = false;
  }
  lp::LpSolution sol = lp::solve_lp(fixed, opt);
  if (!sol.ok())
    throw SolverError("fixed-integer resolve failed (status " +
                      std::to_string(static_cast<int>(sol.status)) + ")");
  return sol;
}

inline PriceResult extract_prices(const MasterProblem& mp, const lp::LpSolution& lp) {
  const JointSystem& sys = mp.system();
  const PtdfMatrix& ptdf = mp.ptdf();
  const int T = sys.horizon;
  const int nm = sys.n_buses();
  const int nq = static_cast<int>(sys.lines.size());

  PriceResult out;
  out.energy_dual.assign(T, 0.0);
  out.line_dual.assign(nq, std::vector<double>(T, 0.0));
  for (int b = 0; b < mp.n_blocks(); ++b)
    for (int t = 0; t < T; ++t) {
      out.energy_dual[t] += lp.duals[mp.balance_row(b, t)];
      for (int q = 0; q < nq; ++q)
        out.line_dual[q][t] += lp.duals[mp.line_hi_row(b, q, t)] +
                               lp.duals[mp.line_lo_row(b, q, t)];
    }
  out.lmep.assign(nm, std::vector<double>(T, 0.0));
  for (int m = 0; m < nm; ++m)
    for (int t = 0; t < T; ++t) {
      double price = out.energy_dual[t];
      for (int q = 0; q < nq; ++q) price += ptdf(q, m) * out.line_dual[q][t];
      out.lmep[m][t] = price;
    }

  // The gas price is uniform over nodes: the system gas-balance duals summed
  // over every block, for the same reason as the energy price.  The base
  // schedule spans all blocks, so one extra kcf/h of firm demand touches each
  // of them; the forecast row alone carries only a degenerate slice.  The
  // baseline has no gas rows and assumes the mean supplier cost.
  out.gas_price.assign(T, sys.mean_supplier_cost());
  if (mp.coordinated())
    for (int t = 0; t < T; ++t) {
      double price = 0.0;
      for (int b = 0; b < mp.n_blocks(); ++b)
        price += lp.duals[mp.gas_balance_row(b, t)];
      out.gas_price[t] = price;
    }

  // Capacity prices: cut-row duals folded back through each cut's booking
  // coefficients.  Cut rows are <=, so optimal duals are <= 0; beta is their
  // magnitude and vanishes exactly on every non-binding cut.
  out.capacity.assign(sys.units.size(), std::vector<double>(T, 0.0));
  for (const auto& cr : mp.cuts()) {
    const double beta = std::max(0.0, -lp.duals[cr.row]);
    out.cut_dual.push_back(beta);
    for (size_t g = 0; g < sys.units.size(); ++g)
      out.capacity[g][cr.cut.hour] += cr.cut.x_coef[g] * beta;
  }
  return out;
}

// Value of delivered gas to the power system: the energy price at the unit's
// bus divided by the heat-rate slope active at the forecast dispatch
// (right-hand slope at breakpoints).  Offline hours are worth zero, and
// negative implied values clamp to zero per the sub-problem's contract.
inline std::vector<std::vector<double>> marginal_gas_value(
    const JointSystem& sys, const MasterSolution& sched, const PriceResult& prices) {
  const int T = sys.horizon;
  std::vector<std::vector<double>> zeta(sys.units.size(),
                                        std::vector<double>(T, 0.0));
  for (size_t g = 0; g < sys.units.size(); ++g) {
    const Unit& u = sys.units[g];
    if (!u.is_gfu) continue;
    const int m = sys.bus_index.at(u.bus);
    for (int t = 0; t < T; ++t) {
      if (!sched.on[g][t]) continue;
      const double slope = u.heat_curve.right_slope(sched.da.p[g][t]);
      if (slope <= 0.0)
        throw ValidationError("unit " + u.id + ": nonpositive heat-rate slope");
      zeta[g][t] = std::max(0.0, prices.lmep[m][t] / slope);
    }
  }
  return zeta;
}

namespace detail {

// Booked capacity beyond the forecast burn is procured in real time, so the
// feasibility check sees it as available supply: the shortfall against the
// base schedules is allocated pro rata to each supplier's remaining capacity.
inline std::vector<double> augmented_supply(const JointSystem& sys,
                                            const MasterSolution& s, int t) {
  double needed = 0.0;
  for (size_t g = 0; g < sys.units.size(); ++g)
    needed += std::max(0.0, s.booking[g][t] - s.da.burn[g][t]);
  const size_t nj = sys.suppliers.size();
  std::vector<double> head(nj, 0.0);
  double total = 0.0;
  for (size_t j = 0; j < nj; ++j) {
    head[j] = std::max(0.0, sys.suppliers[j].capacity - s.supply0[j][t]);
    total += head[j];
  }
  const double ratio = total > 0.0 ? std::min(1.0, needed / total) : 0.0;
  std::vector<double> out(nj, 0.0);
  for (size_t j = 0; j < nj; ++j) out[j] = s.supply0[j][t] + ratio * head[j];
  return out;
}

template <typename Grid>
inline std::vector<double> column(const Grid& grid, int t) {
  std::vector<double> out(grid.size(), 0.0);
  for (size_t i = 0; i < grid.size(); ++i) out[i] = grid[i][t];
  return out;
}

}  // namespace detail

// Coordinated clearing: alternate between the cut-augmented master and the
// per-hour gas checks until every booked schedule is deliverable.  Prices and
// the implied gas values are refreshed from the fixed-integer resolve of each
// round, so the first pass prices the cut-free master.
inline ClearingResult clear(const JointSystem& sys, const ScenarioSet& scen,
                            ClearingOptions opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  validate_scenarios(sys, scen);
  const PtdfMatrix ptdf = compute_ptdf(sys);
  MasterProblem master(sys, scen, ptdf);
  const GasSubproblem gas(sys, opt.gas);
  const int T = sys.horizon;

  ClearingResult out;
  out.kind = MasterKind::coordinated;
  for (int it = 1; it <= opt.max_outer; ++it) {
    if (!opt.lp_dump_dir.empty())
      lp::write_lp_file(master.model(), opt.lp_dump_dir + "/master_it" +
                                            std::to_string(it) + ".lp");
    const lp::MipSolution mip = lp::solve_mip(master.model(), opt.mip);
    if (!mip.ok())
      throw SolverError("master problem not solved to optimality (status " +
                        std::to_string(static_cast<int>(mip.status)) + ")");
    const lp::LpSolution fixed = fix_and_resolve(master.model(), mip.x, opt.mip.lp);
    out.schedule = master.decode(fixed.x);
    out.prices = extract_prices(master, fixed);
    out.gas_value = marginal_gas_value(sys, out.schedule, out.prices);

    OuterIteration rec;
    rec.iteration = it;
    std::vector<SubproblemResult> hourly;
    std::vector<double> theta(T, 0.0);
    for (int t = 0; t < T; ++t) {
      SubproblemInput in;
      in.hour = t;
      in.booked = detail::column(out.schedule.booking, t);
      in.curtailed = detail::column(out.schedule.shed_gas, t);
      in.supply = detail::augmented_supply(sys, out.schedule, t);
      in.gas_value = detail::column(out.gas_value, t);
      SubproblemResult res = gas.solve(in);
      rec.subproblem_iterations += res.iterations;
      rec.unsatisfied += res.unsatisfied;
      out.hour_log.push_back(
          {it, t, res.iterations, res.objective, res.unsatisfied});
      for (double draw : res.state.comp_draw) theta[t] += draw;
      if (res.objective > opt.cut_threshold) {
        master.add_cut(make_feasibility_cut(sys, in, res));
        ++rec.cuts_added;
      }
      hourly.push_back(std::move(res));
    }
    out.log.push_back(rec);
    out.hourly_gas = std::move(hourly);
    out.compressor_draw = std::move(theta);
    if (opt.trace)
      *opt.trace << "outer " << it << ": slp_iters=" << rec.subproblem_iterations
                 << " unsatisfied=" << rec.unsatisfied
                 << " cuts_added=" << rec.cuts_added
                 << " cost=" << out.schedule.costs.total << "\n";
    if (rec.cuts_added == 0) {
      for (const auto& cr : master.cuts()) out.cuts.push_back(cr.cut);
      out.expected_cost = out.schedule.costs.total;
      out.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      return out;
    }
    master.set_compressor_draw(out.compressor_draw);
  }
  throw SolverError("gas feasibility did not converge within " +
                    std::to_string(opt.max_outer) + " outer iterations");
}

// Power-only reference flow: clear the market ignoring the gas network, then
// check post hoc what the pipelines can actually deliver against the implied
// bookings (the per-block maximum burn).  Supplies dispatch fresh and gas
// loads are firm, so the check reports the physical shortfall the gas-fired
// units would face.  No cuts, no re-iteration.
inline ClearingResult clear_baseline(const JointSystem& sys, const ScenarioSet& scen,
                                     ClearingOptions opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  validate_scenarios(sys, scen);
  const PtdfMatrix ptdf = compute_ptdf(sys);
  MasterProblem master(sys, scen, ptdf, {MasterKind::baseline, 1e-5});
  const int T = sys.horizon;

  if (!opt.lp_dump_dir.empty())
    lp::write_lp_file(master.model(), opt.lp_dump_dir + "/baseline.lp");
  const lp::MipSolution mip = lp::solve_mip(master.model(), opt.mip);
  if (!mip.ok())
    throw SolverError("baseline master not solved to optimality (status " +
                      std::to_string(static_cast<int>(mip.status)) + ")");
  const lp::LpSolution fixed = fix_and_resolve(master.model(), mip.x, opt.mip.lp);

  ClearingResult out;
  out.kind = MasterKind::baseline;
  out.schedule = master.decode(fixed.x);
  out.prices = extract_prices(master, fixed);
  out.gas_value = marginal_gas_value(sys, out.schedule, out.prices);

  // Implied booking: the worst-case burn over the forecast and every
  // scenario, reconstructed from the heat curves (baseline blocks carry no
  // burn variables).
  std::vector<std::vector<double>> implied(sys.units.size(),
                                           std::vector<double>(T, 0.0));
  for (size_t g = 0; g < sys.units.size(); ++g) {
    const Unit& u = sys.units[g];
    if (!u.is_gfu) continue;
    for (int t = 0; t < T; ++t) {
      if (!out.schedule.on[g][t]) continue;
      double burn = u.heat_curve.value(out.schedule.da.p[g][t]);
      for (const auto& blk : out.schedule.rt)
        burn = std::max(burn, u.heat_curve.value(blk.p[g][t]));
      implied[g][t] = burn;
    }
  }

  const GasSubproblem gas(sys, opt.gas);
  OuterIteration rec;
  rec.iteration = 1;
  out.compressor_draw.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    SubproblemInput in;
    in.hour = t;
    in.booked = detail::column(implied, t);
    in.curtailed.assign(sys.gas_loads.size(), 0.0);
    in.supply.assign(sys.suppliers.size(), 0.0);
    in.gas_value = detail::column(out.gas_value, t);
    in.allow_extra_curtail = false;
    SubproblemResult res = gas.solve(in);
    rec.subproblem_iterations += res.iterations;
    rec.unsatisfied += res.unsatisfied;
    out.hour_log.push_back({1, t, res.iterations, res.objective, res.unsatisfied});
    for (double draw : res.state.comp_draw) out.compressor_draw[t] += draw;
    out.hourly_gas.push_back(std::move(res));
  }
  out.log.push_back(rec);
  if (opt.trace)
    *opt.trace << "baseline: slp_iters=" << rec.subproblem_iterations
               << " unsatisfied=" << rec.unsatisfied
               << " cost=" << out.schedule.costs.total << "\n";

  // The baseline market never buys the firm gas load or compressor fuel;
  // add that bulk at the assumed price so both designs report out-of-pocket
  // cost for the whole coupled system.
  double bulk = 0.0;
  for (int t = 0; t < T; ++t) {
    for (const auto& load : sys.gas_loads) bulk += load.profile[t];
    bulk += out.compressor_draw[t];
  }
  out.expected_cost = out.schedule.costs.total + sys.mean_supplier_cost() * bulk;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

// --- real-time simulation ---

struct RtOutcome {
  double cost = 0.0;           // realized $ for the day
  double shed_energy = 0.0;    // MWh
  double gas_deviation = 0.0;  // kcf summed |deviation| from the gas position
  bool solved = false;
};

struct RtReport {
  std::vector<RtOutcome> outcomes;  // per draw
  double mean_cost = 0.0;           // over solved draws
  std::vector<double> mean_lmep;    // [t] $/MWh, balance dual averaged
  int failures = 0;
};

namespace detail {

// Re-dispatch for one realized wind day with the commitment frozen.  Units
// may derate below their minimum output (a gas-starved or surplus-bound unit
// backs down rather than rendering the day infeasible), so together with the
// shed variables every draw admits a feasible point.
struct RtDispatchLp {
  lp::LinearModel model;
  std::vector<std::vector<int>> p, burn;  // [unit][t]
  std::vector<std::vector<int>> dp, dm;   // [supplier][t], coordinated only
  std::vector<std::vector<int>> shed;     // [bus][t]
  std::vector<int> balance;               // row per t
  double committed = 0.0;                 // $ fixed by the day-ahead schedule
};

inline RtDispatchLp build_rt_dispatch(const JointSystem& sys, const PtdfMatrix& ptdf,
                                      const ClearingResult& da,
                                      const WindProfile& draw) {
  const bool coordinated = da.kind == MasterKind::coordinated;
  const int T = sys.horizon;
  const int nu = static_cast<int>(sys.units.size());
  const int nm = sys.n_buses();
  const double mean_mu = sys.mean_supplier_cost();
  const MasterSolution& sched = da.schedule;

  RtDispatchLp rt;
  lp::LinearModel& m = rt.model;
  auto grid = [&](int a) { return std::vector<std::vector<int>>(a, std::vector<int>(T, -1)); };
  rt.p = grid(nu);
  rt.burn = grid(nu);
  rt.shed = grid(nm);

  for (int g = 0; g < nu; ++g) {
    const Unit& u = sys.units[g];
    const std::string tag = "_" + u.id + "_";
    for (int t = 0; t < T; ++t) {
      const bool on = sched.on[g][t] != 0;
      const std::string ts = std::to_string(t);
      rt.p[g][t] = m.add_var("p" + tag + ts, 0, on ? u.p_max : 0.0, 0.0);
      if (u.is_gfu) {
        // Delivered day-ahead capacity caps the burn: the booking for the
        // coordinated design, the post-hoc feasible allocation otherwise.
        const double cap =
            on ? (coordinated ? sched.booking[g][t]
                              : da.hourly_gas[t].state.delivered[g])
               : 0.0;
        rt.burn[g][t] = m.add_var("burn" + tag + ts, 0, cap,
                                  coordinated ? 0.0 : mean_mu);
        if (on && cap + 1e-9 >= u.heat_curve.value(0.0)) {
          for (int seg = 0; seg < u.heat_curve.segments(); ++seg) {
            int r = m.add_row("heat" + tag + ts + "_" + std::to_string(seg),
                              lp::Sense::ge, u.heat_curve.intercept(seg));
            m.add_term(r, rt.burn[g][t], 1.0);
            m.add_term(r, rt.p[g][t], -u.heat_curve.slope(seg));
          }
        } else {
          // Not even the no-load burn is deliverable: the unit trips.
          m.vars[rt.p[g][t]].ub = 0.0;
        }
      } else if (on) {
        const PiecewiseCurve& curve = u.fuel_curve();
        int c = m.add_var("c" + tag + ts, 0, lp::kInf, 1.0);
        for (int seg = 0; seg < curve.segments(); ++seg) {
          int r = m.add_row("fuel" + tag + ts + "_" + std::to_string(seg),
                            lp::Sense::ge, curve.intercept(seg));
          m.add_term(r, c, 1.0);
          m.add_term(r, rt.p[g][t], -curve.slope(seg));
        }
      }
    }
    const double allowance = std::max(u.p_min, u.ramp);
    for (int t = 0; t + 1 < T; ++t) {
      int rup = m.add_row("rampup" + tag + std::to_string(t), lp::Sense::le,
                          sched.on[g][t] * u.ramp + sched.startup[g][t + 1] * allowance);
      m.add_term(rup, rt.p[g][t + 1], 1.0);
      m.add_term(rup, rt.p[g][t], -1.0);
      int rdn = m.add_row("rampdn" + tag + std::to_string(t), lp::Sense::le,
                          sched.on[g][t + 1] * u.ramp + sched.shutdown[g][t + 1] * allowance);
      m.add_term(rdn, rt.p[g][t], 1.0);
      m.add_term(rdn, rt.p[g][t + 1], -1.0);
    }
  }

  std::vector<std::vector<int>> wind(sys.windfarms.size(), std::vector<int>(T, -1));
  for (size_t f = 0; f < sys.windfarms.size(); ++f) {
    const auto& profile = draw.farms.at(sys.windfarms[f].id);
    for (int t = 0; t < T; ++t)
      wind[f][t] = m.add_var("w_" + sys.windfarms[f].id + "_" + std::to_string(t),
                             0, profile[t], 0.0);
  }
  for (int mi = 0; mi < nm; ++mi)
    for (int t = 0; t < T; ++t)
      rt.shed[mi][t] = m.add_var("she_" + sys.buses[mi].id + "_" + std::to_string(t),
                                 0, sys.buses[mi].load_profile[t],
                                 sys.buses[mi].voll);

  rt.balance.assign(T, -1);
  for (int t = 0; t < T; ++t) {
    double total_load = 0.0;
    for (const auto& bus : sys.buses) total_load += bus.load_profile[t];
    int r = m.add_row("bal_" + std::to_string(t), lp::Sense::eq, total_load);
    for (int g = 0; g < nu; ++g) m.add_term(r, rt.p[g][t], 1.0);
    for (size_t f = 0; f < sys.windfarms.size(); ++f) m.add_term(r, wind[f][t], 1.0);
    for (int mi = 0; mi < nm; ++mi) m.add_term(r, rt.shed[mi][t], 1.0);
    rt.balance[t] = r;
  }
  for (size_t q = 0; q < sys.lines.size(); ++q) {
    for (int t = 0; t < T; ++t) {
      double load_part = 0.0;
      for (int mi = 0; mi < nm; ++mi)
        load_part += ptdf(static_cast<int>(q), mi) * sys.buses[mi].load_profile[t];
      const std::string rn = "_" + sys.lines[q].id + "_" + std::to_string(t);
      int rhi = m.add_row("flowhi" + rn, lp::Sense::le,
                          sys.lines[q].capacity + load_part);
      int rlo = m.add_row("flowlo" + rn, lp::Sense::ge,
                          -sys.lines[q].capacity + load_part);
      for (int mi = 0; mi < nm; ++mi) {
        const double gamma = ptdf(static_cast<int>(q), mi);
        if (gamma == 0.0) continue;
        for (int g = 0; g < nu; ++g)
          if (sys.bus_index.at(sys.units[g].bus) == mi) {
            m.add_term(rhi, rt.p[g][t], gamma);
            m.add_term(rlo, rt.p[g][t], gamma);
          }
        for (size_t f = 0; f < sys.windfarms.size(); ++f)
          if (sys.bus_index.at(sys.windfarms[f].bus) == mi) {
            m.add_term(rhi, wind[f][t], gamma);
            m.add_term(rlo, wind[f][t], gamma);
          }
        m.add_term(rhi, rt.shed[mi][t], gamma);
        m.add_term(rlo, rt.shed[mi][t], gamma);
      }
    }
  }

  rt.committed = sched.costs.commitment;
  if (coordinated) {
    const int nj = static_cast<int>(sys.suppliers.size());
    rt.dp = grid(nj);
    rt.dm = grid(nj);
    for (int j = 0; j < nj; ++j) {
      const GasSupplier& sup = sys.suppliers[j];
      const std::string tag = "_" + sup.id + "_";
      for (int t = 0; t < T; ++t) {
        const std::string ts = std::to_string(t);
        const double base = sched.supply0[j][t];
        rt.dp[j][t] = m.add_var("dsp" + tag + ts, 0, lp::kInf,
                                sys.economics.dev_penalty_pos + sup.unit_cost);
        rt.dm[j][t] = m.add_var("dsm" + tag + ts, 0, lp::kInf,
                                sys.economics.dev_penalty_neg - sup.unit_cost);
        int rhi = m.add_row("suphi" + tag + ts, lp::Sense::le, sup.capacity - base);
        m.add_term(rhi, rt.dp[j][t], 1.0);
        m.add_term(rhi, rt.dm[j][t], -1.0);
        int rlo = m.add_row("suplo" + tag + ts, lp::Sense::ge, -base);
        m.add_term(rlo, rt.dp[j][t], 1.0);
        m.add_term(rlo, rt.dm[j][t], -1.0);
      }
    }
    for (int t = 0; t < T; ++t) {
      // Realized supply covers firm load net of scheduled curtailment, the
      // realized burn, and the compressor draw.
      double demand = da.compressor_draw.empty() ? 0.0 : da.compressor_draw[t];
      for (size_t d = 0; d < sys.gas_loads.size(); ++d)
        demand += sys.gas_loads[d].profile[t] - sched.shed_gas[d][t];
      for (int j = 0; j < nj; ++j) demand -= sched.supply0[j][t];
      int r = m.add_row("gasbal_" + std::to_string(t), lp::Sense::eq, demand);
      for (int j = 0; j < nj; ++j) {
        m.add_term(r, rt.dp[j][t], 1.0);
        m.add_term(r, rt.dm[j][t], -1.0);
      }
      for (int g = 0; g < nu; ++g)
        if (sys.units[g].is_gfu) m.add_term(r, rt.burn[g][t], -1.0);
    }
    for (int j = 0; j < nj; ++j)
      for (int t = 0; t < T; ++t)
        rt.committed += sys.suppliers[j].unit_cost * sched.supply0[j][t];
    for (size_t d = 0; d < sys.gas_loads.size(); ++d)
      for (int t = 0; t < T; ++t)
        rt.committed += sys.gas_loads[d].curtail_cost * sched.shed_gas[d][t];
  } else {
    // Fresh spot purchases for the firm gas load and compressor fuel at the
    // assumed price; the burn variables carry their own cost.
    double bulk = 0.0;
    for (int t = 0; t < T; ++t) {
      for (const auto& load : sys.gas_loads) bulk += load.profile[t];
      if (!da.compressor_draw.empty()) bulk += da.compressor_draw[t];
    }
    rt.committed += mean_mu * bulk;
  }
  return rt;
}

}  // namespace detail

// Monte-Carlo evaluation of a finished day-ahead schedule: one re-dispatch LP
// per wind draw, commitment frozen.  Solver failures are recorded per draw
// and excluded from the aggregates rather than aborting the batch.
inline RtReport simulate_rt(const JointSystem& sys, const ClearingResult& da,
                            const std::vector<WindProfile>& draws,
                            lp::SimplexOptions lp_opt = {}) {
  if (draws.empty()) throw ValidationError("simulate_rt: no wind draws supplied");
  const PtdfMatrix ptdf = compute_ptdf(sys);
  const int T = sys.horizon;
  const bool coordinated = da.kind == MasterKind::coordinated;

  // Baseline deviations measure realized burn against the schedule's own
  // forecast plan (there is no supplier position to deviate from).
  std::vector<std::vector<double>> plan_burn(sys.units.size(),
                                             std::vector<double>(T, 0.0));
  if (!coordinated)
    for (size_t g = 0; g < sys.units.size(); ++g)
      if (sys.units[g].is_gfu)
        for (int t = 0; t < T; ++t)
          if (da.schedule.on[g][t])
            plan_burn[g][t] =
                sys.units[g].heat_curve.value(da.schedule.da.p[g][t]);

  RtReport report;
  report.mean_lmep.assign(T, 0.0);
  for (const WindProfile& draw : draws) {
    detail::RtDispatchLp rt = detail::build_rt_dispatch(sys, ptdf, da, draw);
    const lp::LpSolution sol = lp::solve_lp(rt.model, lp_opt);
    RtOutcome oc;
    if (sol.ok()) {
      oc.solved = true;
      oc.cost = sol.objective + rt.committed;
      for (int mi = 0; mi < sys.n_buses(); ++mi)
        for (int t = 0; t < T; ++t) oc.shed_energy += sol.x[rt.shed[mi][t]];
      if (coordinated) {
        for (size_t j = 0; j < sys.suppliers.size(); ++j)
          for (int t = 0; t < T; ++t)
            oc.gas_deviation += sol.x[rt.dp[j][t]] + sol.x[rt.dm[j][t]];
      } else {
        for (size_t g = 0; g < sys.units.size(); ++g)
          if (rt.burn[g][0] >= 0)
            for (int t = 0; t < T; ++t)
              oc.gas_deviation += std::abs(sol.x[rt.burn[g][t]] - plan_burn[g][t]);
      }
      report.mean_cost += oc.cost;
      for (int t = 0; t < T; ++t) report.mean_lmep[t] += sol.duals[rt.balance[t]];
    } else {
      ++report.failures;
    }
    report.outcomes.push_back(oc);
  }
  const int solved = static_cast<int>(report.outcomes.size()) - report.failures;
  if (solved > 0) {
    report.mean_cost /= solved;
    for (double& v : report.mean_lmep) v /= solved;
  }
  return report;
}

}  // namespace ndcgem
