#pragma once

// Stochastic day-ahead master problem: unit commitment plus dispatch for the
// forecast block and every wind scenario, a system-wide gas balance, supplier
// schedules with per-scenario deviations, gas delivery bookings, and the
// feasibility cuts supplied by the gas sub-problem.
//
// Block indexing convention throughout: block 0 is the day-ahead forecast,
// block 1+w is wind scenario w.  Commitment, gas base schedules, gas load
// curtailment, and bookings are shared across blocks (non-anticipative);
// dispatch, wind use, electric shedding, and supplier deviations are per
// block.

#include <string>
#include <vector>

#include "ndcgem/lp/model.hpp"
#include "ndcgem/model.hpp"
#include "ndcgem/network.hpp"
#include "ndcgem/scenario.hpp"

namespace ndcgem {

// One linearized feasibility cut from the gas sub-problem at a given hour:
//   sum_g x_coef[g] * x[g][hour] - sum_d shed_coef[d] * shedG[d][hour] <= rhs
// Coefficients are nodal gas duals: x_coef per unit (zero for non-GFUs),
// shed_coef per gas load.
struct BendersCut {
  int hour = 0;
  double rhs = 0.0;
  std::vector<double> x_coef;     // per unit index
  std::vector<double> shed_coef;  // per gas load index
};

struct CostBreakdown {
  double commitment = 0.0;     // startup + shutdown fees
  double gas_purchase = 0.0;   // supplier base schedules
  double gas_shed = 0.0;       // compensated gas load curtailment
  double booking_tiebreak = 0.0;
  double da_power = 0.0;       // weighted forecast-block fuel + shed value
  double rt_expected = 0.0;    // probability-weighted scenario costs
  double total = 0.0;
};

// Per-block dispatch of a decoded master solution, all indexed [entity][hour].
struct BlockDispatch {
  std::vector<std::vector<double>> p;       // [unit][t] MW
  std::vector<std::vector<double>> wind;    // [farm][t] MW
  std::vector<std::vector<double>> shed_e;  // [bus][t] MW
  std::vector<std::vector<double>> burn;    // [unit][t] kcf/h, GFUs only
  std::vector<std::vector<double>> fuel_cost;  // [unit][t] $/h, epigraph value
};

struct MasterSolution {
  std::vector<std::vector<int>> on, startup, shutdown;  // [unit][t]
  BlockDispatch da;
  std::vector<BlockDispatch> rt;                     // [scenario]
  std::vector<std::vector<double>> booking;          // x [unit][t], GFUs only
  std::vector<std::vector<double>> supply0;          // s0 [supplier][t]
  std::vector<std::vector<double>> shed_gas;         // [gas load][t]
  std::vector<std::vector<std::vector<double>>> dev_pos, dev_neg;  // [w][j][t]
  CostBreakdown costs;
};

enum class MasterKind {
  coordinated,  // gas-aware master with bookings and cuts
  baseline      // power-only master, GFU fuel priced at the mean gas cost
};

struct MasterOptions {
  MasterKind kind = MasterKind::coordinated;
  double booking_epsilon = 1e-5;  // $/kcf tiebreak so x tracks max burn
};

class MasterProblem {
 public:
  MasterProblem(const JointSystem& sys, const ScenarioSet& scen,
                const PtdfMatrix& ptdf, MasterOptions opt = {})
      : sys_(sys), scen_(scen), ptdf_(ptdf), opt_(opt) {
    T_ = sys.horizon;
    W_ = static_cast<int>(scen.rt_scenarios.size());
    build();
  }

  const lp::LinearModel& model() const { return model_; }
  lp::LinearModel& model() { return model_; }

  int n_blocks() const { return 1 + W_; }
  bool coordinated() const { return opt_.kind == MasterKind::coordinated; }
  const JointSystem& system() const { return sys_; }
  const ScenarioSet& scenarios() const { return scen_; }
  const PtdfMatrix& ptdf() const { return ptdf_; }

  // --- variable ids ---
  int v(int g, int t) const { return v_[g][t]; }
  int vu(int g, int t) const { return vu_[g][t]; }
  int vd(int g, int t) const { return vd_[g][t]; }
  int p(int b, int g, int t) const { return p_[b][g][t]; }
  int wind(int b, int f, int t) const { return w_[b][f][t]; }
  int shed_e(int b, int m, int t) const { return shede_[b][m][t]; }
  int burn(int b, int g, int t) const { return burn_[b][g][t]; }    // -1 unless GFU
  int booking(int g, int t) const { return x_[g][t]; }              // -1 unless GFU
  int supply0(int j, int t) const { return s0_[j][t]; }
  int shed_gas(int d, int t) const { return shedg_[d][t]; }
  int dev_pos(int w, int j, int t) const { return dsp_[w][j][t]; }
  int dev_neg(int w, int j, int t) const { return dsm_[w][j][t]; }

  // --- row ids (for duals) ---
  int balance_row(int b, int t) const { return bal_[b][t]; }
  int line_hi_row(int b, int q, int t) const { return line_hi_[b][q][t]; }
  int line_lo_row(int b, int q, int t) const { return line_lo_[b][q][t]; }
  int gas_balance_row(int b, int t) const { return gasbal_[b][t]; }
  struct CutRow {
    int row;
    BendersCut cut;
  };
  const std::vector<CutRow>& cuts() const { return cut_rows_; }

  // Hourly compressor fuel draw added to the gas balance demand side.
  void set_compressor_draw(const std::vector<double>& theta) {
    if (!coordinated()) return;
    if (static_cast<int>(theta.size()) != T_)
      throw ValidationError("compressor draw profile length mismatch");
    for (int b = 0; b < n_blocks(); ++b)
      for (int t = 0; t < T_; ++t)
        model_.rows[gasbal_[b][t]].rhs = gas_demand_[t] + theta[t];
  }

  void add_cut(const BendersCut& cut) {
    if (!coordinated()) throw ValidationError("cuts only apply to the coordinated master");
    const int r = model_.add_row("cut" + std::to_string(cut_rows_.size()) + "_t" +
                                     std::to_string(cut.hour),
                                 lp::Sense::le, cut.rhs);
    for (size_t g = 0; g < sys_.units.size(); ++g)
      if (cut.x_coef[g] != 0.0) model_.add_term(r, x_[g][cut.hour], cut.x_coef[g]);
    for (size_t d = 0; d < sys_.gas_loads.size(); ++d)
      if (cut.shed_coef[d] != 0.0)
        model_.add_term(r, shedg_[d][cut.hour], -cut.shed_coef[d]);
    cut_rows_.push_back({r, cut});
  }

  MasterSolution decode(const std::vector<double>& x) const;

 private:
  // Owned copies: the problem must outlive any temporaries it was built from.
  JointSystem sys_;
  ScenarioSet scen_;
  PtdfMatrix ptdf_;
  MasterOptions opt_;
  lp::LinearModel model_;
  int T_ = 0, W_ = 0;

  using Grid = std::vector<std::vector<int>>;
  Grid v_, vu_, vd_, x_, s0_, shedg_;
  std::vector<Grid> p_, c_, w_, shede_, burn_;  // [block][entity][t]
  std::vector<Grid> dsp_, dsm_;                 // [scenario][supplier][t]
  Grid bal_, gasbal_;                           // [block][t]
  std::vector<Grid> line_hi_, line_lo_;         // [block][line][t]
  std::vector<double> gas_demand_;              // per hour, base rhs
  std::vector<CutRow> cut_rows_;

  double block_weight(int b) const {
    return b == 0 ? sys_.economics.da_weight : scen_.rt_scenarios[b - 1].weight;
  }

  const std::vector<double>& wind_profile(int b, const std::string& farm) const {
    return b == 0 ? scen_.da_forecast.farms.at(farm)
                  : scen_.rt_scenarios[b - 1].profile.farms.at(farm);
  }

  void build();
  void build_commitment();
  void build_block(int b);
  void build_gas();
};

inline void MasterProblem::build() {
  const int nu = static_cast<int>(sys_.units.size());
  const int nf = static_cast<int>(sys_.windfarms.size());
  const int nm = sys_.n_buses();
  const int nq = static_cast<int>(sys_.lines.size());
  const int nj = static_cast<int>(sys_.suppliers.size());
  const int nd = static_cast<int>(sys_.gas_loads.size());
  const int nblk = n_blocks();

  auto grid = [&](int a, int b2) { return Grid(a, std::vector<int>(b2, -1)); };
  v_ = grid(nu, T_);
  vu_ = grid(nu, T_);
  vd_ = grid(nu, T_);
  x_ = grid(nu, T_);
  s0_ = grid(nj, T_);
  shedg_ = grid(nd, T_);
  p_.assign(nblk, grid(nu, T_));
  c_.assign(nblk, grid(nu, T_));
  burn_.assign(nblk, grid(nu, T_));
  w_.assign(nblk, grid(nf, T_));
  shede_.assign(nblk, grid(nm, T_));
  dsp_.assign(W_, grid(nj, T_));
  dsm_.assign(W_, grid(nj, T_));
  bal_ = grid(nblk, T_);
  gasbal_ = grid(nblk, T_);
  line_hi_.assign(nblk, grid(nq, T_));
  line_lo_.assign(nblk, grid(nq, T_));

  build_commitment();
  for (int b = 0; b < nblk; ++b) build_block(b);
  if (coordinated()) build_gas();
}

inline void MasterProblem::build_commitment() {
  for (size_t g = 0; g < sys_.units.size(); ++g) {
    const Unit& u = sys_.units[g];
    const std::string tag = "_" + u.id + "_";
    for (int t = 0; t < T_; ++t) {
      const std::string ts = std::to_string(t);
      v_[g][t] = model_.add_var("v" + tag + ts, 0, 1, 0.0, true);
      vu_[g][t] = model_.add_var("vu" + tag + ts, 0, 1, u.startup_cost);
      vd_[g][t] = model_.add_var("vd" + tag + ts, 0, 1, u.shutdown_cost);
    }
    // State transition vu - vd = v_t - v_{t-1}; linking keeps vu/vd integral
    // whenever v is, so only v needs the integer marker.
    for (int t = 0; t < T_; ++t) {
      int r = model_.add_row("trans" + tag + std::to_string(t), lp::Sense::eq,
                             t == 0 ? -(u.initial_state.on ? 1.0 : 0.0) : 0.0);
      model_.add_term(r, vu_[g][t], 1.0);
      model_.add_term(r, vd_[g][t], -1.0);
      model_.add_term(r, v_[g][t], -1.0);
      if (t > 0) model_.add_term(r, v_[g][t - 1], 1.0);

      int ru = model_.add_row("uplink" + tag + std::to_string(t), lp::Sense::le, 0.0);
      model_.add_term(ru, vu_[g][t], 1.0);
      model_.add_term(ru, v_[g][t], -1.0);
      int rd = model_.add_row("dnlink" + tag + std::to_string(t), lp::Sense::le, 1.0);
      model_.add_term(rd, vd_[g][t], 1.0);
      model_.add_term(rd, v_[g][t], 1.0);
    }
    // Minimum up/down windows.
    for (int t = 0; t < T_; ++t) {
      if (u.t_on > 1) {
        int r = model_.add_row("minup" + tag + std::to_string(t), lp::Sense::le, 0.0);
        for (int tau = std::max(0, t - u.t_on + 1); tau <= t; ++tau)
          model_.add_term(r, vu_[g][tau], 1.0);
        model_.add_term(r, v_[g][t], -1.0);
      }
      if (u.t_off > 1) {
        int r = model_.add_row("mindn" + tag + std::to_string(t), lp::Sense::le, 1.0);
        for (int tau = std::max(0, t - u.t_off + 1); tau <= t; ++tau)
          model_.add_term(r, vd_[g][tau], 1.0);
        model_.add_term(r, v_[g][t], 1.0);
      }
    }
    // Initial-state dwell: finish the started up/down window.
    if (u.initial_state.on) {
      for (int t = 0; t < std::min(T_, u.t_on - u.initial_state.hours); ++t)
        model_.vars[v_[g][t]].lb = 1.0;
    } else {
      for (int t = 0; t < std::min(T_, u.t_off - u.initial_state.hours); ++t)
        model_.vars[v_[g][t]].ub = 0.0;
    }
  }
}

inline void MasterProblem::build_block(int b) {
  const double rho = block_weight(b);
  const double mean_mu = sys_.mean_supplier_cost();
  const std::string bs = b == 0 ? "da" : "s" + std::to_string(b - 1);

  for (size_t g = 0; g < sys_.units.size(); ++g) {
    const Unit& u = sys_.units[g];
    const std::string tag = "_" + bs + "_" + u.id + "_";
    const bool gas_aware = coordinated() && u.is_gfu;
    for (int t = 0; t < T_; ++t) {
      const std::string ts = std::to_string(t);
      p_[b][g][t] = model_.add_var("p" + tag + ts, 0, u.p_max, 0.0);
      if (gas_aware) {
        burn_[b][g][t] =
            model_.add_var("burn" + tag + ts, 0, u.heat_curve.value(u.p_max), 0.0);
      } else {
        // Fuel cost epigraph: GFUs in the baseline price gas at the mean
        // supplier cost, everything else uses its own money curve.
        const PiecewiseCurve& curve = u.fuel_curve();
        const double scale = u.is_gfu ? mean_mu : 1.0;
        c_[b][g][t] = model_.add_var("c" + tag + ts, 0, lp::kInf, rho);
        for (int seg = 0; seg < curve.segments(); ++seg) {
          int r = model_.add_row("epi" + tag + ts + "_" + std::to_string(seg),
                                 lp::Sense::ge, 0.0);
          model_.add_term(r, c_[b][g][t], 1.0);
          model_.add_term(r, p_[b][g][t], -scale * curve.slope(seg));
          model_.add_term(r, v_[g][t], -scale * curve.intercept(seg));
        }
      }
      // Dispatch window tied to commitment.
      int rlo = model_.add_row("pmin" + tag + ts, lp::Sense::le, 0.0);
      model_.add_term(rlo, v_[g][t], u.p_min);
      model_.add_term(rlo, p_[b][g][t], -1.0);
      int rhi = model_.add_row("pmax" + tag + ts, lp::Sense::le, 0.0);
      model_.add_term(rhi, p_[b][g][t], 1.0);
      model_.add_term(rhi, v_[g][t], -u.p_max);
    }
    // Burn epigraph rows for gas-aware GFUs (the heat curve's lower envelope).
    if (gas_aware) {
      for (int t = 0; t < T_; ++t) {
        for (int seg = 0; seg < u.heat_curve.segments(); ++seg) {
          int r = model_.add_row("heat" + tag + std::to_string(t) + "_" +
                                     std::to_string(seg),
                                 lp::Sense::ge, 0.0);
          model_.add_term(r, burn_[b][g][t], 1.0);
          model_.add_term(r, p_[b][g][t], -u.heat_curve.slope(seg));
          model_.add_term(r, v_[g][t], -u.heat_curve.intercept(seg));
        }
      }
    }
    // Ramping between consecutive hours, with start/stop allowances.  The
    // pre-horizon output is not constrained.
    for (int t = 0; t + 1 < T_; ++t) {
      int rup = model_.add_row("rampup" + tag + std::to_string(t), lp::Sense::le, 0.0);
      model_.add_term(rup, p_[b][g][t + 1], 1.0);
      model_.add_term(rup, p_[b][g][t], -1.0);
      model_.add_term(rup, v_[g][t], -u.ramp);
      model_.add_term(rup, vu_[g][t + 1], -std::max(u.p_min, u.ramp));
      int rdn = model_.add_row("rampdn" + tag + std::to_string(t), lp::Sense::le, 0.0);
      model_.add_term(rdn, p_[b][g][t], 1.0);
      model_.add_term(rdn, p_[b][g][t + 1], -1.0);
      model_.add_term(rdn, v_[g][t + 1], -u.ramp);
      model_.add_term(rdn, vd_[g][t + 1], -std::max(u.p_min, u.ramp));
    }
  }

  for (size_t f = 0; f < sys_.windfarms.size(); ++f) {
    const auto& profile = wind_profile(b, sys_.windfarms[f].id);
    for (int t = 0; t < T_; ++t)
      w_[b][f][t] = model_.add_var("w_" + bs + "_" + sys_.windfarms[f].id + "_" +
                                       std::to_string(t),
                                   0, profile[t], 0.0);
  }
  for (int m = 0; m < sys_.n_buses(); ++m) {
    const Bus& bus = sys_.buses[m];
    for (int t = 0; t < T_; ++t)
      shede_[b][m][t] = model_.add_var("she_" + bs + "_" + bus.id + "_" +
                                           std::to_string(t),
                                       0, bus.load_profile[t], rho * bus.voll);
  }

  // System balance and PTDF line limits.
  for (int t = 0; t < T_; ++t) {
    double total_load = 0.0;
    for (const auto& bus : sys_.buses) total_load += bus.load_profile[t];
    int r = model_.add_row("bal_" + bs + "_" + std::to_string(t), lp::Sense::eq,
                           total_load);
    for (size_t g = 0; g < sys_.units.size(); ++g) model_.add_term(r, p_[b][g][t], 1.0);
    for (size_t f = 0; f < sys_.windfarms.size(); ++f) model_.add_term(r, w_[b][f][t], 1.0);
    for (int m = 0; m < sys_.n_buses(); ++m) model_.add_term(r, shede_[b][m][t], 1.0);
    bal_[b][t] = r;
  }
  for (size_t q = 0; q < sys_.lines.size(); ++q) {
    for (int t = 0; t < T_; ++t) {
      double load_part = 0.0;  // sum_m ptdf(q, m) * L_mt moves to the rhs
      for (int m = 0; m < sys_.n_buses(); ++m)
        load_part += ptdf_(static_cast<int>(q), m) * sys_.buses[m].load_profile[t];
      const std::string rn = "_" + bs + "_" + sys_.lines[q].id + "_" + std::to_string(t);
      int rhi = model_.add_row("flowhi" + rn, lp::Sense::le,
                               sys_.lines[q].capacity + load_part);
      int rlo = model_.add_row("flowlo" + rn, lp::Sense::ge,
                               -sys_.lines[q].capacity + load_part);
      for (int m = 0; m < sys_.n_buses(); ++m) {
        const double gamma = ptdf_(static_cast<int>(q), m);
        if (gamma == 0.0) continue;
        for (size_t g = 0; g < sys_.units.size(); ++g)
          if (sys_.bus_index.at(sys_.units[g].bus) == m) {
            model_.add_term(rhi, p_[b][g][t], gamma);
            model_.add_term(rlo, p_[b][g][t], gamma);
          }
        for (size_t f = 0; f < sys_.windfarms.size(); ++f)
          if (sys_.bus_index.at(sys_.windfarms[f].bus) == m) {
            model_.add_term(rhi, w_[b][f][t], gamma);
            model_.add_term(rlo, w_[b][f][t], gamma);
          }
        model_.add_term(rhi, shede_[b][m][t], gamma);
        model_.add_term(rlo, shede_[b][m][t], gamma);
      }
      line_hi_[b][q][t] = rhi;
      line_lo_[b][q][t] = rlo;
    }
  }
}

inline void MasterProblem::build_gas() {
  const int nj = static_cast<int>(sys_.suppliers.size());
  const int nd = static_cast<int>(sys_.gas_loads.size());

  for (int j = 0; j < nj; ++j) {
    const GasSupplier& sup = sys_.suppliers[j];
    for (int t = 0; t < T_; ++t)
      s0_[j][t] = model_.add_var("s0_" + sup.id + "_" + std::to_string(t), 0,
                                 sup.capacity, sup.unit_cost);
  }
  for (int d = 0; d < nd; ++d) {
    const GasLoad& load = sys_.gas_loads[d];
    // Only low-priority gas load may be scheduled for curtailment day-ahead;
    // high-priority load is curtailable solely as a feasibility last resort
    // inside the gas sub-problems.
    const bool low = load.priority == GasPriority::low;
    for (int t = 0; t < T_; ++t)
      shedg_[d][t] = model_.add_var("shg_" + load.id + "_" + std::to_string(t), 0,
                                    low ? load.profile[t] : 0.0, load.curtail_cost);
  }
  for (size_t g = 0; g < sys_.units.size(); ++g) {
    if (!sys_.units[g].is_gfu) continue;
    const Unit& u = sys_.units[g];
    for (int t = 0; t < T_; ++t) {
      x_[g][t] = model_.add_var("x_" + u.id + "_" + std::to_string(t), 0,
                                u.heat_curve.value(u.p_max), opt_.booking_epsilon);
      // Booking covers the burn of every block.
      for (int b = 0; b < n_blocks(); ++b) {
        int r = model_.add_row("book_" + u.id + "_b" + std::to_string(b) + "_" +
                                   std::to_string(t),
                               lp::Sense::le, 0.0);
        model_.add_term(r, burn_[b][g][t], 1.0);
        model_.add_term(r, x_[g][t], -1.0);
      }
    }
  }
  for (int w = 0; w < W_; ++w) {
    const double rho = scen_.rt_scenarios[w].weight;
    for (int j = 0; j < nj; ++j) {
      const GasSupplier& sup = sys_.suppliers[j];
      const std::string tag = "_s" + std::to_string(w) + "_" + sup.id + "_";
      for (int t = 0; t < T_; ++t) {
        const std::string ts = std::to_string(t);
        dsp_[w][j][t] = model_.add_var(
            "dsp" + tag + ts, 0, lp::kInf,
            rho * (sys_.economics.dev_penalty_pos + sup.unit_cost));
        dsm_[w][j][t] = model_.add_var(
            "dsm" + tag + ts, 0, lp::kInf,
            rho * (sys_.economics.dev_penalty_neg - sup.unit_cost));
        // Realized supply s0 + ds+ - ds- stays within the field limits.
        int rhi = model_.add_row("suphi" + tag + ts, lp::Sense::le, sup.capacity);
        model_.add_term(rhi, s0_[j][t], 1.0);
        model_.add_term(rhi, dsp_[w][j][t], 1.0);
        model_.add_term(rhi, dsm_[w][j][t], -1.0);
        int rlo = model_.add_row("suplo" + tag + ts, lp::Sense::ge, 0.0);
        model_.add_term(rlo, s0_[j][t], 1.0);
        model_.add_term(rlo, dsp_[w][j][t], 1.0);
        model_.add_term(rlo, dsm_[w][j][t], -1.0);
      }
    }
  }

  // System-wide gas balance per block and hour: supply and curtailment cover
  // firm gas loads, GFU burn, and the (fixed) compressor draw.
  gas_demand_.assign(T_, 0.0);
  for (int t = 0; t < T_; ++t)
    for (const auto& load : sys_.gas_loads) gas_demand_[t] += load.profile[t];
  for (int b = 0; b < n_blocks(); ++b) {
    const std::string bs = b == 0 ? "da" : "s" + std::to_string(b - 1);
    for (int t = 0; t < T_; ++t) {
      int r = model_.add_row("gasbal_" + bs + "_" + std::to_string(t), lp::Sense::eq,
                             gas_demand_[t]);
      for (int j = 0; j < nj; ++j) {
        model_.add_term(r, s0_[j][t], 1.0);
        if (b > 0) {
          model_.add_term(r, dsp_[b - 1][j][t], 1.0);
          model_.add_term(r, dsm_[b - 1][j][t], -1.0);
        }
      }
      for (int d = 0; d < nd; ++d) model_.add_term(r, shedg_[d][t], 1.0);
      for (size_t g = 0; g < sys_.units.size(); ++g)
        if (sys_.units[g].is_gfu) model_.add_term(r, burn_[b][g][t], -1.0);
      gasbal_[b][t] = r;
    }
  }
}

inline MasterSolution MasterProblem::decode(const std::vector<double>& sol) const {
  const int nu = static_cast<int>(sys_.units.size());
  const int nf = static_cast<int>(sys_.windfarms.size());
  const int nm = sys_.n_buses();
  const int nj = static_cast<int>(sys_.suppliers.size());
  const int nd = static_cast<int>(sys_.gas_loads.size());
  const double mean_mu = sys_.mean_supplier_cost();

  MasterSolution out;
  auto igrid = [&](int a) { return std::vector<std::vector<int>>(a, std::vector<int>(T_, 0)); };
  auto dgrid = [&](int a) { return std::vector<std::vector<double>>(a, std::vector<double>(T_, 0.0)); };
  out.on = igrid(nu);
  out.startup = igrid(nu);
  out.shutdown = igrid(nu);
  for (int g = 0; g < nu; ++g)
    for (int t = 0; t < T_; ++t) {
      out.on[g][t] = sol[v_[g][t]] > 0.5;
      out.startup[g][t] = sol[vu_[g][t]] > 0.5;
      out.shutdown[g][t] = sol[vd_[g][t]] > 0.5;
    }

  auto decode_block = [&](int b) {
    BlockDispatch blk;
    blk.p = dgrid(nu);
    blk.wind = dgrid(nf);
    blk.shed_e = dgrid(nm);
    blk.burn = dgrid(nu);
    blk.fuel_cost = dgrid(nu);
    for (int g = 0; g < nu; ++g)
      for (int t = 0; t < T_; ++t) {
        blk.p[g][t] = sol[p_[b][g][t]];
        if (burn_[b][g][t] >= 0) blk.burn[g][t] = sol[burn_[b][g][t]];
        if (c_[b][g][t] >= 0) blk.fuel_cost[g][t] = sol[c_[b][g][t]];
      }
    for (int f = 0; f < nf; ++f)
      for (int t = 0; t < T_; ++t) blk.wind[f][t] = sol[w_[b][f][t]];
    for (int m = 0; m < nm; ++m)
      for (int t = 0; t < T_; ++t) blk.shed_e[m][t] = sol[shede_[b][m][t]];
    return blk;
  };
  out.da = decode_block(0);
  for (int w = 0; w < W_; ++w) out.rt.push_back(decode_block(1 + w));

  out.booking = dgrid(nu);
  out.supply0 = dgrid(nj);
  out.shed_gas = dgrid(nd);
  if (coordinated()) {
    for (int g = 0; g < nu; ++g)
      if (x_[g][0] >= 0)
        for (int t = 0; t < T_; ++t) out.booking[g][t] = sol[x_[g][t]];
    for (int j = 0; j < nj; ++j)
      for (int t = 0; t < T_; ++t) out.supply0[j][t] = sol[s0_[j][t]];
    for (int d = 0; d < nd; ++d)
      for (int t = 0; t < T_; ++t) out.shed_gas[d][t] = sol[shedg_[d][t]];
    for (int w = 0; w < W_; ++w) {
      out.dev_pos.push_back(dgrid(nj));
      out.dev_neg.push_back(dgrid(nj));
      for (int j = 0; j < nj; ++j)
        for (int t = 0; t < T_; ++t) {
          out.dev_pos[w][j][t] = sol[dsp_[w][j][t]];
          out.dev_neg[w][j][t] = sol[dsm_[w][j][t]];
        }
    }
  }

  // Independent cost recomputation (not read off the LP objective).
  CostBreakdown& cb = out.costs;
  for (int g = 0; g < nu; ++g)
    for (int t = 0; t < T_; ++t)
      cb.commitment += out.startup[g][t] * sys_.units[g].startup_cost +
                       out.shutdown[g][t] * sys_.units[g].shutdown_cost;
  auto block_power_cost = [&](const BlockDispatch& blk) {
    double cost = 0.0;
    for (int g = 0; g < nu; ++g) {
      const Unit& u = sys_.units[g];
      const bool priced = !u.is_gfu || !coordinated();
      if (!priced) continue;
      const double scale = u.is_gfu ? mean_mu : 1.0;
      for (int t = 0; t < T_; ++t)
        if (out.on[g][t]) cost += scale * u.fuel_curve().value(blk.p[g][t]);
    }
    for (int m = 0; m < nm; ++m)
      for (int t = 0; t < T_; ++t) cost += sys_.buses[m].voll * blk.shed_e[m][t];
    return cost;
  };
  cb.da_power = sys_.economics.da_weight * block_power_cost(out.da);
  for (int w = 0; w < W_; ++w)
    cb.rt_expected += scen_.rt_scenarios[w].weight * block_power_cost(out.rt[w]);
  if (coordinated()) {
    for (int j = 0; j < nj; ++j)
      for (int t = 0; t < T_; ++t)
        cb.gas_purchase += sys_.suppliers[j].unit_cost * out.supply0[j][t];
    for (int d = 0; d < nd; ++d)
      for (int t = 0; t < T_; ++t)
        cb.gas_shed += sys_.gas_loads[d].curtail_cost * out.shed_gas[d][t];
    for (int g = 0; g < nu; ++g)
      for (int t = 0; t < T_; ++t)
        cb.booking_tiebreak += opt_.booking_epsilon * out.booking[g][t];
    for (int w = 0; w < W_; ++w) {
      double dev = 0.0;
      for (int j = 0; j < nj; ++j)
        for (int t = 0; t < T_; ++t) {
          dev += (sys_.economics.dev_penalty_pos + sys_.suppliers[j].unit_cost) *
                 out.dev_pos[w][j][t];
          dev += (sys_.economics.dev_penalty_neg - sys_.suppliers[j].unit_cost) *
                 out.dev_neg[w][j][t];
        }
      cb.rt_expected += scen_.rt_scenarios[w].weight * dev;
    }
  }
  cb.total = cb.commitment + cb.gas_purchase + cb.gas_shed + cb.booking_tiebreak +
             cb.da_power + cb.rt_expected;
  return out;
}

}  // namespace ndcgem
