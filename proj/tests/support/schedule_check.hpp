#pragma once

// Independent feasibility audit of a decoded master solution.  Everything is
// recomputed from the raw system data; nothing is shared with the model
// builder so a bug there cannot hide here.

#include <cmath>
#include <string>
#include <vector>

#include "ndcgem/master.hpp"
#include "ndcgem/model.hpp"
#include "ndcgem/network.hpp"
#include "ndcgem/scenario.hpp"

namespace oracle {

inline void note(std::vector<std::string>* out, const std::string& what) {
  out->push_back(what);
}

// Returns human-readable violations; empty means the schedule is feasible.
inline std::vector<std::string> check_master(
    const ndcgem::JointSystem& sys, const ndcgem::ScenarioSet& scen,
    const ndcgem::PtdfMatrix& ptdf, const ndcgem::MasterSolution& ms,
    bool coordinated, const std::vector<double>& compressor_draw = {},
    double tol = 1e-6) {
  std::vector<std::string> bad;
  const int T = sys.horizon;
  const int W = static_cast<int>(scen.rt_scenarios.size());

  // Commitment logic.
  for (size_t g = 0; g < sys.units.size(); ++g) {
    const ndcgem::Unit& u = sys.units[g];
    int prev = u.initial_state.on ? 1 : 0;
    for (int t = 0; t < T; ++t) {
      const int on = ms.on[g][t], up = ms.startup[g][t], dn = ms.shutdown[g][t];
      if (up - dn != on - prev)
        note(&bad, u.id + " t" + std::to_string(t) + ": transition mismatch");
      if (up && dn) note(&bad, u.id + " t" + std::to_string(t) + ": up and down");
      prev = on;
    }
    // Initial dwell.
    if (u.initial_state.on) {
      for (int t = 0; t < std::min(T, u.t_on - u.initial_state.hours); ++t)
        if (!ms.on[g][t]) note(&bad, u.id + ": initial on-dwell broken at t" + std::to_string(t));
    } else {
      for (int t = 0; t < std::min(T, u.t_off - u.initial_state.hours); ++t)
        if (ms.on[g][t]) note(&bad, u.id + ": initial off-dwell broken at t" + std::to_string(t));
    }
    // Dwell after each transition inside the horizon.
    for (int t = 0; t < T; ++t) {
      if (ms.startup[g][t])
        for (int tau = t; tau < std::min(T, t + u.t_on); ++tau)
          if (!ms.on[g][tau])
            note(&bad, u.id + ": min-up broken, start t" + std::to_string(t));
      if (ms.shutdown[g][t])
        for (int tau = t; tau < std::min(T, t + u.t_off); ++tau)
          if (ms.on[g][tau])
            note(&bad, u.id + ": min-down broken, stop t" + std::to_string(t));
    }
  }

  auto check_block = [&](const ndcgem::BlockDispatch& blk, const ndcgem::WindProfile& wind,
                         const std::string& label) {
    for (size_t g = 0; g < sys.units.size(); ++g) {
      const ndcgem::Unit& u = sys.units[g];
      const double su = std::max(u.p_min, u.ramp);
      for (int t = 0; t < T; ++t) {
        const double lo = ms.on[g][t] ? u.p_min : 0.0;
        const double hi = ms.on[g][t] ? u.p_max : 0.0;
        if (blk.p[g][t] < lo - tol || blk.p[g][t] > hi + tol)
          note(&bad, label + " " + u.id + " t" + std::to_string(t) + ": p out of window");
        if (t + 1 < T) {
          const double dup = blk.p[g][t + 1] - blk.p[g][t];
          const double allow_up = u.ramp * ms.on[g][t] + su * ms.startup[g][t + 1];
          const double allow_dn = u.ramp * ms.on[g][t + 1] + su * ms.shutdown[g][t + 1];
          if (dup > allow_up + tol)
            note(&bad, label + " " + u.id + " t" + std::to_string(t) + ": ramp up");
          if (-dup > allow_dn + tol)
            note(&bad, label + " " + u.id + " t" + std::to_string(t) + ": ramp down");
        }
      }
    }
    for (size_t f = 0; f < sys.windfarms.size(); ++f) {
      const auto& avail = wind.farms.at(sys.windfarms[f].id);
      for (int t = 0; t < T; ++t)
        if (blk.wind[f][t] < -tol || blk.wind[f][t] > avail[t] + tol)
          note(&bad, label + " " + sys.windfarms[f].id + " t" + std::to_string(t) + ": wind out of range");
    }
    for (int t = 0; t < T; ++t) {
      double gen = 0.0, load = 0.0;
      for (size_t g = 0; g < sys.units.size(); ++g) gen += blk.p[g][t];
      for (size_t f = 0; f < sys.windfarms.size(); ++f) gen += blk.wind[f][t];
      for (int m = 0; m < sys.n_buses(); ++m) {
        if (blk.shed_e[m][t] < -tol || blk.shed_e[m][t] > sys.buses[m].load_profile[t] + tol)
          note(&bad, label + " bus " + sys.buses[m].id + " t" + std::to_string(t) + ": shed out of range");
        gen += blk.shed_e[m][t];
        load += sys.buses[m].load_profile[t];
      }
      if (std::abs(gen - load) > tol * (1.0 + std::abs(load)))
        note(&bad, label + " t" + std::to_string(t) + ": balance off by " + std::to_string(gen - load));
      for (size_t q = 0; q < sys.lines.size(); ++q) {
        double flow = 0.0;
        for (int m = 0; m < sys.n_buses(); ++m) {
          double inj = blk.shed_e[m][t] - sys.buses[m].load_profile[t];
          for (size_t g = 0; g < sys.units.size(); ++g)
            if (sys.bus_index.at(sys.units[g].bus) == m) inj += blk.p[g][t];
          for (size_t f = 0; f < sys.windfarms.size(); ++f)
            if (sys.bus_index.at(sys.windfarms[f].bus) == m) inj += blk.wind[f][t];
          flow += ptdf(static_cast<int>(q), m) * inj;
        }
        if (std::abs(flow) > sys.lines[q].capacity + tol)
          note(&bad, label + " line " + sys.lines[q].id + " t" + std::to_string(t) + ": overload " + std::to_string(flow));
      }
    }
    // GFU burn covers the heat curve when the unit is on.
    if (coordinated) {
      for (size_t g = 0; g < sys.units.size(); ++g) {
        if (!sys.units[g].is_gfu) continue;
        for (int t = 0; t < T; ++t) {
          const double need = ms.on[g][t] ? sys.units[g].heat_curve.value(blk.p[g][t]) : 0.0;
          if (blk.burn[g][t] < need - tol)
            note(&bad, label + " " + sys.units[g].id + " t" + std::to_string(t) + ": burn below heat curve");
        }
      }
    }
  };
  check_block(ms.da, scen.da_forecast, "da");
  for (int w = 0; w < W; ++w)
    check_block(ms.rt[w], scen.rt_scenarios[w].profile, "s" + std::to_string(w));

  if (coordinated) {
    for (size_t g = 0; g < sys.units.size(); ++g) {
      if (!sys.units[g].is_gfu) continue;
      for (int t = 0; t < T; ++t) {
        double peak = ms.da.burn[g][t];
        for (int w = 0; w < W; ++w) peak = std::max(peak, ms.rt[w].burn[g][t]);
        if (ms.booking[g][t] < peak - tol)
          note(&bad, sys.units[g].id + " t" + std::to_string(t) + ": booking below burn");
      }
    }
    for (int t = 0; t < T; ++t) {
      double firm = 0.0;
      for (size_t d = 0; d < sys.gas_loads.size(); ++d) {
        firm += sys.gas_loads[d].profile[t];
        if (ms.shed_gas[d][t] < -tol || ms.shed_gas[d][t] > sys.gas_loads[d].profile[t] + tol)
          note(&bad, "gas load " + sys.gas_loads[d].id + " t" + std::to_string(t) + ": shed out of range");
      }
      const double draw = compressor_draw.empty() ? 0.0 : compressor_draw[t];
      for (int b = 0; b <= W; ++b) {
        double supply = 0.0, burn = 0.0;
        for (size_t j = 0; j < sys.suppliers.size(); ++j) {
          double s = ms.supply0[j][t];
          if (b > 0) s += ms.dev_pos[b - 1][j][t] - ms.dev_neg[b - 1][j][t];
          if (s < -tol || s > sys.suppliers[j].capacity + tol)
            note(&bad, "supplier " + sys.suppliers[j].id + " block " + std::to_string(b) + " t" + std::to_string(t) + ": out of field limits");
          supply += s;
        }
        const auto& blk = b == 0 ? ms.da : ms.rt[b - 1];
        for (size_t g = 0; g < sys.units.size(); ++g) burn += blk.burn[g][t];
        double shed = 0.0;
        for (size_t d = 0; d < sys.gas_loads.size(); ++d) shed += ms.shed_gas[d][t];
        const double gap = supply + shed - burn - firm - draw;
        if (std::abs(gap) > tol * (1.0 + firm))
          note(&bad, "gas balance block " + std::to_string(b) + " t" + std::to_string(t) + ": off by " + std::to_string(gap));
      }
    }
  }
  return bad;
}

}  // namespace oracle
