#pragma once

// Run orchestration and bit-stable tabular outputs: CSV builders return the
// exact file contents as strings (testable against golden bytes), writes go
// through a temp-then-rename so a failed run never leaves a partial file.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ndcgem/clearing.hpp"
#include "ndcgem/scenario.hpp"
#include "ndcgem/system_io.hpp"

namespace ndcgem {

namespace csv {

// 6 significant digits, '.' decimal regardless of the global locale.
inline std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6) << v;
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw ConfigError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError("cannot rename " + tmp + " to " + path);
}

}  // namespace csv

// --- CSV builders ---

inline std::string schedule_csv(const JointSystem& sys, const ClearingResult& res) {
  std::string out = "unit,hour,on,p_mw,x_kcf,w_kcf\n";
  for (size_t g = 0; g < sys.units.size(); ++g) {
    const Unit& u = sys.units[g];
    for (int t = 0; t < sys.horizon; ++t) {
      const int on = res.schedule.on[g][t];
      double burn = 0.0;
      if (u.is_gfu && on)
        burn = res.kind == MasterKind::coordinated
                   ? res.schedule.da.burn[g][t]
                   : u.heat_curve.value(res.schedule.da.p[g][t]);
      out += u.id + "," + std::to_string(t) + "," + std::to_string(on) + "," +
             csv::num(res.schedule.da.p[g][t]) + "," +
             csv::num(u.is_gfu ? res.schedule.booking[g][t] : 0.0) + "," +
             csv::num(burn) + "\n";
    }
  }
  return out;
}

// One row per (hour, bus).  The gas price is uniform over nodes and repeats;
// the capacity column aggregates the gas-fired units at that bus and is
// omitted entirely for the power-only baseline.
inline std::string prices_csv(const JointSystem& sys, const ClearingResult& res,
                              bool include_capacity) {
  std::string out = include_capacity
                        ? "hour,id,lmep,gas_price,gas_capacity_price\n"
                        : "hour,id,lmep,gas_price\n";
  for (int t = 0; t < sys.horizon; ++t)
    for (int m = 0; m < sys.n_buses(); ++m) {
      out += std::to_string(t) + "," + sys.buses[m].id + "," +
             csv::num(res.prices.lmep[m][t]) + "," +
             csv::num(res.prices.gas_price[t]);
      if (include_capacity) {
        double cap = 0.0;
        for (size_t g = 0; g < sys.units.size(); ++g)
          if (sys.units[g].is_gfu && sys.units[g].bus == sys.buses[m].id)
            cap += res.prices.capacity[g][t];
        out += "," + csv::num(cap);
      }
      out += "\n";
    }
  return out;
}

inline std::string cuts_csv(const JointSystem& sys, const ClearingResult& res) {
  std::string out = "cut,hour,rhs,term_kind,term_id,coef\n";
  for (size_t i = 0; i < res.cuts.size(); ++i) {
    const BendersCut& c = res.cuts[i];
    const std::string head =
        std::to_string(i) + "," + std::to_string(c.hour) + "," + csv::num(c.rhs);
    for (size_t g = 0; g < sys.units.size(); ++g)
      if (c.x_coef[g] != 0.0)
        out += head + ",booking," + sys.units[g].id + "," +
               csv::num(c.x_coef[g]) + "\n";
    for (size_t d = 0; d < sys.gas_loads.size(); ++d)
      if (c.shed_coef[d] != 0.0)
        out += head + ",shed," + sys.gas_loads[d].id + "," +
               csv::num(c.shed_coef[d]) + "\n";
  }
  return out;
}

inline std::string iterations_csv(const ClearingResult& res) {
  std::string out = "iteration,subproblem_iters,unsatisfied_kcf_per_h,cuts_added\n";
  for (const OuterIteration& it : res.log)
    out += std::to_string(it.iteration) + "," +
           std::to_string(it.subproblem_iterations) + "," +
           csv::num(it.unsatisfied) + "," + std::to_string(it.cuts_added) + "\n";
  return out;
}

// Total scheduled plus last-resort curtailment, nonzero rows only.
inline std::string curtailments_csv(const JointSystem& sys, const ClearingResult& res) {
  std::string out = "gas_node,load_id,priority,hour,kcf_per_h\n";
  for (size_t d = 0; d < sys.gas_loads.size(); ++d) {
    const GasLoad& load = sys.gas_loads[d];
    for (int t = 0; t < sys.horizon; ++t) {
      double cur = res.schedule.shed_gas.empty() ? 0.0 : res.schedule.shed_gas[d][t];
      if (!res.hourly_gas.empty()) cur += res.hourly_gas[t].state.curtail_pos[d];
      if (cur <= 1e-9) continue;
      out += load.node + "," + load.id + "," +
             (load.priority == GasPriority::low ? "low" : "high") + "," +
             std::to_string(t) + "," + csv::num(cur) + "\n";
    }
  }
  return out;
}

// Booked capacity against the most the unit could burn while committed, the
// demand it would pose if the pipes were ignored.
inline std::string bookings_csv(const JointSystem& sys, const ClearingResult& res) {
  std::string out = "unit,hour,booked_kcf,max_burn_kcf\n";
  for (size_t g = 0; g < sys.units.size(); ++g) {
    const Unit& u = sys.units[g];
    if (!u.is_gfu) continue;
    for (int t = 0; t < sys.horizon; ++t) {
      const double max_burn =
          res.schedule.on[g][t] ? u.heat_curve.value(u.p_max) : 0.0;
      out += u.id + "," + std::to_string(t) + "," +
             csv::num(res.schedule.booking[g][t]) + "," + csv::num(max_burn) + "\n";
    }
  }
  return out;
}

struct RtSummaryRow {
  std::string name;
  double expected = 0.0;
  std::optional<double> simulated;
  std::optional<double> reduction_pct;
};

inline std::string rt_summary_csv(const std::vector<RtSummaryRow>& rows) {
  std::string out = "case,expected_cost,simulated_mean_cost,reduction_pct\n";
  for (const RtSummaryRow& r : rows) {
    out += r.name + "," + csv::num(r.expected) + ",";
    if (r.simulated) out += csv::num(*r.simulated);
    out += ",";
    if (r.reduction_pct) out += csv::num(*r.reduction_pct);
    out += "\n";
  }
  return out;
}

inline std::string rt_lmep_csv(const RtReport& report) {
  std::string out = "hour,mean_lmep\n";
  for (size_t t = 0; t < report.mean_lmep.size(); ++t)
    out += std::to_string(t) + "," + csv::num(report.mean_lmep[t]) + "\n";
  return out;
}

inline std::string gas_debug_csv(const ClearingResult& res) {
  std::string out = "iteration,hour,slp_iterations,objective,unsatisfied_kcf_per_h\n";
  for (const HourDetail& h : res.hour_log)
    out += std::to_string(h.iteration) + "," + std::to_string(h.hour) + "," +
           std::to_string(h.slp_iterations) + "," + csv::num(h.objective) + "," +
           csv::num(h.unsatisfied) + "\n";
  return out;
}

// --- run orchestration ---

struct GenerateConfig {
  int n_samples = 0;
  int n_reduced = 0;
};

struct RtSimConfig {
  int count = 0;
  std::uint64_t seed = 1;
};

struct RunConfig {
  std::string system_path;
  std::string scenario_path;  // file source; empty means generate
  GenerateConfig generate;
  std::uint64_t seed = 1;
  enum class Mode { coordinated, baseline, both };
  Mode mode = Mode::coordinated;
  double mip_gap = 1e-4;
  RtSimConfig rt;  // count 0 disables simulation
  std::string out_dir = ".";
  bool debug_lp = false;
  bool debug_gas = false;
};

// Built-in wind shape for generated scenarios: a diurnal mean fraction of
// installed capacity (calmest mid-afternoon), variance an eighth of the
// Bernoulli bound so the beta fit always exists.  Hours index modulo 24.
inline std::map<std::string, BetaSpec> diurnal_beta_specs(const JointSystem& sys) {
  std::vector<double> mean(sys.horizon), var(sys.horizon);
  for (int t = 0; t < sys.horizon; ++t) {
    const double hod = static_cast<double>(t % 24);
    mean[t] = 0.30 + 0.15 * std::cos(2.0 * 3.14159265358979323846 * (hod - 2.0) / 24.0);
    var[t] = mean[t] * (1.0 - mean[t]) / 8.0;
  }
  const BetaSpec spec = make_beta_spec(mean, var);
  std::map<std::string, BetaSpec> out;
  for (const auto& farm : sys.windfarms) out[farm.id] = spec;
  return out;
}

namespace detail {

inline ScenarioSet make_scenarios(const JointSystem& sys, const RunConfig& cfg) {
  if (!cfg.scenario_path.empty()) return load_scenario_set(cfg.scenario_path);
  if (cfg.generate.n_samples < 1)
    throw ConfigError("scenario generation needs --gen-samples >= 1");
  if (cfg.generate.n_reduced < 1 || cfg.generate.n_reduced > cfg.generate.n_samples)
    throw ConfigError("--reduce-to must lie in [1, --gen-samples]");
  const auto specs = diurnal_beta_specs(sys);
  ScenarioSet set;
  set.da_forecast = forecast_from_spec(sys.windfarms, specs);
  const auto samples =
      sample_profiles(sys.windfarms, specs, cfg.generate.n_samples, cfg.seed);
  set.rt_scenarios = fast_forward_reduce(samples, cfg.generate.n_reduced);
  return set;
}

// Fresh draws from the generating distribution when we own it; a weighted
// bootstrap of the supplied scenarios when the set came from a file.
inline std::vector<WindProfile> make_rt_draws(const JointSystem& sys,
                                              const ScenarioSet& scen,
                                              const RunConfig& cfg) {
  if (cfg.scenario_path.empty())
    return sample_profiles(sys.windfarms, diurnal_beta_specs(sys), cfg.rt.count,
                           cfg.rt.seed);
  std::vector<double> cum;
  double total = 0.0;
  for (const auto& s : scen.rt_scenarios) cum.push_back(total += s.weight);
  std::mt19937_64 g(cfg.rt.seed);
  std::vector<WindProfile> draws;
  for (int i = 0; i < cfg.rt.count; ++i) {
    const double u = rng::uniform01(g) * total;
    size_t k = 0;
    while (k + 1 < cum.size() && cum[k] < u) ++k;
    draws.push_back(scen.rt_scenarios[k].profile);
  }
  return draws;
}

inline void write_case_files(const JointSystem& sys, const ClearingResult& res,
                             const RtReport* rt, const std::string& dir,
                             const std::string& prefix, const RunConfig& cfg) {
  const bool coordinated = res.kind == MasterKind::coordinated;
  auto path = [&](const char* name) { return dir + "/" + prefix + name; };
  csv::write_file(path("schedule.csv"), schedule_csv(sys, res));
  csv::write_file(path("prices.csv"), prices_csv(sys, res, coordinated));
  csv::write_file(path("iterations.csv"), iterations_csv(res));
  csv::write_file(path("curtailments.csv"), curtailments_csv(sys, res));
  csv::write_file(path("bookings.csv"), bookings_csv(sys, res));
  if (coordinated) csv::write_file(path("cuts.csv"), cuts_csv(sys, res));
  if (rt) csv::write_file(path("rt_lmep.csv"), rt_lmep_csv(*rt));
  if (cfg.debug_gas) csv::write_file(path("gas_debug.csv"), gas_debug_csv(res));
}

}  // namespace detail

// Executes one configured run end to end; returns the process exit status.
// Configuration faults throw ConfigError, solver/model faults propagate.
inline int run(const RunConfig& cfg, std::ostream& diag) {
  if (cfg.system_path.empty()) throw ConfigError("--system is required");
  if (!(cfg.mip_gap > 0.0)) throw ConfigError("--mip-gap must be > 0");
  if (cfg.rt.count < 0) throw ConfigError("--rt-sim must be >= 0");

  std::vector<std::string> warnings;
  const JointSystem sys = load_system(cfg.system_path, &warnings);
  for (const auto& w : warnings) diag << "warning: " << w << "\n";
  const ScenarioSet scen = detail::make_scenarios(sys, cfg);
  validate_scenarios(sys, scen);

  std::filesystem::create_directories(cfg.out_dir);
  ClearingOptions opt;
  opt.mip.gap = cfg.mip_gap;
  opt.trace = &diag;
  if (cfg.debug_lp) opt.lp_dump_dir = cfg.out_dir;
  if (cfg.debug_gas) opt.gas.trace = &diag;

  const bool want_coord = cfg.mode != RunConfig::Mode::baseline;
  const bool want_base = cfg.mode != RunConfig::Mode::coordinated;
  std::optional<ClearingResult> coord, base;
  if (want_coord) coord = clear(sys, scen, opt);
  if (want_base) base = clear_baseline(sys, scen, opt);

  std::optional<RtReport> rt_coord, rt_base;
  if (cfg.rt.count > 0) {
    const auto draws = detail::make_rt_draws(sys, scen, cfg);
    if (coord) rt_coord = simulate_rt(sys, *coord, draws, opt.mip.lp);
    if (base) rt_base = simulate_rt(sys, *base, draws, opt.mip.lp);
  }

  std::vector<RtSummaryRow> summary;
  if (coord) {
    RtSummaryRow row{"coordinated", coord->expected_cost, std::nullopt, std::nullopt};
    if (rt_coord) row.simulated = rt_coord->mean_cost;
    if (rt_coord && rt_base && rt_base->mean_cost != 0.0)
      row.reduction_pct =
          (rt_base->mean_cost - rt_coord->mean_cost) / rt_base->mean_cost * 100.0;
    summary.push_back(std::move(row));
  }
  if (base) {
    RtSummaryRow row{"baseline", base->expected_cost, std::nullopt, std::nullopt};
    if (rt_base) row.simulated = rt_base->mean_cost;
    summary.push_back(std::move(row));
  }
  csv::write_file(cfg.out_dir + "/rt_summary.csv", rt_summary_csv(summary));

  // In a paired run the baseline files take a prefix; alone, either case owns
  // the canonical names.
  const std::string base_prefix = want_coord && want_base ? "baseline_" : "";
  if (coord)
    detail::write_case_files(sys, *coord, rt_coord ? &*rt_coord : nullptr,
                             cfg.out_dir, "", cfg);
  if (base)
    detail::write_case_files(sys, *base, rt_base ? &*rt_base : nullptr,
                             cfg.out_dir, base_prefix, cfg);

  for (const RtSummaryRow& r : summary) {
    diag << r.name << ": expected=" << csv::num(r.expected);
    if (r.simulated) diag << " simulated=" << csv::num(*r.simulated);
    if (r.reduction_pct) diag << " reduction_pct=" << csv::num(*r.reduction_pct);
    diag << "\n";
  }
  return 0;
}

}  // namespace ndcgem
