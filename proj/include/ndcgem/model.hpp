#pragma once

// Joint power + gas system data model: entity types, indexing, validation.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ndcgem/common.hpp"

namespace ndcgem {

// Convex piecewise-linear curve given by breakpoints with strictly
// increasing x and non-decreasing segment slopes.
struct PiecewiseCurve {
  std::vector<std::pair<double, double>> breakpoints;

  int segments() const { return static_cast<int>(breakpoints.size()) - 1; }

  double slope(int seg) const {
    const auto& a = breakpoints[seg];
    const auto& b = breakpoints[seg + 1];
    return (b.second - a.second) / (b.first - a.first);
  }

  // Intercept of the extended segment line: y = slope*x + intercept.
  double intercept(int seg) const {
    const auto& a = breakpoints[seg];
    return a.second - slope(seg) * a.first;
  }

  double x_min() const { return breakpoints.front().first; }
  double x_max() const { return breakpoints.back().first; }

  // Value at x; clamps to the outer segments outside the breakpoint range.
  double value(double x) const {
    int n = segments();
    if (x <= breakpoints.front().first) return slope(0) * x + intercept(0);
    for (int s = 0; s < n; ++s)
      if (x <= breakpoints[s + 1].first) return slope(s) * x + intercept(s);
    return slope(n - 1) * x + intercept(n - 1);
  }

  // Right-hand slope at x (right derivative at breakpoints).
  double right_slope(double x) const {
    int n = segments();
    for (int s = 0; s < n; ++s)
      if (x < breakpoints[s + 1].first) return slope(s);
    return slope(n - 1);
  }

  void validate(const std::string& owner) const {
    if (breakpoints.size() < 2)
      throw ValidationError(owner + ": curve needs at least 2 breakpoints");
    for (size_t i = 1; i < breakpoints.size(); ++i)
      if (breakpoints[i].first <= breakpoints[i - 1].first)
        throw ValidationError(owner + ": curve breakpoints must have strictly increasing x");
    for (int s = 1; s < segments(); ++s)
      if (slope(s) + 1e-12 < slope(s - 1))
        throw ValidationError(owner + ": curve must be convex (non-decreasing slopes)");
  }
};

struct Bus {
  std::string id;
  std::vector<double> load_profile;  // MW per hour
  double voll = 0.0;                 // $/MWh shed penalty
};

struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double reactance = 0.0;  // p.u.
  double capacity = 0.0;   // MW
};

struct InitialState {
  bool on = false;
  int hours = 0;  // how long the unit has been in that state
};

struct Unit {
  std::string id;
  std::string bus;
  bool is_gfu = false;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp = 0.0;  // MW/h
  int t_on = 1;       // min up time, hours
  int t_off = 1;      // min down time, hours
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
  InitialState initial_state;
  PiecewiseCurve cost_curve;  // $/h vs MW, non-GFU
  PiecewiseCurve heat_curve;  // kcf/h vs MW, GFU
  std::string gas_node;       // GFU delivery node

  const PiecewiseCurve& fuel_curve() const { return is_gfu ? heat_curve : cost_curve; }
};

struct WindFarm {
  std::string id;
  std::string bus;
  double capacity = 0.0;  // MW
};

struct GasNode {
  std::string id;
};

struct Pipeline {
  std::string id;
  std::string from_node;
  std::string to_node;
  double weymouth_const = 0.0;  // kcf/h per sqrt(psia^2)
};

struct Compressor {
  std::string id;
  std::string from_node;
  std::string to_node;
  double h_min = 0.0;  // hp
  double h_max = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double alpha = 0.0;
  // Gas draw theta(h) = a2*h^2 + a1*h + a0, coefficients stored [a2, a1, a0].
  std::array<double, 3> gas_coeffs{0.0, 0.0, 0.0};
  std::string tap_node;  // node the draw is taken from; defaults to from_node
};

struct GasSupplier {
  std::string id;
  std::string node;
  double capacity = 0.0;   // kcf/h
  double unit_cost = 0.0;  // $/kcf
};

enum class GasPriority { low, high };

struct GasLoad {
  std::string id;
  std::string node;
  std::vector<double> profile;  // kcf/h per hour
  GasPriority priority = GasPriority::high;
  double curtail_cost = 0.0;  // $/kcf compensation
};

struct PressureBounds {
  double min = 0.0;  // psia
  double max = 0.0;
};

struct EconomicParams {
  double da_weight = 0.0;       // objective weight of the DA settlement block
  double dev_penalty_pos = 0.0; // $/kcf on upward supply deviations
  double dev_penalty_neg = 0.0; // $/kcf rebate cut on downward deviations
  std::map<std::string, PressureBounds> pressure_bounds;  // per gas node
};

struct JointSystem {
  int horizon = 0;
  std::string slack_bus;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Unit> units;
  std::vector<WindFarm> windfarms;
  std::vector<GasNode> gas_nodes;
  std::vector<Pipeline> pipelines;
  std::vector<Compressor> compressors;
  std::vector<GasSupplier> suppliers;
  std::vector<GasLoad> gas_loads;
  EconomicParams economics;

  // Built by finalize().
  std::unordered_map<std::string, int> bus_index;
  std::unordered_map<std::string, int> gas_node_index;
  std::unordered_map<std::string, int> unit_index;

  int n_buses() const { return static_cast<int>(buses.size()); }
  int n_gas_nodes() const { return static_cast<int>(gas_nodes.size()); }

  std::vector<int> gfu_units() const {
    std::vector<int> out;
    for (size_t g = 0; g < units.size(); ++g)
      if (units[g].is_gfu) out.push_back(static_cast<int>(g));
    return out;
  }

  double mean_supplier_cost() const {
    double s = 0.0;
    for (const auto& j : suppliers) s += j.unit_cost;
    return suppliers.empty() ? 0.0 : s / static_cast<double>(suppliers.size());
  }

  const PressureBounds& pressure(const std::string& node) const {
    return economics.pressure_bounds.at(node);
  }

  // Builds index maps and checks every model invariant.  Returns warnings for
  // suspicious-but-legal data.  Throws ValidationError on hard violations.
  std::vector<std::string> finalize();
};

namespace detail {

template <typename T>
void index_ids(const std::vector<T>& items, const char* kind,
               std::unordered_map<std::string, int>* out) {
  out->clear();
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].id.empty())
      throw ValidationError(std::string(kind) + " with empty id");
    if (!out->emplace(items[i].id, static_cast<int>(i)).second)
      throw ValidationError(std::string(kind) + " id duplicated: " + items[i].id);
  }
}

inline void check_profile(const std::vector<double>& p, int horizon,
                          const std::string& owner) {
  if (static_cast<int>(p.size()) != horizon)
    throw ValidationError(owner + ": profile length " + std::to_string(p.size()) +
                          " does not match horizon " + std::to_string(horizon));
  for (double v : p)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError(owner + ": profile values must be finite and >= 0");
}

}  // namespace detail

inline std::vector<std::string> JointSystem::finalize() {
  std::vector<std::string> warnings;
  if (horizon < 1) throw ValidationError("horizon must be >= 1");

  detail::index_ids(buses, "bus", &bus_index);
  detail::index_ids(gas_nodes, "gas node", &gas_node_index);
  detail::index_ids(units, "unit", &unit_index);
  std::unordered_map<std::string, int> scratch;
  detail::index_ids(lines, "line", &scratch);
  detail::index_ids(windfarms, "wind farm", &scratch);
  detail::index_ids(pipelines, "pipeline", &scratch);
  detail::index_ids(compressors, "compressor", &scratch);
  detail::index_ids(suppliers, "supplier", &scratch);
  detail::index_ids(gas_loads, "gas load", &scratch);

  if (buses.empty()) throw ValidationError("system has no buses");
  if (!bus_index.count(slack_bus))
    throw ValidationError("slack_bus references unknown bus: " + slack_bus);

  for (const auto& b : buses) {
    detail::check_profile(b.load_profile, horizon, "bus " + b.id);
    if (b.voll <= 0.0) throw ValidationError("bus " + b.id + ": voll must be > 0");
  }
  for (const auto& l : lines) {
    if (!bus_index.count(l.from_bus))
      throw ValidationError("line " + l.id + ": unknown from_bus " + l.from_bus);
    if (!bus_index.count(l.to_bus))
      throw ValidationError("line " + l.id + ": unknown to_bus " + l.to_bus);
    if (l.from_bus == l.to_bus)
      throw ValidationError("line " + l.id + ": self-loop on bus " + l.from_bus);
    if (l.reactance <= 0.0)
      throw ValidationError("line " + l.id + ": reactance must be > 0");
    if (l.capacity <= 0.0)
      throw ValidationError("line " + l.id + ": capacity must be > 0");
  }
  for (const auto& u : units) {
    const std::string owner = "unit " + u.id;
    if (!bus_index.count(u.bus))
      throw ValidationError(owner + ": unknown bus " + u.bus);
    if (u.p_min < 0.0 || u.p_max < u.p_min)
      throw ValidationError(owner + ": need 0 <= p_min <= p_max");
    if (u.ramp <= 0.0) throw ValidationError(owner + ": ramp must be > 0");
    if (u.t_on < 1 || u.t_off < 1)
      throw ValidationError(owner + ": min up/down times must be >= 1");
    if (u.startup_cost < 0.0 || u.shutdown_cost < 0.0)
      throw ValidationError(owner + ": start/stop costs must be >= 0");
    if (u.initial_state.hours < 0)
      throw ValidationError(owner + ": initial_state.hours must be >= 0");
    if (u.is_gfu) {
      u.heat_curve.validate(owner + " heat_curve");
      if (!gas_node_index.count(u.gas_node))
        throw ValidationError(owner + ": unknown gas_node '" + u.gas_node + "'");
      if (u.heat_curve.x_max() + 1e-9 < u.p_max)
        throw ValidationError(owner + ": heat_curve must cover p_max");
    } else {
      u.cost_curve.validate(owner + " cost_curve");
      if (u.cost_curve.x_max() + 1e-9 < u.p_max)
        throw ValidationError(owner + ": cost_curve must cover p_max");
    }
  }
  for (const auto& w : windfarms) {
    if (!bus_index.count(w.bus))
      throw ValidationError("wind farm " + w.id + ": unknown bus " + w.bus);
    if (w.capacity <= 0.0)
      throw ValidationError("wind farm " + w.id + ": capacity must be > 0");
  }
  for (const auto& p : pipelines) {
    if (!gas_node_index.count(p.from_node))
      throw ValidationError("pipeline " + p.id + ": unknown from_node " + p.from_node);
    if (!gas_node_index.count(p.to_node))
      throw ValidationError("pipeline " + p.id + ": unknown to_node " + p.to_node);
    if (p.from_node == p.to_node)
      throw ValidationError("pipeline " + p.id + ": self-loop on node " + p.from_node);
    if (p.weymouth_const <= 0.0)
      throw ValidationError("pipeline " + p.id + ": weymouth_const must be > 0");
  }
  for (auto& c : compressors) {
    if (c.tap_node.empty()) c.tap_node = c.from_node;
    for (const std::string* n : {&c.from_node, &c.to_node, &c.tap_node})
      if (!gas_node_index.count(*n))
        throw ValidationError("compressor " + c.id + ": unknown node " + *n);
    if (c.from_node == c.to_node)
      throw ValidationError("compressor " + c.id + ": self-loop on node " + c.from_node);
    if (c.h_min < 0.0 || c.h_max < c.h_min)
      throw ValidationError("compressor " + c.id + ": need 0 <= h_min <= h_max");
    if (c.k2 <= 0.0 || c.k1 < 0.0 || c.alpha < 0.0)
      throw ValidationError("compressor " + c.id + ": need k2 > 0, k1 >= 0, alpha >= 0");
    if (c.gas_coeffs[0] < 0.0 || c.gas_coeffs[1] < 0.0 || c.gas_coeffs[2] < 0.0)
      throw ValidationError("compressor " + c.id + ": gas_coeffs must be >= 0");
  }
  for (const auto& s : suppliers) {
    if (!gas_node_index.count(s.node))
      throw ValidationError("supplier " + s.id + ": unknown node " + s.node);
    if (s.capacity <= 0.0)
      throw ValidationError("supplier " + s.id + ": capacity must be > 0");
    if (s.unit_cost < 0.0)
      throw ValidationError("supplier " + s.id + ": unit_cost must be >= 0");
  }
  for (const auto& d : gas_loads) {
    if (!gas_node_index.count(d.node))
      throw ValidationError("gas load " + d.id + ": unknown node " + d.node);
    detail::check_profile(d.profile, horizon, "gas load " + d.id);
    if (d.curtail_cost < 0.0)
      throw ValidationError("gas load " + d.id + ": curtail_cost must be >= 0");
  }

  const auto& eco = economics;
  if (!(eco.da_weight > 0.0))
    throw ValidationError("economics.da_weight must be > 0");
  if (eco.da_weight > 0.1)
    warnings.push_back("economics.da_weight " + std::to_string(eco.da_weight) +
                       " is large; the DA settlement block is meant to be a small tiebreak");
  if (eco.dev_penalty_pos < 0.0 || eco.dev_penalty_neg < 0.0)
    throw ValidationError("economics deviation penalties must be >= 0");
  double min_cost = 1e300;
  for (const auto& s : suppliers) min_cost = std::min(min_cost, s.unit_cost);
  if (!suppliers.empty() && eco.dev_penalty_neg > min_cost + 1e-12)
    throw ValidationError("economics.dev_penalty_neg must not exceed the cheapest supplier cost");
  for (const auto& n : gas_nodes) {
    auto it = eco.pressure_bounds.find(n.id);
    if (it == eco.pressure_bounds.end())
      throw ValidationError("economics.pressure_bounds missing gas node " + n.id);
    if (!(it->second.min > 0.0) || !(it->second.max > it->second.min))
      throw ValidationError("gas node " + n.id + ": need 0 < pressure min < max");
  }
  for (const auto& [id, pb] : eco.pressure_bounds) {
    (void)pb;
    if (!gas_node_index.count(id))
      throw ValidationError("economics.pressure_bounds references unknown gas node " + id);
  }
  return warnings;
}

}  // namespace ndcgem
