#pragma once

// JSON (de)serialization of JointSystem.  Field names match the struct
// members one-to-one; see README for the file layout.

#include <fstream>
#include <string>

#include <json.hpp>

#include "ndcgem/common.hpp"
#include "ndcgem/model.hpp"

namespace ndcgem {

using json = nlohmann::json;

namespace detail {

inline json curve_to_json(const PiecewiseCurve& c) {
  json bp = json::array();
  for (const auto& [x, y] : c.breakpoints) bp.push_back(json::array({x, y}));
  return json{{"breakpoints", bp}};
}

inline PiecewiseCurve curve_from_json(const json& j, const std::string& owner) {
  PiecewiseCurve c;
  if (!j.contains("breakpoints") || !j["breakpoints"].is_array())
    throw ValidationError(owner + ": curve needs a 'breakpoints' array");
  for (const auto& p : j["breakpoints"]) {
    if (!p.is_array() || p.size() != 2)
      throw ValidationError(owner + ": breakpoints must be [x, y] pairs");
    c.breakpoints.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return c;
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& owner) {
  if (!j.contains(key))
    throw ValidationError(owner + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(owner + ": bad field '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

inline json to_json(const JointSystem& sys) {
  using detail::curve_to_json;
  json j;
  j["horizon"] = sys.horizon;
  j["slack_bus"] = sys.slack_bus;
  j["buses"] = json::array();
  for (const auto& b : sys.buses)
    j["buses"].push_back({{"id", b.id}, {"load_profile", b.load_profile}, {"voll", b.voll}});
  j["lines"] = json::array();
  for (const auto& l : sys.lines)
    j["lines"].push_back({{"id", l.id},
                          {"from_bus", l.from_bus},
                          {"to_bus", l.to_bus},
                          {"reactance", l.reactance},
                          {"capacity", l.capacity}});
  j["units"] = json::array();
  for (const auto& u : sys.units) {
    json ju{{"id", u.id},
            {"bus", u.bus},
            {"is_gfu", u.is_gfu},
            {"p_min", u.p_min},
            {"p_max", u.p_max},
            {"ramp", u.ramp},
            {"t_on", u.t_on},
            {"t_off", u.t_off},
            {"startup_cost", u.startup_cost},
            {"shutdown_cost", u.shutdown_cost},
            {"initial_state", {{"on", u.initial_state.on}, {"hours", u.initial_state.hours}}}};
    if (u.is_gfu) {
      ju["heat_curve"] = curve_to_json(u.heat_curve);
      ju["gas_node"] = u.gas_node;
    } else {
      ju["cost_curve"] = curve_to_json(u.cost_curve);
    }
    j["units"].push_back(ju);
  }
  j["windfarms"] = json::array();
  for (const auto& w : sys.windfarms)
    j["windfarms"].push_back({{"id", w.id}, {"bus", w.bus}, {"capacity", w.capacity}});
  j["gas_nodes"] = json::array();
  for (const auto& n : sys.gas_nodes) j["gas_nodes"].push_back({{"id", n.id}});
  j["pipelines"] = json::array();
  for (const auto& p : sys.pipelines)
    j["pipelines"].push_back({{"id", p.id},
                              {"from_node", p.from_node},
                              {"to_node", p.to_node},
                              {"weymouth_const", p.weymouth_const}});
  j["compressors"] = json::array();
  for (const auto& c : sys.compressors)
    j["compressors"].push_back({{"id", c.id},
                                {"from_node", c.from_node},
                                {"to_node", c.to_node},
                                {"h_min", c.h_min},
                                {"h_max", c.h_max},
                                {"k1", c.k1},
                                {"k2", c.k2},
                                {"alpha", c.alpha},
                                {"gas_coeffs", c.gas_coeffs},
                                {"tap_node", c.tap_node}});
  j["suppliers"] = json::array();
  for (const auto& s : sys.suppliers)
    j["suppliers"].push_back({{"id", s.id},
                              {"node", s.node},
                              {"capacity", s.capacity},
                              {"unit_cost", s.unit_cost}});
  j["gas_loads"] = json::array();
  for (const auto& d : sys.gas_loads)
    j["gas_loads"].push_back({{"id", d.id},
                              {"node", d.node},
                              {"profile", d.profile},
                              {"priority", d.priority == GasPriority::low ? "low" : "high"},
                              {"curtail_cost", d.curtail_cost}});
  json pb = json::object();
  for (const auto& [id, b] : sys.economics.pressure_bounds)
    pb[id] = {{"min", b.min}, {"max", b.max}};
  j["economics"] = {{"da_weight", sys.economics.da_weight},
                    {"dev_penalty_pos", sys.economics.dev_penalty_pos},
                    {"dev_penalty_neg", sys.economics.dev_penalty_neg},
                    {"pressure_bounds", pb}};
  return j;
}

// Parses and validates a system; returns it finalized.  Validation warnings,
// if any, are appended to *warnings when given.
inline JointSystem system_from_json(const json& j,
                                    std::vector<std::string>* warnings = nullptr) {
  using namespace detail;
  JointSystem sys;
  sys.horizon = get_field<int>(j, "horizon", "system");
  sys.slack_bus = get_field<std::string>(j, "slack_bus", "system");
  for (const char* key : {"buses", "lines", "units", "windfarms", "gas_nodes",
                          "pipelines", "compressors", "suppliers", "gas_loads"})
    if (!j.contains(key) || !j.at(key).is_array())
      throw ValidationError(std::string("system: missing array '") + key + "'");

  for (const auto& jb : j["buses"]) {
    Bus b;
    b.id = get_field<std::string>(jb, "id", "bus");
    b.load_profile = get_field<std::vector<double>>(jb, "load_profile", "bus " + b.id);
    b.voll = get_field<double>(jb, "voll", "bus " + b.id);
    sys.buses.push_back(std::move(b));
  }
  for (const auto& jl : j["lines"]) {
    Line l;
    l.id = get_field<std::string>(jl, "id", "line");
    l.from_bus = get_field<std::string>(jl, "from_bus", "line " + l.id);
    l.to_bus = get_field<std::string>(jl, "to_bus", "line " + l.id);
    l.reactance = get_field<double>(jl, "reactance", "line " + l.id);
    l.capacity = get_field<double>(jl, "capacity", "line " + l.id);
    sys.lines.push_back(std::move(l));
  }
  for (const auto& ju : j["units"]) {
    Unit u;
    u.id = get_field<std::string>(ju, "id", "unit");
    const std::string owner = "unit " + u.id;
    u.bus = get_field<std::string>(ju, "bus", owner);
    u.is_gfu = get_or(ju, "is_gfu", false);
    u.p_min = get_field<double>(ju, "p_min", owner);
    u.p_max = get_field<double>(ju, "p_max", owner);
    u.ramp = get_field<double>(ju, "ramp", owner);
    u.t_on = get_field<int>(ju, "t_on", owner);
    u.t_off = get_field<int>(ju, "t_off", owner);
    u.startup_cost = get_field<double>(ju, "startup_cost", owner);
    u.shutdown_cost = get_field<double>(ju, "shutdown_cost", owner);
    if (ju.contains("initial_state")) {
      u.initial_state.on = get_field<bool>(ju["initial_state"], "on", owner);
      u.initial_state.hours = get_field<int>(ju["initial_state"], "hours", owner);
    }
    if (u.is_gfu) {
      if (!ju.contains("heat_curve"))
        throw ValidationError(owner + ": GFU needs a heat_curve");
      u.heat_curve = curve_from_json(ju["heat_curve"], owner + " heat_curve");
      u.gas_node = get_field<std::string>(ju, "gas_node", owner);
    } else {
      if (!ju.contains("cost_curve"))
        throw ValidationError(owner + ": unit needs a cost_curve");
      u.cost_curve = curve_from_json(ju["cost_curve"], owner + " cost_curve");
    }
    sys.units.push_back(std::move(u));
  }
  for (const auto& jw : j["windfarms"]) {
    WindFarm w;
    w.id = get_field<std::string>(jw, "id", "wind farm");
    w.bus = get_field<std::string>(jw, "bus", "wind farm " + w.id);
    w.capacity = get_field<double>(jw, "capacity", "wind farm " + w.id);
    sys.windfarms.push_back(std::move(w));
  }
  for (const auto& jn : j["gas_nodes"]) {
    GasNode n;
    n.id = get_field<std::string>(jn, "id", "gas node");
    sys.gas_nodes.push_back(std::move(n));
  }
  for (const auto& jp : j["pipelines"]) {
    Pipeline p;
    p.id = get_field<std::string>(jp, "id", "pipeline");
    p.from_node = get_field<std::string>(jp, "from_node", "pipeline " + p.id);
    p.to_node = get_field<std::string>(jp, "to_node", "pipeline " + p.id);
    p.weymouth_const = get_field<double>(jp, "weymouth_const", "pipeline " + p.id);
    sys.pipelines.push_back(std::move(p));
  }
  for (const auto& jc : j["compressors"]) {
    Compressor c;
    c.id = get_field<std::string>(jc, "id", "compressor");
    const std::string owner = "compressor " + c.id;
    c.from_node = get_field<std::string>(jc, "from_node", owner);
    c.to_node = get_field<std::string>(jc, "to_node", owner);
    c.h_min = get_field<double>(jc, "h_min", owner);
    c.h_max = get_field<double>(jc, "h_max", owner);
    c.k1 = get_field<double>(jc, "k1", owner);
    c.k2 = get_field<double>(jc, "k2", owner);
    c.alpha = get_field<double>(jc, "alpha", owner);
    auto coeffs = get_field<std::vector<double>>(jc, "gas_coeffs", owner);
    if (coeffs.size() != 3)
      throw ValidationError(owner + ": gas_coeffs must be [a2, a1, a0]");
    c.gas_coeffs = {coeffs[0], coeffs[1], coeffs[2]};
    c.tap_node = get_or<std::string>(jc, "tap_node", "");
    sys.compressors.push_back(std::move(c));
  }
  for (const auto& js : j["suppliers"]) {
    GasSupplier s;
    s.id = get_field<std::string>(js, "id", "supplier");
    s.node = get_field<std::string>(js, "node", "supplier " + s.id);
    s.capacity = get_field<double>(js, "capacity", "supplier " + s.id);
    s.unit_cost = get_field<double>(js, "unit_cost", "supplier " + s.id);
    sys.suppliers.push_back(std::move(s));
  }
  for (const auto& jd : j["gas_loads"]) {
    GasLoad d;
    d.id = get_field<std::string>(jd, "id", "gas load");
    const std::string owner = "gas load " + d.id;
    d.node = get_field<std::string>(jd, "node", owner);
    d.profile = get_field<std::vector<double>>(jd, "profile", owner);
    const std::string pr = get_field<std::string>(jd, "priority", owner);
    if (pr == "low")
      d.priority = GasPriority::low;
    else if (pr == "high")
      d.priority = GasPriority::high;
    else
      throw ValidationError(owner + ": priority must be 'low' or 'high'");
    d.curtail_cost = get_field<double>(jd, "curtail_cost", owner);
    sys.gas_loads.push_back(std::move(d));
  }
  if (!j.contains("economics"))
    throw ValidationError("system: missing 'economics'");
  const auto& je = j["economics"];
  sys.economics.da_weight = get_field<double>(je, "da_weight", "economics");
  sys.economics.dev_penalty_pos = get_field<double>(je, "dev_penalty_pos", "economics");
  sys.economics.dev_penalty_neg = get_field<double>(je, "dev_penalty_neg", "economics");
  if (!je.contains("pressure_bounds") || !je["pressure_bounds"].is_object())
    throw ValidationError("economics: missing 'pressure_bounds' object");
  for (const auto& [id, jb] : je["pressure_bounds"].items()) {
    PressureBounds b;
    b.min = get_field<double>(jb, "min", "pressure_bounds " + id);
    b.max = get_field<double>(jb, "max", "pressure_bounds " + id);
    sys.economics.pressure_bounds[id] = b;
  }

  auto warn = sys.finalize();
  if (warnings) warnings->insert(warnings->end(), warn.begin(), warn.end());
  return sys;
}

inline JointSystem load_system(const std::string& path,
                               std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open system file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("system file " + path + " is not valid JSON: " + e.what());
  }
  try {
    return system_from_json(j, warnings);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace ndcgem
