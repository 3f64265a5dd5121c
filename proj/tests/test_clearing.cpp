#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "ndcgem/clearing.hpp"
#include "ndcgem/system_io.hpp"

namespace {

using namespace ndcgem;
using Catch::Approx;

std::string data_path(const std::string& name) {
  return std::string(NDCGEM_DATA_DIR) + "/" + name;
}

JointSystem toy3() { return load_system(data_path("toy-3bus.json")); }
ScenarioSet toy3_scen() { return load_scenario_set(data_path("toy-3bus-scen.json")); }
JointSystem toyc() { return load_system(data_path("toy-congested.json")); }
ScenarioSet toyc_scen() { return load_scenario_set(data_path("toy-congested-scen.json")); }

PiecewiseCurve curve(std::vector<std::pair<double, double>> pts) {
  PiecewiseCurve c;
  c.breakpoints = std::move(pts);
  return c;
}

// Two buses joined by a 40 MW line, cheap generation on the sending side:
// the line binds and the bus prices split.
JointSystem congested_power_system() {
  JointSystem sys;
  sys.horizon = 2;
  sys.slack_bus = "bA";
  sys.buses = {{"bA", {50, 60}, 2000}, {"bB", {150, 160}, 2000}};
  sys.lines = {{"lAB", "bA", "bB", 0.1, 40}};
  Unit cheap;
  cheap.id = "cheap1";
  cheap.bus = "bA";
  cheap.p_min = 5;
  cheap.p_max = 500;
  cheap.ramp = 500;
  cheap.t_on = cheap.t_off = 1;
  cheap.startup_cost = 50;
  cheap.initial_state = {true, 8};
  cheap.cost_curve = curve({{0, 0}, {500, 5000}});
  Unit pricey = cheap;
  pricey.id = "exp1";
  pricey.bus = "bB";
  pricey.cost_curve = curve({{0, 0}, {500, 25000}});
  sys.units = {cheap, pricey};
  sys.gas_nodes = {{"g1"}};
  sys.suppliers = {{"s1", "g1", 100, 2.0}};
  sys.economics.da_weight = 0.05;
  sys.economics.dev_penalty_pos = 0.5;
  sys.economics.dev_penalty_neg = 1.5;
  sys.economics.pressure_bounds["g1"] = {30, 80};
  sys.finalize();
  return sys;
}

ScenarioSet single_scenario() {
  ScenarioSet s;
  s.rt_scenarios.push_back({1.0, {}});
  return s;
}

}  // namespace

TEST_CASE("fixed-integer resolve reproduces the incumbent") {
  JointSystem sys = toy3();
  ScenarioSet scen = toy3_scen();
  MasterProblem master(sys, scen, compute_ptdf(sys));
  lp::MipSolution mip = lp::solve_mip(master.model());
  REQUIRE(mip.ok());

  lp::LpSolution fixed = fix_and_resolve(master.model(), mip.x);
  CHECK(fixed.objective ==
        Approx(mip.objective).margin(1e-6 * (1.0 + std::abs(mip.objective))));
  for (int j = 0; j < master.model().n_vars(); ++j) {
    if (!master.model().vars[j].integer) continue;
    CHECK(fixed.x[j] == Approx(std::round(mip.x[j])).margin(1e-9));
  }
}

TEST_CASE("uncongested system clears in one pass with uniform prices") {
  JointSystem sys = toy3();
  ClearingResult res = clear(sys, toy3_scen());

  REQUIRE(res.log.size() == 1);
  CHECK(res.log[0].iteration == 1);
  CHECK(res.log[0].cuts_added == 0);
  CHECK(res.log[0].unsatisfied <= 1e-9);
  CHECK(res.cuts.empty());
  CHECK(res.expected_cost == res.schedule.costs.total);

  const double rho = sys.economics.da_weight;
  for (int t = 0; t < sys.horizon; ++t) {
    double lo = res.prices.lmep[0][t], hi = lo;
    for (int m = 1; m < sys.n_buses(); ++m) {
      lo = std::min(lo, res.prices.lmep[m][t]);
      hi = std::max(hi, res.prices.lmep[m][t]);
    }
    CHECK(hi - lo <= 1e-6);
    CHECK(res.prices.lmep[0][t] == Approx(20.0 * (1.0 + rho)).margin(1e-6));
    CHECK(res.prices.gas_price[t] == Approx(2.0).margin(1e-8));
    for (size_t g = 0; g < sys.units.size(); ++g)
      CHECK(res.prices.capacity[g][t] == 0.0);
  }

  // The pinned gas unit books exactly its constant burn; the pipes deliver it.
  for (int t = 0; t < sys.horizon; ++t) {
    CHECK(res.schedule.booking[1][t] == Approx(160.0).margin(1e-6));
    CHECK(res.hourly_gas[t].converged);
    CHECK(res.hourly_gas[t].max_residual <= 1e-6);
    CHECK(res.hourly_gas[t].state.delivered[1] == Approx(160.0).margin(1e-6));
    CHECK(res.compressor_draw[t] == 0.0);
    CHECK(res.gas_value[1][t] == Approx(20.0 * (1.0 + rho) / 8.0).margin(1e-6));
  }

  ClearingResult again = clear(sys, toy3_scen());
  CHECK(again.expected_cost == res.expected_cost);
  CHECK(again.prices.lmep == res.prices.lmep);
}

TEST_CASE("gas value follows the energy price through the heat-rate slope") {
  JointSystem sys = toy3();
  const int T = sys.horizon;

  MasterSolution sched;
  sched.on.assign(sys.units.size(), std::vector<int>(T, 1));
  sched.da.p.assign(sys.units.size(), std::vector<double>(T, 0.0));
  for (int t = 0; t < T; ++t) sched.da.p[1][t] = 20.0;
  sched.on[1][3] = 0;

  PriceResult prices;
  prices.lmep.assign(sys.n_buses(), std::vector<double>(T, 24.0));
  prices.lmep[1][2] = -5.0;

  auto zeta = marginal_gas_value(sys, sched, prices);
  CHECK(zeta[1][0] == 3.0);  // 24 $/MWh over 8 kcf/MWh
  CHECK(zeta[1][1] == 3.0);
  CHECK(zeta[1][2] == 0.0);  // negative energy price clamps
  CHECK(zeta[1][3] == 0.0);  // offline hour
  for (int t = 0; t < T; ++t) CHECK(zeta[0][t] == 0.0);
}

TEST_CASE("binding line splits bus prices and matches the objective response") {
  JointSystem sys = congested_power_system();
  ScenarioSet scen = single_scenario();
  const double rho = sys.economics.da_weight;

  MasterProblem master(sys, scen, compute_ptdf(sys));
  lp::MipSolution mip = lp::solve_mip(master.model());
  REQUIRE(mip.ok());
  lp::LpSolution fixed = fix_and_resolve(master.model(), mip.x);
  PriceResult prices = extract_prices(master, fixed);

  for (int t = 0; t < sys.horizon; ++t) {
    CHECK(prices.lmep[0][t] == Approx(10.0 * (1.0 + rho)).margin(1e-6));
    CHECK(prices.lmep[1][t] == Approx(50.0 * (1.0 + rho)).margin(1e-6));
  }
  CHECK(std::abs(prices.line_dual[0][0]) > 1.0);

  // One extra MWh of load moves the fixed-commitment objective by the bus
  // price, the whole point of the composite dual.
  for (auto [m, t] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
    JointSystem bumped = sys;
    bumped.buses[m].load_profile[t] += 1.0;
    MasterProblem master2(bumped, scen, compute_ptdf(bumped));
    lp::LpSolution fixed2 = fix_and_resolve(master2.model(), mip.x);
    CHECK(fixed2.objective - fixed.objective ==
          Approx(prices.lmep[m][t]).margin(1e-4));
  }
}

TEST_CASE("bottleneck clearing drives unsatisfied gas to zero through cuts") {
  JointSystem sys = toyc();
  ClearingResult res = clear(sys, toyc_scen());

  REQUIRE(res.log.size() >= 2);
  REQUIRE(!res.cuts.empty());
  CHECK(res.log.front().unsatisfied > 1.0);
  for (size_t i = 0; i + 1 < res.log.size(); ++i)
    CHECK(res.log[i + 1].unsatisfied < res.log[i].unsatisfied - 1e-9);
  CHECK(res.log.back().unsatisfied <= 1e-3);
  CHECK(res.log.back().cuts_added == 0);

  // The cheap low-priority load is curtailed to its full headroom, the firm
  // load not at all, and the booking retreats below the unconstrained burn.
  for (int t = 0; t < sys.horizon; ++t) {
    CHECK(res.schedule.shed_gas[0][t] == Approx(200.0).margin(1e-6));
    CHECK(res.schedule.shed_gas[1][t] == 0.0);
    CHECK(res.schedule.booking[1][t] < 799.0);
    CHECK(res.hourly_gas[t].converged);
    CHECK(res.hourly_gas[t].unsatisfied <= 1e-9);
    CHECK(res.hourly_gas[t].state.delivered[1] ==
          Approx(res.schedule.booking[1][t]).margin(1e-6));
  }

  REQUIRE(res.prices.cut_dual.size() == res.cuts.size());
  double max_beta = 0.0;
  for (double b : res.prices.cut_dual) {
    CHECK(b >= 0.0);
    max_beta = std::max(max_beta, b);
  }
  CHECK(max_beta > 1e-6);  // the surviving booking sits on a cut
  for (int t = 0; t < sys.horizon; ++t) {
    CHECK(res.prices.capacity[1][t] > 1e-6);
    CHECK(res.prices.capacity[0][t] == 0.0);
    CHECK(res.gas_value[1][t] >= 0.0);
  }
}

TEST_CASE("baseline reports the physical shortfall post hoc") {
  JointSystem sys = toyc();
  ClearingResult base = clear_baseline(sys, toyc_scen());

  REQUIRE(base.kind == MasterKind::baseline);
  REQUIRE(base.log.size() == 1);
  CHECK(base.cuts.empty());
  CHECK(base.log[0].unsatisfied > 100.0);

  // Power-only commitment runs the gas unit flat out; the pipe can carry
  // 12*sqrt(80^2 - 35^2) = 863.3 kcf/h of which 300 is firm load.
  for (int t = 0; t < sys.horizon; ++t) {
    CHECK(base.schedule.da.p[1][t] == Approx(100.0).margin(1e-6));
    CHECK(base.hourly_gas[t].state.delivered[1] == Approx(563.3).margin(0.5));
    for (size_t d = 0; d < sys.gas_loads.size(); ++d)
      CHECK(base.hourly_gas[t].state.curtail_pos[d] <= 1e-9);
    CHECK(base.prices.gas_price[t] == Approx(2.0).margin(1e-12));
    CHECK(base.prices.capacity[1][t] == 0.0);
  }
  const double bulk = 2.0 * (300.0 * sys.horizon);
  CHECK(base.expected_cost ==
        Approx(base.schedule.costs.total + bulk).margin(1e-6));
}

TEST_CASE("coordination pays day ahead and saves in real time") {
  JointSystem sys = toyc();
  ScenarioSet scen = toyc_scen();
  ClearingResult coord = clear(sys, scen);
  ClearingResult base = clear_baseline(sys, scen);

  const double gap = 1e-4;
  REQUIRE(coord.expected_cost >
          base.expected_cost + 2.0 * gap * base.expected_cost);

  std::vector<WindProfile> draws;
  for (const auto& s : scen.rt_scenarios) draws.push_back(s.profile);
  RtReport rc = simulate_rt(sys, coord, draws);
  RtReport rb = simulate_rt(sys, base, draws);
  REQUIRE(rc.failures == 0);
  REQUIRE(rb.failures == 0);
  CHECK(rc.mean_cost < rb.mean_cost - 2.0 * gap * rb.mean_cost);

  double shed_c = 0.0, shed_b = 0.0;
  for (const auto& oc : rc.outcomes) shed_c += oc.shed_energy;
  for (const auto& oc : rb.outcomes) shed_b += oc.shed_energy;
  CHECK(shed_b > shed_c + 1.0);
  CHECK(rb.outcomes.front().shed_energy > 1.0);   // starved low-wind draw
  CHECK(rb.outcomes.back().shed_energy <= 1e-6);  // high wind clears fine
}

TEST_CASE("real-time dispatch at the forecast matches the day-ahead plan") {
  JointSystem sys = toy3();
  ScenarioSet scen = toy3_scen();
  ClearingResult coord = clear(sys, scen);
  ClearingResult base = clear_baseline(sys, scen);

  std::vector<WindProfile> draws = {scen.da_forecast};
  RtReport rc = simulate_rt(sys, coord, draws);
  RtReport rb = simulate_rt(sys, base, draws);
  REQUIRE(rc.failures == 0);
  REQUIRE(rb.failures == 0);

  CHECK(rc.outcomes[0].shed_energy <= 1e-9);
  CHECK(rc.outcomes[0].gas_deviation <= 1e-6);
  CHECK(rb.outcomes[0].shed_energy <= 1e-9);
  CHECK(rb.outcomes[0].gas_deviation <= 1e-6);

  // Identical physics and a pinned gas unit: the two designs cost the same.
  CHECK(std::abs(rc.mean_cost - rb.mean_cost) <= 1e-4 * rb.mean_cost);
  for (int t = 0; t < sys.horizon; ++t) {
    CHECK(rc.mean_lmep[t] == Approx(20.0).margin(1e-6));
    CHECK(rb.mean_lmep[t] == Approx(20.0).margin(1e-6));
  }
}

TEST_CASE("clearing refuses to run past the outer iteration cap") {
  ClearingOptions opt;
  opt.max_outer = 0;
  REQUIRE_THROWS_AS(clear(toyc(), toyc_scen(), opt), SolverError);
}
