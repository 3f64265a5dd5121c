#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "ndcgem/report.hpp"

using namespace ndcgem;
namespace fs = std::filesystem;

namespace {

std::string data_path(const std::string& name) {
  return std::string(NDCGEM_DATA_DIR) + "/" + name;
}

std::string golden(const std::string& name) {
  std::ifstream in(std::string(NDCGEM_GOLDEN_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("ndcgem_report_" + tag);
  fs::remove_all(dir);
  return dir;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    out[e.path().filename().string()] = slurp(e.path());
  return out;
}

PiecewiseCurve curve(std::vector<std::array<double, 2>> pts) {
  PiecewiseCurve c;
  for (auto& p : pts) c.breakpoints.emplace_back(p[0], p[1]);
  return c;
}

// Small two-bus system plus a hand-filled result with awkward digit counts so
// every builder's rounding and column order is pinned byte for byte.
JointSystem golden_system() {
  JointSystem sys;
  sys.horizon = 2;
  sys.buses = {{"bA", {100.0, 100.0}, 1000.0}, {"bB", {50.0, 50.0}, 1000.0}};
  Unit coal;
  coal.id = "coal1";
  coal.bus = "bA";
  coal.p_min = 10.0;
  coal.p_max = 300.0;
  coal.cost_curve = curve({{0.0, 0.0}, {300.0, 6000.0}});
  Unit gfu;
  gfu.id = "gfu1";
  gfu.bus = "bB";
  gfu.is_gfu = true;
  gfu.gas_node = "g1";
  gfu.p_min = 10.0;
  gfu.p_max = 100.0;
  gfu.heat_curve = curve({{0.0, 0.0}, {100.0, 800.0}});
  sys.units = {coal, gfu};
  sys.gas_nodes = {{"g1"}};
  sys.gas_loads = {{"dl", "g1", {200.0, 200.0}, GasPriority::low, 2.2},
                   {"dh", "g1", {100.0, 100.0}, GasPriority::high, 60.0}};
  return sys;
}

ClearingResult golden_result() {
  ClearingResult res;
  res.kind = MasterKind::coordinated;
  res.schedule.on = {{1, 1}, {1, 0}};
  res.schedule.da.p = {{123.456789, 120.0}, {87.5, 0.0}};
  res.schedule.da.burn = {{0.0, 0.0}, {700.0, 0.0}};
  res.schedule.booking = {{0.0, 0.0}, {700.0, 0.0}};
  res.schedule.shed_gas = {{12.125, 0.0}, {0.0, 0.0}};
  res.prices.lmep = {{20.01, 1234567.0}, {52.5, 0.000123456789}};
  res.prices.gas_price = {2.0, 2.625};
  res.prices.capacity = {{0.0, 0.0}, {0.40625, 0.0}};
  BendersCut cut;
  cut.hour = 1;
  cut.rhs = 863.3249;
  cut.x_coef = {0.0, 1.0};
  cut.shed_coef = {1.0, 0.0};
  res.cuts = {cut};
  res.log = {{1, 37, 73.458899, 1}, {2, 12, 0.0, 0}};
  res.hour_log = {{1, 0, 19, 1009.654321, 36.729},
                  {1, 1, 18, 1009.7, 36.729},
                  {2, 0, 6, 0.0, 0.0},
                  {2, 1, 6, 0.0, 0.0}};
  for (int t = 0; t < 2; ++t) {
    SubproblemResult sub;
    sub.state.curtail_pos = t == 0 ? std::vector<double>{0.0, 5e-10}
                                   : std::vector<double>{0.0, 2.5};
    res.hourly_gas.push_back(sub);
  }
  return res;
}

}  // namespace

TEST_CASE("numbers render with six significant digits") {
  CHECK(csv::num(0.0) == "0");
  CHECK(csv::num(20.01) == "20.01");
  CHECK(csv::num(-0.5) == "-0.5");
  CHECK(csv::num(123.456789) == "123.457");
  CHECK(csv::num(1234567.0) == "1.23457e+06");
  CHECK(csv::num(0.000123456789) == "0.000123457");
  CHECK(csv::num(1e-10) == "1e-10");
  CHECK(csv::num(863.3249) == "863.325");
}

TEST_CASE("csv builders match frozen golden bytes") {
  const JointSystem sys = golden_system();
  const ClearingResult res = golden_result();

  CHECK(schedule_csv(sys, res) == golden("schedule.csv"));
  CHECK(prices_csv(sys, res, true) == golden("prices_coordinated.csv"));
  CHECK(prices_csv(sys, res, false) == golden("prices_baseline.csv"));
  CHECK(cuts_csv(sys, res) == golden("cuts.csv"));
  CHECK(iterations_csv(res) == golden("iterations.csv"));
  CHECK(curtailments_csv(sys, res) == golden("curtailments.csv"));
  CHECK(bookings_csv(sys, res) == golden("bookings.csv"));
  CHECK(gas_debug_csv(res) == golden("gas_debug.csv"));

  RtReport rt;
  rt.mean_lmep = {20.01, 21.0};
  CHECK(rt_lmep_csv(rt) == golden("rt_lmep.csv"));

  std::vector<RtSummaryRow> rows;
  rows.push_back({"coordinated", 9876.54321, 8123.4567, 12.0625});
  rows.push_back({"baseline", 9000.0, std::nullopt, std::nullopt});
  CHECK(rt_summary_csv(rows) == golden("rt_summary.csv"));
}

TEST_CASE("an empty cut set writes only the header") {
  const JointSystem sys = golden_system();
  ClearingResult res = golden_result();
  res.cuts.clear();
  CHECK(cuts_csv(sys, res) == "cut,hour,rhs,term_kind,term_id,coef\n");
}

TEST_CASE("file writes are atomic and replace previous content") {
  const fs::path dir = fresh_dir("atomic");
  fs::create_directories(dir);
  const std::string path = (dir / "probe.csv").string();
  csv::write_file(path, "first\n");
  csv::write_file(path, "second\n");
  CHECK(slurp(path) == "second\n");
  CHECK_FALSE(fs::exists(path + ".tmp"));
  fs::remove_all(dir);
}

TEST_CASE("configuration faults are rejected before any work") {
  RunConfig cfg;
  cfg.system_path = data_path("toy-congested.json");
  cfg.scenario_path = data_path("toy-congested-scen.json");
  cfg.out_dir = fresh_dir("cfg").string();
  std::ostringstream diag;

  SECTION("zero mip gap") {
    cfg.mip_gap = 0.0;
    CHECK_THROWS_AS(run(cfg, diag), ConfigError);
  }
  SECTION("missing system path") {
    cfg.system_path.clear();
    CHECK_THROWS_AS(run(cfg, diag), ConfigError);
  }
  SECTION("unreadable system file") {
    cfg.system_path = data_path("no-such-file.json");
    CHECK_THROWS_AS(run(cfg, diag), ConfigError);
  }
  SECTION("generation without sample count") {
    cfg.scenario_path.clear();
    CHECK_THROWS_AS(run(cfg, diag), ConfigError);
  }
  SECTION("reduction larger than the sample pool") {
    cfg.scenario_path.clear();
    cfg.generate = {10, 11};
    CHECK_THROWS_AS(run(cfg, diag), ConfigError);
  }
  SECTION("negative simulation count") {
    cfg.rt.count = -1;
    CHECK_THROWS_AS(run(cfg, diag), ConfigError);
  }
  CHECK_FALSE(fs::exists(cfg.out_dir + "/rt_summary.csv"));
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("a paired run writes the full manifest and is byte-stable") {
  RunConfig cfg;
  cfg.system_path = data_path("toy-congested.json");
  cfg.scenario_path = data_path("toy-congested-scen.json");
  cfg.mode = RunConfig::Mode::both;
  cfg.rt = {6, 77};
  std::ostringstream diag;

  const fs::path dir_a = fresh_dir("both_a");
  const fs::path dir_b = fresh_dir("both_b");
  cfg.out_dir = dir_a.string();
  REQUIRE(run(cfg, diag) == 0);
  cfg.out_dir = dir_b.string();
  REQUIRE(run(cfg, diag) == 0);

  const auto files_a = dir_contents(dir_a);
  const std::set<std::string> expected = {
      "rt_summary.csv",          "schedule.csv",
      "prices.csv",              "iterations.csv",
      "curtailments.csv",        "bookings.csv",
      "cuts.csv",                "rt_lmep.csv",
      "baseline_schedule.csv",   "baseline_prices.csv",
      "baseline_iterations.csv", "baseline_curtailments.csv",
      "baseline_bookings.csv",   "baseline_rt_lmep.csv"};
  std::set<std::string> actual;
  for (const auto& [name, content] : files_a) actual.insert(name);
  CHECK(actual == expected);

  // Column shape: capacity only on the coordinated side.
  CHECK(files_a.at("prices.csv").substr(0, 44) ==
        "hour,id,lmep,gas_price,gas_capacity_price\n0,");
  CHECK(files_a.at("baseline_prices.csv").substr(0, 25) ==
        "hour,id,lmep,gas_price\n0,");
  CHECK(files_a.at("cuts.csv").find("booking,gfu1,") != std::string::npos);

  // Summary carries both cases and a reduction on the coordinated row only.
  std::istringstream summary(files_a.at("rt_summary.csv"));
  std::string header, coord_row, base_row;
  std::getline(summary, header);
  std::getline(summary, coord_row);
  std::getline(summary, base_row);
  CHECK(header == "case,expected_cost,simulated_mean_cost,reduction_pct");
  CHECK(coord_row.rfind("coordinated,", 0) == 0);
  CHECK(base_row.rfind("baseline,", 0) == 0);
  CHECK(coord_row.back() != ',');   // reduction present
  CHECK(base_row.back() == ',');    // reduction blank
  CHECK(base_row.find(",,") == std::string::npos);  // simulated present

  const auto files_b = dir_contents(dir_b);
  CHECK(files_a == files_b);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("generated scenarios drive a run end to end") {
  RunConfig cfg;
  cfg.system_path = data_path("toy-3bus.json");
  cfg.generate = {40, 5};
  cfg.seed = 424242;
  cfg.mode = RunConfig::Mode::coordinated;
  cfg.rt = {8, 9};
  cfg.debug_lp = true;
  cfg.debug_gas = true;
  std::ostringstream diag;

  const fs::path dir = fresh_dir("gen");
  cfg.out_dir = dir.string();
  REQUIRE(run(cfg, diag) == 0);

  CHECK(fs::exists(dir / "schedule.csv"));
  CHECK(fs::exists(dir / "cuts.csv"));
  CHECK(fs::exists(dir / "rt_lmep.csv"));
  CHECK(fs::exists(dir / "gas_debug.csv"));
  CHECK(fs::exists(dir / "master_it1.lp"));
  CHECK_FALSE(fs::exists(dir / "baseline_schedule.csv"));

  // The debug table lists every (iteration, hour) pair for a 4 hour horizon.
  std::istringstream debug(slurp(dir / "gas_debug.csv"));
  std::string line;
  std::getline(debug, line);
  int rows = 0;
  while (std::getline(debug, line)) ++rows;
  CHECK(rows % 4 == 0);
  CHECK(rows >= 4);

  // Same seed, fresh directory: identical bytes.
  const auto before = dir_contents(dir);
  fs::remove_all(dir);
  REQUIRE(run(cfg, diag) == 0);
  CHECK(dir_contents(dir) == before);

  fs::remove_all(dir);
}

TEST_CASE("baseline-only mode trims the capacity column and cuts file") {
  RunConfig cfg;
  cfg.system_path = data_path("toy-congested.json");
  cfg.scenario_path = data_path("toy-congested-scen.json");
  cfg.mode = RunConfig::Mode::baseline;
  std::ostringstream diag;

  const fs::path dir = fresh_dir("base_only");
  cfg.out_dir = dir.string();
  REQUIRE(run(cfg, diag) == 0);

  CHECK(fs::exists(dir / "schedule.csv"));
  CHECK_FALSE(fs::exists(dir / "cuts.csv"));
  CHECK_FALSE(fs::exists(dir / "rt_lmep.csv"));
  std::istringstream prices(slurp(dir / "prices.csv"));
  std::string header;
  std::getline(prices, header);
  CHECK(header == "hour,id,lmep,gas_price");

  std::istringstream summary(slurp(dir / "rt_summary.csv"));
  std::string line;
  std::getline(summary, line);
  std::getline(summary, line);
  CHECK(line.rfind("baseline,", 0) == 0);
  CHECK(line.find(",,") != std::string::npos);  // no simulation ran

  fs::remove_all(dir);
}
