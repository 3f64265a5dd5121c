// Command line front end: parses flags into a RunConfig and executes it.
// Exit status 0 on success, 2 for configuration problems, 1 otherwise.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "ndcgem/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Coordinated gas and electricity day-ahead clearing"};
  ndcgem::RunConfig cfg;
  std::string mode = "coordinated";

  app.add_option("--system", cfg.system_path, "joint system JSON")->required();
  auto* scen = app.add_option("--scenarios", cfg.scenario_path,
                              "wind scenario set JSON");
  auto* gen = app.add_option("--gen-samples", cfg.generate.n_samples,
                             "draw this many wind profiles");
  auto* red = app.add_option("--reduce-to", cfg.generate.n_reduced,
                             "keep this many representative scenarios");
  scen->excludes(gen)->excludes(red);
  app.add_option("--seed", cfg.seed, "scenario generation seed");
  app.add_option("--mode", mode, "coordinated, baseline, or both")
      ->check(CLI::IsMember({"coordinated", "baseline", "both"}));
  app.add_option("--mip-gap", cfg.mip_gap, "relative branch-and-bound gap");
  app.add_option("--rt-sim", cfg.rt.count, "simulate this many realized days");
  app.add_option("--rt-seed", cfg.rt.seed, "simulation draw seed");
  app.add_option("--out", cfg.out_dir, "output directory for CSV reports");
  app.add_flag("--debug-lp", cfg.debug_lp, "dump master models as LP files");
  app.add_flag("--debug-gas", cfg.debug_gas,
               "write the hourly sub-problem table and trace its iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (mode == "baseline") cfg.mode = ndcgem::RunConfig::Mode::baseline;
  else if (mode == "both") cfg.mode = ndcgem::RunConfig::Mode::both;

  try {
    return ndcgem::run(cfg, std::cerr);
  } catch (const ndcgem::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
