// Command-line front end: run experiment plans, list layouts, check configs.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rmfs/config.hpp"
#include "rmfs/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Robotic mobile fulfillment simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  int parallel = 0;

  auto* run_cmd = app.add_subcommand("run", "Run every cell and repetition of a plan");
  run_cmd->add_option("-c,--config", config, "YAML plan")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--out", out_dir, "Output directory (overrides RMFS_OUTPUT_DIR and the config)");
  run_cmd->add_option("-j,--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);

  auto* layouts_cmd = app.add_subcommand("layouts", "List built-in layouts");

  auto* validate_cmd = app.add_subcommand("validate", "Parse a plan and print it normalized");
  validate_cmd->add_option("-c,--config", config, "YAML plan")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (layouts_cmd->parsed()) {
      fmt::print("{:<8} {:>5} {:>5} {:>3} {:>3} {:>5} {:>9}\n", "name", "pick", "repl", "H", "V", "pods", "locations");
      for (const rmfs::LayoutSpec& s : rmfs::LayoutSpec::builtins()) {
        fmt::print("{:<8} {:>5} {:>5} {:>3} {:>3} {:>5} {:>9}\n", s.name, s.pick_stations, s.replenish_stations,
                   s.aisles_horizontal, s.aisles_vertical, s.pods, rmfs::storage_location_count(s));
      }
      return 0;
    }

    rmfs::ExperimentPlan plan = rmfs::load_plan(config);
    if (validate_cmd->parsed()) {
      std::cout << rmfs::serialize_plan(plan);
      return 0;
    }

    if (const char* env = std::getenv("RMFS_OUTPUT_DIR"); env && *env) plan.output_dir = env;
    if (!out_dir.empty()) plan.output_dir = out_dir;
    if (parallel > 0) plan.parallel = parallel;

    const rmfs::PlanOutcome outcome = rmfs::run_plan(plan);
    for (const rmfs::RunRecord& r : outcome.runs) {
      if (r.ok) {
        fmt::print("{} rep {} seed {}: UTRS {:.2f}%\n", r.cell, r.repetition, r.seed, 100.0 * r.result.utrs);
      } else {
        fmt::print(stderr, "{} rep {} seed {}: FAILED: {}\n", r.cell, r.repetition, r.seed, r.error);
      }
    }
    for (const rmfs::CellSummary& s : outcome.cells) {
      fmt::print("{}: mean {:.2f}% (min {:.2f}, max {:.2f}) over {} runs\n", s.cell, s.utrs_mean, s.utrs_min,
                 s.utrs_max, s.runs);
    }
    fmt::print("results in {}\n", plan.output_dir.string());
    return outcome.failures() == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
