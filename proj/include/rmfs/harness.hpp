#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rmfs/config.hpp"
#include "rmfs/engine.hpp"

namespace rmfs {

using Runner = std::function<RunResult(const ScenarioConfig&)>;

struct RunRecord {
  std::string cell;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunResult result;  // valid when ok
};

struct CellSummary {
  std::string cell;
  std::string layout;
  std::string scenario;
  std::string mechanism;
  std::string setup;
  int runs = 0;
  int failed = 0;
  double utrs_mean = 0.0;  // percent
  double utrs_min = 0.0;
  double utrs_max = 0.0;
};

struct PlanOutcome {
  std::vector<RunRecord> runs;  // plan order: cell-major, then repetition
  std::vector<CellSummary> cells;
  int failures() const;
};

/// Runs every (cell, repetition) of the plan on `plan.parallel` worker threads.
/// A failing run is recorded and does not stop the others. When `write_files`
/// is set, results go under plan.output_dir.
PlanOutcome run_plan(const ExperimentPlan& plan, const Runner& runner = run, bool write_files = true);

std::vector<CellSummary> summarize(const ExperimentPlan& plan, const std::vector<RunRecord>& runs);

void write_summary_csv(const std::vector<CellSummary>& cells, const std::filesystem::path& path);
void export_time_series(const std::vector<Sample>& series, const std::filesystem::path& path);

}  // namespace rmfs
