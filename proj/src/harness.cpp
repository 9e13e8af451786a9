#include "rmfs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace rmfs {

int PlanOutcome::failures() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return !r.ok; }));
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return out;
}

std::string heatmap_stem(const HeatmapGrid& g) {
  const int minutes = static_cast<int>(g.time / 60.0 + 0.5);
  return fmt::format("heatmap-t{:06d}m", minutes);
}

void write_run_files(const std::filesystem::path& dir, const RunRecord& rec) {
  std::filesystem::create_directories(dir);
  if (!rec.ok) {
    open_out(dir / "error.txt") << rec.error << "\n";
    return;
  }
  open_out(dir / "result.json") << serialize(rec.result) << "\n";
  export_time_series(rec.result.series, dir / "timeseries.csv");
  for (const HeatmapGrid& g : rec.result.heatmaps) {
    write_heatmap_csv(g, dir / (heatmap_stem(g) + ".csv"));
    write_heatmap_ppm(g, dir / (heatmap_stem(g) + ".ppm"));
  }
}

}  // namespace

std::vector<CellSummary> summarize(const ExperimentPlan& plan, const std::vector<RunRecord>& runs) {
  std::vector<CellSummary> out;
  for (const PlanCell& c : plan.cells) {
    CellSummary s;
    s.cell = c.id;
    s.layout = c.scenario.layout.name;
    s.scenario = to_string(c.scenario.kind);
    s.mechanism = c.scenario.mechanism.label();
    s.setup = to_string(c.scenario.setup);
    double sum = 0.0;
    for (const RunRecord& r : runs) {
      if (r.cell != c.id) continue;
      if (!r.ok) {
        ++s.failed;
        continue;
      }
      const double u = 100.0 * r.result.utrs;
      s.utrs_min = s.runs == 0 ? u : std::min(s.utrs_min, u);
      s.utrs_max = s.runs == 0 ? u : std::max(s.utrs_max, u);
      sum += u;
      ++s.runs;
    }
    if (s.runs > 0) s.utrs_mean = sum / s.runs;
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(const std::vector<CellSummary>& cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "cell,layout,scenario,mechanism,setup,runs,failed,utrs_mean_pct,utrs_min_pct,utrs_max_pct\n";
  for (const CellSummary& s : cells) {
    out << fmt::format("{},{},{},{},{},{},{},{:.17g},{:.17g},{:.17g}\n", s.cell, s.layout, s.scenario, s.mechanism,
                       s.setup, s.runs, s.failed, s.utrs_mean, s.utrs_min, s.utrs_max);
  }
}

void export_time_series(const std::vector<Sample>& series, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "time_s,orders_per_hour,well_sortedness,mean_trip_time_to_pick_s,fill_level\n";
  for (const Sample& s : series) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.time, s.orders_per_hour, s.well_sortedness,
                       s.mean_trip_time, s.fill_level);
  }
}

PlanOutcome run_plan(const ExperimentPlan& plan, const Runner& runner, bool write_files) {
  plan.validate();
  struct Job {
    const PlanCell* cell;
    int rep;
  };
  std::vector<Job> jobs;
  for (const PlanCell& c : plan.cells) {
    for (int r = 0; r < plan.repetitions; ++r) jobs.push_back({&c, r});
  }

  PlanOutcome outcome;
  outcome.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      RunRecord& rec = outcome.runs[i];
      rec.cell = job.cell->id;
      rec.repetition = job.rep;
      rec.seed = ExperimentPlan::seed_for(*job.cell, job.rep);
      ScenarioConfig cfg = job.cell->scenario;
      cfg.seed = rec.seed;
      try {
        rec.result = runner(cfg);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      if (write_files) {
        try {
          write_run_files(plan.output_dir / rec.cell / fmt::format("rep-{}", rec.repetition), rec);
        } catch (const std::exception& e) {
          rec.ok = false;
          rec.error = e.what();
        }
      }
    }
  };

  const int threads = std::max(1, std::min<int>(plan.parallel, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  outcome.cells = summarize(plan, outcome.runs);
  if (write_files) write_summary_csv(outcome.cells, plan.output_dir / "summary.csv");
  return outcome;
}

}  // namespace rmfs
