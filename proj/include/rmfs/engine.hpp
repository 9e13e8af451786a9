#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmfs/heatmap.hpp"
#include "rmfs/kinematics.hpp"
#include "rmfs/policies.hpp"
#include "rmfs/world.hpp"

namespace rmfs {

inline constexpr Seconds kHour = 3600.0;
inline constexpr Seconds kDay = 24 * kHour;

/// Simulation time 0 is 06:00 on day 1. Returns seconds since midnight.
Seconds time_of_day(Seconds t);
/// True inside the nightly [22:00, 06:00) window.
bool in_down_window(Seconds t);

enum class ScenarioKind : std::uint8_t { DownPeriod, Parallel };
const char* to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(std::string_view s);

/// Down-period rows switch nightly repositioning on or off; parallel rows pick
/// a robot split (replenish / pick / repositioner robots per pick station).
enum class Setup : std::uint8_t { Deactivated, Activated, R1P3A0, R1P2A1, R1P3A1 };
const char* to_string(Setup s);
Setup parse_setup(std::string_view s);

struct RobotSplit {
  int replenish = 1;
  int pick = 3;
  int repositioner = 0;
  int total() const { return replenish + pick + repositioner; }
};

/// Robots per pick station. Down-period setups use the R1P3A0 split during the day.
RobotSplit robot_split(Setup s);

/// Knobs the scenarios leave open. Defaults are the documented model values.
struct SimulationParams {
  int sku_count = 1000;
  double sku_gamma_shape = 1.0;
  double sku_gamma_scale = 2.0;
  int order_lines_min = 1;
  int order_lines_max = 3;
  int customer_backlog = 2000;
  int night_orders_per_station = 1500;
  int replenishment_backlog = 200;  // parallel scenario
  int replenishment_order_size = 10;  // matches the initial fill chunk; single-sku 20-unit orders make pods less diverse
  double target_fill = 0.75;
  int initial_fill_chunk = 10;
  int station_order_pool = 40;       // customer orders assigned to a pick station at once
  int replenishment_order_pool = 6;  // per replenishment station
  // 40-unit pods drain within a day at the target throughput, so scenarios
  // default to larger pods.
  LayoutOptions layout_options{.pod_capacity = 200};
  Seconds sample_interval = 300.0;
  Seconds threshold_refresh = 900.0;
  Seconds deadlock_timeout = kHour;
  bool record_heatmaps = true;

  void validate() const;
  friend bool operator==(const SimulationParams&, const SimulationParams&) = default;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::DownPeriod;
  LayoutSpec layout;
  MechanismConfig mechanism;
  Setup setup = Setup::Activated;
  Seconds horizon = 7 * kDay;
  int repetitions = 5;
  std::uint64_t seed = 1;
  KinematicsConfig kinematics;
  SimulationParams params;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Whether robots reposition pods during the nightly down period.
  bool night_repositioning() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct Sample {
  Seconds time = 0.0;
  double orders_per_hour = 0.0;
  double well_sortedness = 0.0;
  Seconds mean_trip_time = 0.0;  // lift to arrival at a pick station, trips finished in the interval
  double fill_level = 0.0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct RunTotals {
  long units_picked = 0;
  long units_replenished = 0;
  long orders_completed = 0;
  long pick_trips = 0;
  long moves_executed = 0;  // active repositioning moves
  double distance_traveled = 0.0;
  double active_hours = 0.0;
  int robots = 0;
  std::vector<long> station_units;  // units handled per station, by station id
  long invariant_checks = 0;
  long unit_conservation_violations = 0;
  long placement_violations = 0;
  long collision_violations = 0;
  friend bool operator==(const RunTotals&, const RunTotals&) = default;
};

struct RunResult {
  std::string layout;
  std::string scenario;
  std::string mechanism;
  std::string setup;
  std::uint64_t seed = 0;
  Seconds horizon = 0.0;
  double utrs = 0.0;
  RunTotals totals;
  std::vector<Sample> series;
  std::vector<HeatmapGrid> heatmaps;
  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Canonical JSON text of a result (stable field order, full precision).
std::string serialize(const RunResult& r);

// ---------------------------------------------------------------------------
// Task allocation rules, exposed for testing.

/// Units of `need` (per-SKU outstanding units) the pod could serve.
int pickable_units(const Pod& pod, std::span<const int> need);

/// Stored pod maximizing pickable units (ties: smaller `time_to[pod node]`,
/// then pod id). nullopt when no movable pod serves any unit.
std::optional<PodId> select_pick_pod(const World& world, std::span<const int> need,
                                     std::span<const std::uint8_t> movable, std::span<const Seconds> time_to);

/// Stored pod with the most free capacity, at least `min_free` (ties: smaller
/// `time_to[pod node]`, then pod id).
std::optional<PodId> select_replenish_pod(const World& world, int min_free, std::span<const std::uint8_t> movable,
                                          std::span<const Seconds> time_to);

/// Order lines for one customer order: a uniform number of lines, SKUs drawn
/// from the catalog frequencies, one unit each; repeated SKUs are merged.
std::vector<OrderLine> draw_order_lines(std::discrete_distribution<SkuId>& sku_dist, int min_lines, int max_lines,
                                        std::mt19937_64& rng);

// ---------------------------------------------------------------------------

/// One seeded run. Events are processed in (time, sequence) order; all
/// randomness comes from substreams of the run seed, so equal configs give
/// identical runs.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Processes every event with time <= t (clamped to the horizon).
  void run_until(Seconds t);
  /// Runs to the horizon and assembles the result.
  RunResult finish();

  Seconds now() const;
  const World& world() const;
  const RankTable& ranks() const;
  bool stations_open() const;
  /// Combined scores of the current inventory.
  PodScores scores() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(const ScenarioConfig& config);

}  // namespace rmfs
