#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rmfs/graph.hpp"
#include "rmfs/ids.hpp"

namespace rmfs {

// ---------------------------------------------------------------------------
// Catalog and inventory

struct SkuCatalog {
  std::vector<double> frequency;

  std::size_t size() const { return frequency.size(); }
  bool contains(SkuId sku) const { return sku >= 0 && static_cast<std::size_t>(sku) < size(); }
  /// Throws std::invalid_argument unless frequencies are non-negative and sum to 1 (1e-9).
  void validate() const;

  static SkuCatalog from_weights(std::span<const double> weights);
  static SkuCatalog uniform(std::size_t n);
};

/// Draws one weight per SKU from Gamma(shape, scale) and normalizes.
SkuCatalog draw_catalog(std::size_t sku_count, double shape, double scale, std::mt19937_64& rng);

struct SkuUnits {
  SkuId sku = 0;
  int units = 0;
  friend bool operator==(const SkuUnits&, const SkuUnits&) = default;
};

// Small sorted map sku -> units. Pods hold a handful of SKUs, so a flat vector
// beats a node-based map here.
class Inventory {
 public:
  int count(SkuId sku) const;
  int total() const { return total_; }
  bool empty() const { return total_ == 0; }
  std::span<const SkuUnits> items() const { return items_; }

  void add(SkuId sku, int units);
  void remove(SkuId sku, int units);

  friend bool operator==(const Inventory&, const Inventory&) = default;

 private:
  std::vector<SkuUnits> items_;
  int total_ = 0;
};

// ---------------------------------------------------------------------------
// Pods and storage

struct StoredAt {
  LocationId location;
  friend bool operator==(const StoredAt&, const StoredAt&) = default;
};
struct CarriedBy {
  RobotId robot;
  friend bool operator==(const CarriedBy&, const CarriedBy&) = default;
};
struct AtStation {
  StationId station;
  friend bool operator==(const AtStation&, const AtStation&) = default;
};
using Placement = std::variant<StoredAt, CarriedBy, AtStation>;

struct Pod {
  PodId id;
  Inventory inventory;
  int capacity = 40;
  Placement placement;

  int free_capacity() const { return capacity - inventory.total(); }
  bool stored() const { return std::holds_alternative<StoredAt>(placement); }
  std::optional<LocationId> location() const;
};

struct StorageLocation {
  LocationId id;
  NodeId waypoint;
  NodeId access;  // aisle waypoint the location hangs off
  std::optional<PodId> occupant;
  int grid_row = 0;  // row 0 is the northern edge of the storage area
  int grid_col = 0;
};

enum class StationKind : std::uint8_t { Pick, Replenish };

struct Station {
  StationId id;
  StationKind kind = StationKind::Pick;
  NodeId waypoint;    // handling position
  NodeId lane_entry;  // first waypoint of the queue lane
  Seconds unit_handling_time = 10.0;
  std::vector<PodId> inbound;  // pods currently travelling to or queued at the station
};

enum class RobotRole : std::uint8_t { PickSupply, ReplenishSupply, Repositioner };

const char* to_string(RobotRole r);

enum class TaskKind : std::uint8_t { Pick, Replenish, Reposition };

struct TaskDescriptor {
  TaskKind kind = TaskKind::Pick;
  PodId pod;
  std::optional<StationId> station;
  std::optional<LocationId> target;
};

struct RobotAgent {
  RobotId id;
  Point position;
  Heading heading = Heading::North;
  double speed = 0.0;
  RobotRole role = RobotRole::PickSupply;
  std::optional<StationId> home_station;
  std::optional<PodId> carried;
  std::optional<TaskDescriptor> task;
  NodeId node;
};

// ---------------------------------------------------------------------------
// Orders

enum class OrderState : std::uint8_t { Open, Assigned, Completed };

struct OrderLine {
  SkuId sku = 0;
  int quantity = 1;
  int picked = 0;
  int reserved = 0;  // units promised by pods already on their way

  int remaining() const { return quantity - picked; }
  int unreserved() const { return quantity - picked - reserved; }
};

struct CustomerOrder {
  OrderId id = 0;
  std::vector<OrderLine> lines;
  OrderState state = OrderState::Open;
  Seconds created = 0.0;
  Seconds completed = 0.0;
  std::optional<StationId> station;

  bool done() const;
};

struct ReplenishmentOrder {
  OrderId id = 0;
  SkuId sku = 0;
  int quantity = 0;
  int stored = 0;
  bool in_progress = false;  // claimed by a pod trip
  OrderState state = OrderState::Open;
  Seconds created = 0.0;
  std::optional<StationId> station;
};

// ---------------------------------------------------------------------------
// Layout

struct LayoutSpec {
  std::string name;
  int pick_stations = 1;
  int replenish_stations = 1;
  int aisles_horizontal = 1;
  int aisles_vertical = 1;
  int pods = 0;

  void validate() const;
  friend bool operator==(const LayoutSpec&, const LayoutSpec&) = default;

  static const std::vector<LayoutSpec>& builtins();
  static std::optional<LayoutSpec> builtin(std::string_view name);
};

/// Storage locations produced by the block rule: (H+1) x (V+1) blocks of 2x4.
int storage_location_count(const LayoutSpec& spec);

struct LayoutOptions {
  int pod_capacity = 40;
  int queue_length = 4;  // waiting positions in front of each station
  Seconds pick_unit_time = 10.0;
  Seconds replenish_unit_time = 10.0;
  friend bool operator==(const LayoutOptions&, const LayoutOptions&) = default;
};

// ---------------------------------------------------------------------------

class World {
 public:
  LayoutSpec layout;
  WaypointGraph graph;
  SkuCatalog catalog;
  std::vector<Pod> pods;
  std::vector<StorageLocation> locations;
  std::vector<Station> stations;
  std::vector<RobotAgent> robots;
  std::vector<CustomerOrder> customer_orders;
  std::vector<ReplenishmentOrder> replenishment_orders;
  int storage_rows = 0;
  int storage_cols = 0;
  Seconds now = 0.0;

  Pod& pod(PodId id) { return pods[id.index()]; }
  const Pod& pod(PodId id) const { return pods[id.index()]; }
  StorageLocation& location(LocationId id) { return locations[id.index()]; }
  const StorageLocation& location(LocationId id) const { return locations[id.index()]; }
  Station& station(StationId id) { return stations[id.index()]; }
  const Station& station(StationId id) const { return stations[id.index()]; }

  std::vector<StationId> stations_of(StationKind kind) const;
  int pick_station_count() const;

  void set_catalog(SkuCatalog c);

  // Demand f^D: unpicked quantity over open and assigned customer orders.
  int demand(SkuId sku) const;
  std::span<const int> demand_table() const { return demand_; }
  int backlog() const { return backlog_; }

  OrderId add_customer_order(std::vector<OrderLine> lines, Seconds t);
  /// Removes one unit of `line` of `order` from `pod`. Returns true if this
  /// completed the order.
  bool pick_unit(OrderId order, std::size_t line, PodId pod, Seconds t);

  OrderId add_replenishment_order(SkuId sku, int quantity, Seconds t);
  /// Stores one unit of the replenishment order on the pod. Returns true if
  /// this completed the order.
  bool store_unit(OrderId order, PodId pod);

  void store_pod(PodId pod, LocationId loc);
  /// Lifts a stored pod off its location and gives it a new placement.
  void release_pod(PodId pod, Placement next);

  long total_units() const;
  long total_capacity() const;
  long units_in_pending_replenishment() const;

  // Running totals for the conservation check.
  long initial_units = 0;
  long units_picked = 0;
  long units_replenished = 0;

 private:
  std::vector<int> demand_;
  int backlog_ = 0;
};

/// Builds the storage grid, stations and waypoint graph, and places `pods`
/// empty pods on the locations closest to the pick stations.
World generate_layout(const LayoutSpec& spec, const LayoutOptions& options = {});

/// Total units over total pod capacity; 0 for a world without pods.
double fill_level(const World& world);

/// Fills pods in chunks of `chunk` units of SKUs drawn from the catalog
/// frequencies until `target` of the total capacity is reached.
void fill_initial_inventory(World& world, double target, int chunk, std::mt19937_64& rng);

/// Number of placement inconsistencies between locations and pods (0 when the
/// occupant map and pod placements are mutual inverses).
int placement_violations(const World& world);

}  // namespace rmfs
