// Storage area geometry on a 1 m waypoint grid.
//
// Vertical lanes sit at x = 1 + 5k (k = 0..V+1) and horizontal lanes at
// y = 3k (k = 0..H+1). The outermost lanes form a counter-clockwise ring; the
// inner aisles alternate direction. Between the lanes sit 2x4 storage blocks:
// each block's lower row hangs off the lane below it and its upper row off the
// lane above it, so every storage location is a dead-end leaf of one aisle
// waypoint. Pick stations sit east of the ring, replenishment stations west of
// it, each behind a one-way queue lane running parallel to the ring.

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "rmfs/world.hpp"

namespace rmfs {
namespace {

constexpr double kXOffset = 1.0;

struct Grid {
  int h = 0;  // inner horizontal aisles
  int v = 0;  // inner vertical aisles

  double lane_x(int k) const { return kXOffset + 5.0 * k; }
  double lane_y(int k) const { return 3.0 * k; }
  double x_max() const { return lane_x(v + 1); }
  double y_max() const { return lane_y(h + 1); }

  Heading vertical_direction(int k) const {
    if (k == 0) return Heading::South;
    if (k == v + 1) return Heading::North;
    return (k % 2 == 1) ? Heading::North : Heading::South;
  }
  Heading horizontal_direction(int k) const {
    if (k == 0) return Heading::East;
    if (k == h + 1) return Heading::West;
    return (k % 2 == 1) ? Heading::East : Heading::West;
  }
};

NodeId node_at(WaypointGraph& g, Point p, NodeKind kind) {
  if (auto n = g.find(p)) return *n;
  return g.add_node(p, kind);
}

void connect(WaypointGraph& g, Point a, Point b) { g.add_edge(*g.find(a), *g.find(b)); }

// Lays out `count` queue lanes along the side x = lane_x (ring) with the lane
// itself at x = side_x. `northbound` selects the lane direction, which always
// matches the ring direction on that side.
void add_stations(World& w, StationKind kind, int count, double ring_x, double side_x, bool northbound,
                  int queue_length, Seconds unit_time, double y_max) {
  const int span = queue_length + 1;
  const int rows = static_cast<int>(y_max) + 1;
  if (count * span > rows) {
    throw std::invalid_argument(fmt::format(
        "layout '{}': {} stations with queue length {} do not fit along a side of {} waypoints",
        w.layout.name, count, queue_length, rows));
  }
  const int slot = rows / count;
  const int offset = (slot - span) / 2;
  for (int j = 0; j < count; ++j) {
    const int lo = j * slot + offset;
    const int hi = lo + queue_length;
    const int entry_y = northbound ? lo : hi;
    const int exit_y = northbound ? hi : lo;
    const int step = northbound ? 1 : -1;

    std::vector<NodeId> lane;
    for (int y = entry_y;; y += step) {
      const bool last = (y == exit_y);
      lane.push_back(w.graph.add_node({side_x, static_cast<double>(y)}, last ? NodeKind::Station : NodeKind::Queue));
      if (last) break;
    }
    w.graph.add_edge(*w.graph.find({ring_x, static_cast<double>(entry_y)}), lane.front());
    for (std::size_t i = 0; i + 1 < lane.size(); ++i) w.graph.add_edge(lane[i], lane[i + 1]);
    w.graph.add_edge(lane.back(), *w.graph.find({ring_x, static_cast<double>(exit_y)}));

    Station s;
    s.id = StationId{w.stations.size()};
    s.kind = kind;
    s.waypoint = lane.back();
    s.lane_entry = lane.front();
    s.unit_handling_time = unit_time;
    w.stations.push_back(std::move(s));
  }
}

}  // namespace

World generate_layout(const LayoutSpec& spec, const LayoutOptions& options) {
  spec.validate();
  if (options.pod_capacity < 1) throw std::invalid_argument("pod capacity must be >= 1");
  if (options.queue_length < 1) throw std::invalid_argument("station queue length must be >= 1");

  World w;
  w.layout = spec;
  const Grid grid{spec.aisles_horizontal, spec.aisles_vertical};
  WaypointGraph& g = w.graph;

  // Aisle waypoints: every vertical lane, then the remaining horizontal lane cells.
  for (int k = 0; k <= grid.v + 1; ++k) {
    for (int y = 0; y <= static_cast<int>(grid.y_max()); ++y) {
      node_at(g, {grid.lane_x(k), static_cast<double>(y)}, NodeKind::Aisle);
    }
  }
  for (int k = 0; k <= grid.h + 1; ++k) {
    for (int x = static_cast<int>(grid.lane_x(0)); x <= static_cast<int>(grid.x_max()); ++x) {
      node_at(g, {static_cast<double>(x), grid.lane_y(k)}, NodeKind::Aisle);
    }
  }
  for (int k = 0; k <= grid.v + 1; ++k) {
    const double x = grid.lane_x(k);
    const bool north = grid.vertical_direction(k) == Heading::North;
    for (int y = 0; y < static_cast<int>(grid.y_max()); ++y) {
      const Point lo{x, static_cast<double>(y)};
      const Point hi{x, static_cast<double>(y + 1)};
      north ? connect(g, lo, hi) : connect(g, hi, lo);
    }
  }
  for (int k = 0; k <= grid.h + 1; ++k) {
    const double y = grid.lane_y(k);
    const bool east = grid.horizontal_direction(k) == Heading::East;
    for (int x = static_cast<int>(grid.lane_x(0)); x < static_cast<int>(grid.x_max()); ++x) {
      const Point lo{static_cast<double>(x), y};
      const Point hi{static_cast<double>(x + 1), y};
      east ? connect(g, lo, hi) : connect(g, hi, lo);
    }
  }

  // Storage locations, numbered row-major from the north-west corner.
  w.storage_rows = 2 * (grid.h + 1);
  w.storage_cols = 4 * (grid.v + 1);
  for (int row = 0; row < w.storage_rows; ++row) {
    const int from_bottom = w.storage_rows - 1 - row;
    const int block_row = from_bottom / 2;
    const bool upper = (from_bottom % 2) == 1;
    const double y = 1.0 + 3.0 * block_row + (upper ? 1.0 : 0.0);
    const double access_y = upper ? grid.lane_y(block_row + 1) : grid.lane_y(block_row);
    for (int col = 0; col < w.storage_cols; ++col) {
      const int block_col = col / 4;
      const double x = grid.lane_x(block_col) + 1.0 + (col % 4);
      StorageLocation loc;
      loc.id = LocationId{w.locations.size()};
      loc.waypoint = g.add_node({x, y}, NodeKind::Storage);
      loc.access = *g.find({x, access_y});
      loc.grid_row = row;
      loc.grid_col = col;
      g.add_two_way(loc.access, loc.waypoint);
      w.locations.push_back(loc);
    }
  }

  add_stations(w, StationKind::Replenish, spec.replenish_stations, grid.lane_x(0), grid.lane_x(0) - 1.0,
               false, options.queue_length, options.replenish_unit_time, grid.y_max());
  add_stations(w, StationKind::Pick, spec.pick_stations, grid.x_max(), grid.x_max() + 1.0, true,
               options.queue_length, options.pick_unit_time, grid.y_max());

  // Pods start on the locations closest (straight-line) to any pick station.
  const auto picks = w.stations_of(StationKind::Pick);
  std::vector<std::pair<double, LocationId>> order;
  order.reserve(w.locations.size());
  for (const StorageLocation& l : w.locations) {
    double best = std::numeric_limits<double>::infinity();
    for (StationId s : picks) best = std::min(best, distance(g.position(l.waypoint), g.position(w.station(s).waypoint)));
    order.emplace_back(best, l.id);
  }
  std::sort(order.begin(), order.end());
  for (int i = 0; i < spec.pods; ++i) {
    Pod p;
    p.id = PodId{static_cast<std::size_t>(i)};
    p.capacity = options.pod_capacity;
    p.placement = StoredAt{order[static_cast<std::size_t>(i)].second};
    w.location(order[static_cast<std::size_t>(i)].second).occupant = p.id;
    w.pods.push_back(std::move(p));
  }
  return w;
}

}  // namespace rmfs
