#pragma once

#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rmfs/graph.hpp"
#include "rmfs/world.hpp"

namespace rmfs {

struct PathTimeParams {
  double cruise_speed = 1.5;   // m/s
  Seconds turn_penalty = 2.5;  // per 90 degree heading change
  friend bool operator==(const PathTimeParams&, const PathTimeParams&) = default;
};

/// Turn-aware travel time estimates on a waypoint graph.
///
/// Cost of a route = sum(edge length) / cruise speed + turn penalty x number of
/// quarter turns between consecutive edges. The search runs over
/// (node, incoming heading) states; the start state carries no heading.
///
/// Memo tables fill lazily, so a single estimator must not be queried from
/// several threads at once.
class PathTimeEstimator {
 public:
  explicit PathTimeEstimator(const WaypointGraph& graph, PathTimeParams params = {});

  const WaypointGraph& graph() const { return *graph_; }
  const PathTimeParams& params() const { return params_; }

  /// Memoized A*; nullopt when `to` is unreachable from `from`.
  std::optional<Seconds> path_time(NodeId from, NodeId to) const;

  /// Uncached single-pair search. With `use_heuristic` false this is plain
  /// Dijkstra over the state graph.
  std::optional<Seconds> search(NodeId from, NodeId to, bool use_heuristic = true) const;

  /// Times from `from` to every node (infinity when unreachable), cached per source.
  const std::vector<Seconds>& times_from(NodeId from) const;

  /// Times from every node to `to` (infinity when unreachable), cached per target.
  const std::vector<Seconds>& times_to(NodeId to) const;

  /// Cheapest node sequence from `from` to `to` (both included) given the
  /// robot's current heading. Empty when unreachable.
  std::vector<NodeId> route(NodeId from, NodeId to, std::optional<Heading> heading) const;

 private:
  std::optional<Seconds> astar(NodeId from, NodeId to, std::optional<Heading> heading, bool use_heuristic,
                               std::vector<NodeId>* route_out) const;

  const WaypointGraph* graph_;
  PathTimeParams params_;
  mutable std::unordered_map<std::uint64_t, std::optional<Seconds>> pair_memo_;
  mutable std::vector<std::unique_ptr<std::vector<Seconds>>> rows_from_;
  mutable std::vector<std::unique_ptr<std::vector<Seconds>>> rows_to_;
};

/// Prominence per storage location, indexed by location id. Lower is better.
struct ProminenceField {
  std::vector<Seconds> by_location;
  std::size_t size() const { return by_location.size(); }
  Seconds operator[](LocationId l) const { return by_location[l.index()]; }
};

/// Minimum path time from the location to any pick station. Throws when the
/// world has no pick station or none is reachable.
Seconds prominence(const World& world, const PathTimeEstimator& paths, LocationId location);

/// Prominence for every storage location. Values are snapped to a 1 ns grid
/// so that geometrically equal locations tie exactly.
ProminenceField compute_prominence_field(const World& world, const PathTimeEstimator& paths);

}  // namespace rmfs
