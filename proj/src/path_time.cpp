#include "rmfs/path_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace rmfs {
namespace {

constexpr Seconds kInf = std::numeric_limits<Seconds>::infinity();
constexpr int kNoHeading = 4;
constexpr int kStates = 5;

std::size_t state_of(NodeId n, int heading) { return n.index() * kStates + static_cast<std::size_t>(heading); }
NodeId node_of(std::size_t state) { return NodeId{state / kStates}; }

struct QueueEntry {
  Seconds priority;
  Seconds cost;
  std::size_t state;
  bool operator>(const QueueEntry& o) const {
    if (priority != o.priority) return priority > o.priority;
    return state > o.state;
  }
};
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

Seconds step_cost(const PathTimeParams& p, int incoming, const Edge& e) {
  Seconds c = e.length / p.cruise_speed;
  if (incoming != kNoHeading) c += quarter_turns(static_cast<Heading>(incoming), e.heading) * p.turn_penalty;
  return c;
}

Seconds snap(Seconds t) { return std::round(t * 1e9) / 1e9; }

}  // namespace

PathTimeEstimator::PathTimeEstimator(const WaypointGraph& graph, PathTimeParams params)
    : graph_(&graph), params_(params), rows_from_(graph.size()), rows_to_(graph.size()) {
  if (!(params_.cruise_speed > 0.0)) throw std::invalid_argument("cruise speed must be positive");
  if (params_.turn_penalty < 0.0) throw std::invalid_argument("turn penalty must be non-negative");
}

std::optional<Seconds> PathTimeEstimator::astar(NodeId from, NodeId to, std::optional<Heading> heading,
                                                bool use_heuristic, std::vector<NodeId>* route_out) const {
  const WaypointGraph& g = *graph_;
  if (from.index() >= g.size() || to.index() >= g.size()) throw std::out_of_range("node id out of range");
  if (from == to) {
    if (route_out) *route_out = {from};
    return 0.0;
  }
  const Point goal = g.position(to);
  const auto h = [&](NodeId n) { return use_heuristic ? distance(g.position(n), goal) / params_.cruise_speed : 0.0; };

  std::vector<Seconds> best(g.size() * kStates, kInf);
  std::vector<std::size_t> parent;
  if (route_out) parent.assign(g.size() * kStates, std::numeric_limits<std::size_t>::max());
  std::vector<bool> closed(g.size() * kStates, false);

  MinQueue open;
  const std::size_t start = state_of(from, heading ? static_cast<int>(*heading) : kNoHeading);
  best[start] = 0.0;
  open.push({h(from), 0.0, start});
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (closed[top.state]) continue;
    closed[top.state] = true;
    const NodeId n = node_of(top.state);
    if (n == to) {
      if (route_out) {
        route_out->clear();
        for (std::size_t s = top.state; s != std::numeric_limits<std::size_t>::max(); s = parent[s]) {
          route_out->push_back(node_of(s));
          if (s == start) break;
        }
        std::reverse(route_out->begin(), route_out->end());
      }
      return top.cost;
    }
    const int incoming = static_cast<int>(top.state % kStates);
    for (const Edge& e : g.out_edges(n)) {
      const std::size_t next = state_of(e.to, static_cast<int>(e.heading));
      if (closed[next]) continue;
      const Seconds cost = top.cost + step_cost(params_, incoming, e);
      if (cost < best[next]) {
        best[next] = cost;
        if (route_out) parent[next] = top.state;
        open.push({cost + h(e.to), cost, next});
      }
    }
  }
  if (route_out) route_out->clear();
  return std::nullopt;
}

std::optional<Seconds> PathTimeEstimator::path_time(NodeId from, NodeId to) const {
  const std::uint64_t key = (static_cast<std::uint64_t>(from.value()) << 32) | static_cast<std::uint32_t>(to.value());
  if (auto it = pair_memo_.find(key); it != pair_memo_.end()) return it->second;
  const auto t = astar(from, to, std::nullopt, true, nullptr);
  pair_memo_.emplace(key, t);
  return t;
}

std::optional<Seconds> PathTimeEstimator::search(NodeId from, NodeId to, bool use_heuristic) const {
  return astar(from, to, std::nullopt, use_heuristic, nullptr);
}

std::vector<NodeId> PathTimeEstimator::route(NodeId from, NodeId to, std::optional<Heading> heading) const {
  std::vector<NodeId> out;
  astar(from, to, heading, true, &out);
  return out;
}

const std::vector<Seconds>& PathTimeEstimator::times_from(NodeId from) const {
  auto& slot = rows_from_.at(from.index());
  if (slot) return *slot;
  const WaypointGraph& g = *graph_;
  std::vector<Seconds> best(g.size() * kStates, kInf);
  MinQueue open;
  const std::size_t start = state_of(from, kNoHeading);
  best[start] = 0.0;
  open.push({0.0, 0.0, start});
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (top.cost > best[top.state]) continue;
    const int incoming = static_cast<int>(top.state % kStates);
    for (const Edge& e : g.out_edges(node_of(top.state))) {
      const std::size_t next = state_of(e.to, static_cast<int>(e.heading));
      const Seconds cost = top.cost + step_cost(params_, incoming, e);
      if (cost < best[next]) {
        best[next] = cost;
        open.push({cost, cost, next});
      }
    }
  }
  auto row = std::make_unique<std::vector<Seconds>>(g.size(), kInf);
  for (std::size_t s = 0; s < best.size(); ++s) {
    Seconds& cell = (*row)[s / kStates];
    cell = std::min(cell, best[s]);
  }
  slot = std::move(row);
  return *slot;
}

// Backward search. cost_to_go[(u, h)] is the cheapest time from u to the target
// for a robot that arrived at u with heading h; leaving u along edge e costs
// the turn from h to e.heading plus the edge time.
const std::vector<Seconds>& PathTimeEstimator::times_to(NodeId to) const {
  auto& slot = rows_to_.at(to.index());
  if (slot) return *slot;
  const WaypointGraph& g = *graph_;
  std::vector<Seconds> cost(g.size() * kStates, kInf);
  MinQueue open;
  for (int h = 0; h < kStates; ++h) {
    cost[state_of(to, h)] = 0.0;
    open.push({0.0, 0.0, state_of(to, h)});
  }
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (top.cost > cost[top.state]) continue;
    const int arrived_with = static_cast<int>(top.state % kStates);
    if (arrived_with == kNoHeading) continue;  // a start state has no predecessor
    const NodeId v = node_of(top.state);
    for (const Edge& in : g.in_edges(v)) {
      if (static_cast<int>(in.heading) != arrived_with) continue;
      const Edge forward{v, in.length, in.heading};
      for (int h = 0; h < kStates; ++h) {
        const std::size_t prev = state_of(in.to, h);
        const Seconds c = top.cost + step_cost(params_, h, forward);
        if (c < cost[prev]) {
          cost[prev] = c;
          open.push({c, c, prev});
        }
      }
    }
  }
  auto row = std::make_unique<std::vector<Seconds>>(g.size(), kInf);
  for (std::size_t n = 0; n < g.size(); ++n) (*row)[n] = cost[state_of(NodeId{n}, kNoHeading)];
  (*row)[to.index()] = 0.0;
  slot = std::move(row);
  return *slot;
}

Seconds prominence(const World& world, const PathTimeEstimator& paths, LocationId location) {
  const auto picks = world.stations_of(StationKind::Pick);
  if (picks.empty()) throw std::invalid_argument("prominence needs at least one pick station");
  std::optional<Seconds> best;
  for (StationId s : picks) {
    const auto t = paths.path_time(world.location(location).waypoint, world.station(s).waypoint);
    if (t && (!best || *t < *best)) best = t;
  }
  if (!best) throw std::runtime_error(fmt::format("no pick station reachable from location {}", location.value()));
  return *best;
}

ProminenceField compute_prominence_field(const World& world, const PathTimeEstimator& paths) {
  const auto picks = world.stations_of(StationKind::Pick);
  if (picks.empty()) throw std::invalid_argument("prominence needs at least one pick station");
  ProminenceField field;
  field.by_location.assign(world.locations.size(), kInf);
  for (StationId s : picks) {
    const auto& to_station = paths.times_to(world.station(s).waypoint);
    for (const StorageLocation& l : world.locations) {
      Seconds& cell = field.by_location[l.id.index()];
      cell = std::min(cell, to_station[l.waypoint.index()]);
    }
  }
  for (std::size_t i = 0; i < field.by_location.size(); ++i) {
    if (!std::isfinite(field.by_location[i])) {
      throw std::runtime_error(fmt::format("no pick station reachable from location {}", i));
    }
    field.by_location[i] = snap(field.by_location[i]);
  }
  return field;
}

}  // namespace rmfs
