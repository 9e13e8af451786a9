#include "rmfs/graph.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace rmfs {

int quarter_turns(Heading from, Heading to) {
  const int diff = (static_cast<int>(to) - static_cast<int>(from) + 4) % 4;
  return diff == 3 ? 1 : diff;
}

const char* to_string(Heading h) {
  switch (h) {
    case Heading::East: return "E";
    case Heading::North: return "N";
    case Heading::West: return "W";
    case Heading::South: return "S";
  }
  return "?";
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::pair<long, long> WaypointGraph::key(Point p) {
  return {std::lround(p.x * 1000.0), std::lround(p.y * 1000.0)};
}

NodeId WaypointGraph::add_node(Point p, NodeKind kind) {
  const auto k = key(p);
  if (index_.contains(k)) {
    throw std::invalid_argument(fmt::format("duplicate waypoint at ({}, {})", p.x, p.y));
  }
  const NodeId id{positions_.size()};
  positions_.push_back(p);
  kinds_.push_back(kind);
  adjacency_.emplace_back();
  reverse_.emplace_back();
  index_.emplace(k, id);
  return id;
}

void WaypointGraph::add_edge(NodeId from, NodeId to) {
  const Point a = position(from);
  const Point b = position(to);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  Heading h;
  if (dy == 0.0 && dx > 0.0) {
    h = Heading::East;
  } else if (dy == 0.0 && dx < 0.0) {
    h = Heading::West;
  } else if (dx == 0.0 && dy > 0.0) {
    h = Heading::North;
  } else if (dx == 0.0 && dy < 0.0) {
    h = Heading::South;
  } else {
    throw std::invalid_argument(
        fmt::format("edge ({},{})->({},{}) is not axis-aligned", a.x, a.y, b.x, b.y));
  }
  if (has_edge(from, to)) return;
  const double len = std::abs(dx) + std::abs(dy);
  adjacency_[from.index()].push_back(Edge{to, len, h});
  reverse_[to.index()].push_back(Edge{from, len, h});
}

void WaypointGraph::add_two_way(NodeId a, NodeId b) {
  add_edge(a, b);
  add_edge(b, a);
}

bool WaypointGraph::has_edge(NodeId from, NodeId to) const {
  for (const Edge& e : adjacency_[from.index()]) {
    if (e.to == to) return true;
  }
  return false;
}

std::optional<NodeId> WaypointGraph::find(Point p) const {
  const auto it = index_.find(key(p));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

template <class Next>
std::vector<bool> bfs(const WaypointGraph& g, NodeId start, Next&& next) {
  std::vector<bool> seen(g.size(), false);
  std::queue<NodeId> open;
  seen[start.index()] = true;
  open.push(start);
  while (!open.empty()) {
    const NodeId n = open.front();
    open.pop();
    for (const Edge& e : next(n)) {
      if (!seen[e.to.index()]) {
        seen[e.to.index()] = true;
        open.push(e.to);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<bool> reachable_from(const WaypointGraph& g, NodeId start) {
  return bfs(g, start, [&](NodeId n) { return g.out_edges(n); });
}

std::vector<bool> reaching_to(const WaypointGraph& g, NodeId target) {
  return bfs(g, target, [&](NodeId n) { return g.in_edges(n); });
}

bool strongly_connected(const WaypointGraph& g) {
  if (g.size() == 0) return true;
  const NodeId root{0};
  const auto fwd = reachable_from(g, root);
  const auto bwd = reaching_to(g, root);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!fwd[i] || !bwd[i]) return false;
  }
  return true;
}

}  // namespace rmfs
