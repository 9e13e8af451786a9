#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rmfs/ids.hpp"

namespace rmfs {

enum class Heading : std::uint8_t { East = 0, North = 1, West = 2, South = 3 };

/// Number of 90 degree rotations needed to go from one heading to another
/// (0, 1 or 2; a reversal counts as two).
int quarter_turns(Heading from, Heading to);

const char* to_string(Heading h);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

enum class NodeKind : std::uint8_t { Aisle, Storage, Queue, Station };

struct Edge {
  NodeId to;
  double length = 0.0;
  Heading heading = Heading::East;
};

// Directed graph of waypoints. Edges are axis-aligned so every traversal has
// a well-defined cardinal heading.
class WaypointGraph {
 public:
  NodeId add_node(Point p, NodeKind kind);
  void add_edge(NodeId from, NodeId to);
  void add_two_way(NodeId a, NodeId b);

  std::size_t size() const { return positions_.size(); }
  Point position(NodeId n) const { return positions_[n.index()]; }
  NodeKind kind(NodeId n) const { return kinds_[n.index()]; }
  std::span<const Edge> out_edges(NodeId n) const { return adjacency_[n.index()]; }
  std::span<const Edge> in_edges(NodeId n) const { return reverse_[n.index()]; }
  bool has_edge(NodeId from, NodeId to) const;
  std::optional<NodeId> find(Point p) const;

 private:
  static std::pair<long, long> key(Point p);

  std::vector<Point> positions_;
  std::vector<NodeKind> kinds_;
  std::vector<std::vector<Edge>> adjacency_;
  // in_edges(v) stores edges u->v with `to` set to u; heading is still u->v.
  std::vector<std::vector<Edge>> reverse_;
  std::map<std::pair<long, long>, NodeId> index_;
};

std::vector<bool> reachable_from(const WaypointGraph& g, NodeId start);
std::vector<bool> reaching_to(const WaypointGraph& g, NodeId target);
bool strongly_connected(const WaypointGraph& g);

}  // namespace rmfs
