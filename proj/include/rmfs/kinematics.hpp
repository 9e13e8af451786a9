#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rmfs/graph.hpp"

namespace rmfs {

struct KinematicsConfig {
  double max_speed = 1.5;     // m/s
  double acceleration = 0.5;  // m/s^2
  double deceleration = 0.5;  // m/s^2
  Seconds turn_time_90 = 2.5;
  Seconds lift_time = 1.0;  // lifting or setting down a pod

  void validate() const;
  friend bool operator==(const KinematicsConfig&, const KinematicsConfig&) = default;
};

/// Time for a straight run of `length` metres that starts and ends at rest:
/// trapezoidal when the run is long enough to reach max speed, triangular otherwise.
Seconds straight_run_time(double length, const KinematicsConfig& k);

/// Time at which a robot on such a run has covered `x` metres (0 <= x <= length).
Seconds time_at_distance(double x, double length, const KinematicsConfig& k);

struct MotionPlan {
  std::vector<Seconds> arrival;  // offset at which each path node is reached; arrival[0] = 0
  Heading final_heading = Heading::North;
  double distance = 0.0;
  Seconds duration() const { return arrival.empty() ? 0.0 : arrival.back(); }
};

/// Unobstructed timing of a robot following `path` from rest. The path is cut
/// into straight runs; the robot stops at every corner and turns there at
/// turn_time_90 per quarter turn. With `heading` set, an initial turn onto the
/// first edge is charged as well. Throws when consecutive nodes are not joined
/// by an edge.
MotionPlan plan_motion(const WaypointGraph& graph, std::span<const NodeId> path, std::optional<Heading> heading,
                       const KinematicsConfig& k);

}  // namespace rmfs
