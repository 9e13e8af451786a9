#include "rmfs/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace rmfs {

void KinematicsConfig::validate() const {
  if (!(max_speed > 0.0 && acceleration > 0.0 && deceleration > 0.0 && turn_time_90 > 0.0)) {
    throw std::invalid_argument("kinematics: max speed, acceleration, deceleration and turn time must be positive");
  }
  if (lift_time < 0.0) throw std::invalid_argument("kinematics: lift time must be non-negative");
}

namespace {

struct Profile {
  double peak;    // highest speed reached
  double accel;   // distance spent accelerating
  double cruise;  // distance at peak speed
};

Profile profile(double length, const KinematicsConfig& k) {
  const double a = k.acceleration;
  const double d = k.deceleration;
  double peak = k.max_speed;
  if (peak * peak / (2 * a) + peak * peak / (2 * d) > length) peak = std::sqrt(2 * length * a * d / (a + d));
  const double up = peak * peak / (2 * a);
  const double down = peak * peak / (2 * d);
  return {peak, up, std::max(0.0, length - up - down)};
}

}  // namespace

Seconds straight_run_time(double length, const KinematicsConfig& k) {
  if (length <= 0.0) return 0.0;
  const Profile p = profile(length, k);
  return p.peak / k.acceleration + p.cruise / p.peak + p.peak / k.deceleration;
}

Seconds time_at_distance(double x, double length, const KinematicsConfig& k) {
  if (length <= 0.0 || x <= 0.0) return 0.0;
  if (x >= length) return straight_run_time(length, k);
  const Profile p = profile(length, k);
  if (x <= p.accel) return std::sqrt(2 * x / k.acceleration);
  if (x <= p.accel + p.cruise) return p.peak / k.acceleration + (x - p.accel) / p.peak;
  return straight_run_time(length, k) - std::sqrt(2 * (length - x) / k.deceleration);
}

MotionPlan plan_motion(const WaypointGraph& graph, std::span<const NodeId> path, std::optional<Heading> heading,
                       const KinematicsConfig& k) {
  MotionPlan plan;
  if (path.empty()) return plan;
  plan.arrival.assign(path.size(), 0.0);
  plan.final_heading = heading.value_or(Heading::North);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto out = graph.out_edges(path[i]);
    const auto it = std::find_if(out.begin(), out.end(), [&](const Edge& e) { return e.to == path[i + 1]; });
    if (it == out.end()) {
      throw std::invalid_argument(fmt::format("no edge from node {} to node {}", path[i].value(), path[i + 1].value()));
    }
    edges.push_back(*it);
  }

  Seconds t = 0.0;
  std::optional<Heading> facing = heading;
  std::size_t i = 0;
  while (i < edges.size()) {
    if (facing) t += quarter_turns(*facing, edges[i].heading) * k.turn_time_90;
    std::size_t j = i;
    double run = 0.0;
    while (j < edges.size() && edges[j].heading == edges[i].heading) run += edges[j++].length;
    double covered = 0.0;
    for (std::size_t e = i; e < j; ++e) {
      covered += edges[e].length;
      plan.arrival[e + 1] = t + time_at_distance(covered, run, k);
    }
    t += straight_run_time(run, k);
    plan.distance += run;
    facing = edges[i].heading;
    i = j;
  }
  if (facing) plan.final_heading = *facing;
  return plan;
}

}  // namespace rmfs
