#include <doctest.h>

#include <cmath>

#include "rmfs/kinematics.hpp"
#include "rmfs/path_time.hpp"
#include "rmfs/scoring.hpp"
#include "support.hpp"

using namespace rmfs;

TEST_CASE("path time to self is zero") {
  const World w = generate_layout(*LayoutSpec::builtin("Small"));
  const PathTimeEstimator est(w.graph);
  for (std::size_t i = 0; i < w.graph.size(); i += 97) CHECK(est.path_time(NodeId(i), NodeId(i)) == 0.0);
}

TEST_CASE("3x3 grid charges the fewest turns among shortest routes") {
  WaypointGraph g;
  NodeId n[3][3];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) n[r][c] = g.add_node({double(c), double(r)}, NodeKind::Aisle);
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (c < 2) g.add_two_way(n[r][c], n[r][c + 1]);
      if (r < 2) g.add_two_way(n[r][c], n[r + 1][c]);
    }
  }
  const PathTimeEstimator est(g, {.cruise_speed = 1.0, .turn_penalty = 2.0});
  // 4 m with one turn beats 4 m with three turns (4 + 6 = 10 s).
  CHECK(*est.path_time(n[0][0], n[2][2]) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(*est.search(n[0][0], n[2][2], false) == doctest::Approx(6.0).epsilon(1e-12));
  const auto route = est.route(n[0][0], n[2][2], std::nullopt);
  REQUIRE(route.size() == 5);
}

TEST_CASE("turn-free path time equals turn-blind shortest path on random grids") {
  testing::Rng rng(20240);
  for (int trial = 0; trial < 20; ++trial) {
    const WaypointGraph g = testing::random_grid(rng, testing::uniform_int(rng, 2, 8),
                                                 testing::uniform_int(rng, 2, 8), 1.0 + trial * 0.1, 0.8, 0.3);
    const PathTimeEstimator est(g, {.cruise_speed = 1.3, .turn_penalty = 0.0});
    for (int q = 0; q < 10; ++q) {
      const NodeId a(static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(g.size()) - 1)));
      const NodeId b(static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(g.size()) - 1)));
      const double oracle = testing::label_correcting(g, a, 1.3)[b.index()];
      const auto got = est.path_time(a, b);
      if (std::isinf(oracle)) {
        CHECK_FALSE(got);
      } else {
        REQUIRE(got);
        CHECK(std::abs(*got - oracle) <= 1e-9);
      }
    }
  }
}

TEST_CASE("turn penalty never shortens a route and A* agrees with Dijkstra") {
  testing::Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const WaypointGraph g = testing::random_grid(rng, 6, 6, 1.0, 0.85, 0.2);
    const PathTimeEstimator turns(g, {.cruise_speed = 1.5, .turn_penalty = 2.5});
    const PathTimeEstimator flat(g, {.cruise_speed = 1.5, .turn_penalty = 0.0});
    for (int q = 0; q < 10; ++q) {
      const NodeId a(static_cast<std::size_t>(testing::uniform_int(rng, 0, 35)));
      const NodeId b(static_cast<std::size_t>(testing::uniform_int(rng, 0, 35)));
      const auto t = turns.path_time(a, b);
      const auto d = turns.search(a, b, false);
      REQUIRE(t.has_value() == d.has_value());
      if (!t) continue;
      CHECK(std::abs(*t - *d) <= 1e-9);
      CHECK(*t >= *flat.path_time(a, b) - 1e-12);
      CHECK(std::abs(turns.times_from(a)[b.index()] - *t) <= 1e-9);
      CHECK(std::abs(turns.times_to(b)[a.index()] - *t) <= 1e-9);
    }
  }
}

TEST_CASE("prominence is the minimum over pick stations") {
  const World w = generate_layout(*LayoutSpec::builtin("Small"));
  const PathTimeEstimator est(w.graph);
  const ProminenceField field = compute_prominence_field(w, est);
  REQUIRE(field.size() == w.locations.size());
  const PathTimeEstimator fresh(w.graph);
  for (const StorageLocation& l : w.locations) {
    double best = std::numeric_limits<double>::infinity();
    for (StationId s : w.stations_of(StationKind::Pick)) {
      best = std::min(best, *fresh.search(l.waypoint, w.station(s).waypoint, false));
    }
    CHECK(std::abs(field[l.id] - best) <= 1e-8);
  }
  CHECK(compute_prominence_field(w, est).by_location == field.by_location);
}

TEST_CASE("ranks follow prominence") {
  const World w = generate_layout(*LayoutSpec::builtin("Small"));
  const PathTimeEstimator est(w.graph);
  const ProminenceField field = compute_prominence_field(w, est);
  const RankTable ranks = compute_ranks(field);
  for (const StorageLocation& a : w.locations) {
    for (const StorageLocation& b : w.locations) {
      if (field[a.id] < field[b.id]) CHECK(ranks.rank(a.id) < ranks.rank(b.id));
      if (field[a.id] == field[b.id]) CHECK(ranks.rank(a.id) == ranks.rank(b.id));
    }
  }
}

// -- kinematics -------------------------------------------------------------

TEST_CASE("trapezoidal run") {
  const KinematicsConfig k;
  // 3 s to reach 1.5 m/s over 2.25 m, the same to stop, cruise the rest.
  const double expected = 2 * (1.5 / 0.5) + (10 - 2 * 2.25) / 1.5;
  CHECK(straight_run_time(10.0, k) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(9.6667).epsilon(1e-4));
}

TEST_CASE("triangular run") {
  const KinematicsConfig k;
  for (double len : {0.5, 1.0, 2.0, 4.5}) {
    CHECK(straight_run_time(len, k) == doctest::Approx(2 * std::sqrt(len / 0.5)).epsilon(1e-12));
  }
  CHECK(straight_run_time(0.0, k) == 0.0);
}

TEST_CASE("time at distance is monotone and hits the run time at the end") {
  const KinematicsConfig k;
  for (double len : {1.0, 4.5, 10.0, 37.0}) {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double t = time_at_distance(len * i / 100.0, len, k);
      CHECK(t > prev);
      prev = t;
    }
    CHECK(time_at_distance(len, len, k) == doctest::Approx(straight_run_time(len, k)).epsilon(1e-12));
  }
}

TEST_CASE("motion plan stops and turns at corners") {
  WaypointGraph g;
  const NodeId a = g.add_node({0, 0}, NodeKind::Aisle);
  const NodeId b = g.add_node({10, 0}, NodeKind::Aisle);
  const NodeId c = g.add_node({10, 2}, NodeKind::Aisle);
  g.add_two_way(a, b);
  g.add_two_way(b, c);
  const KinematicsConfig k;
  const std::vector<NodeId> path{a, b, c};
  const MotionPlan plan = plan_motion(g, path, std::nullopt, k);
  CHECK(plan.distance == doctest::Approx(12.0));
  CHECK(plan.duration() == doctest::Approx(straight_run_time(10, k) + 2.5 + straight_run_time(2, k)).epsilon(1e-12));
  // Facing west at the start costs a reversal before the first run.
  const MotionPlan turned = plan_motion(g, path, Heading::West, k);
  CHECK(turned.duration() == doctest::Approx(plan.duration() + 5.0).epsilon(1e-12));
  const std::vector<NodeId> single{a};
  CHECK(plan_motion(g, single, std::nullopt, k).duration() == 0.0);
  const std::vector<NodeId> broken{a, c};
  CHECK_THROWS(plan_motion(g, broken, std::nullopt, k));
}
