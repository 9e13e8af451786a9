#include <doctest.h>

#include <algorithm>
#include <set>

#include "rmfs/policies.hpp"
#include "support.hpp"

using namespace rmfs;

namespace {

struct Masks {
  std::vector<std::uint8_t> free;
  std::vector<std::uint8_t> movable;
};

Masks masks(const World& w) { return {unoccupied_locations(w), stored_pods(w)}; }

PolicyView view_of(const testing::FrozenWorld& f, const Masks& m) {
  return PolicyView{*f.world, *f.paths, f.ranks, f.cache, f.scores, m.free, m.movable};
}

PodScores plain_scores(std::vector<double> combined) {
  PodScores s;
  s.combined = std::move(combined);
  s.speed.assign(s.combined.size(), 0.0);
  s.utility.assign(s.combined.size(), 0.0);
  return s;
}

}  // namespace

TEST_CASE("mechanism labels") {
  CHECK(MechanismConfig::parse("N-U").label() == "N-U");
  CHECK(MechanismConfig::parse("C-C").active == ActiveMechanism::Cache);
  CHECK(MechanismConfig::parse("U-none").active == ActiveMechanism::None);
  CHECK_THROWS_WITH_AS(MechanismConfig::parse("N-N"), doctest::Contains("Nearest has no active variant"),
                       std::invalid_argument);
  CHECK_THROWS(MechanismConfig::parse("X-U"));
  CHECK_THROWS(MechanismConfig::parse("NU"));
}

TEST_CASE("desired ranks spread pods over ranks by score") {
  CHECK(desired_ranks(plain_scores({9, 7, 5, 3}), 2) == std::vector<int>{1, 1, 2, 2});
  CHECK(desired_ranks(plain_scores({3, 5, 7, 9}), 2) == std::vector<int>{2, 2, 1, 1});
  // Equal scores: id order decides, ranks are covered proportionally.
  CHECK(desired_ranks(plain_scores({1, 1, 1, 1, 1, 1}), 3) == std::vector<int>{1, 1, 2, 2, 3, 3});
  testing::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(testing::uniform_int(rng, 1, 30)));
    for (double& x : s) x = testing::uniform_int(rng, 0, 5);
    const PodScores ps = plain_scores(s);
    const int max_rank = testing::uniform_int(rng, 1, 12);
    const auto all = desired_ranks(ps, max_rank);
    const auto best = std::max_element(s.begin(), s.end()) - s.begin();
    CHECK(all[static_cast<std::size_t>(best)] == 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(desired_rank(PodId(i), ps, max_rank) == all[i]);
      CHECK(all[i] >= 1);
      CHECK(all[i] <= max_rank);
    }
  }
}

TEST_CASE("cache threshold is the capacity-matched quantile") {
  const std::vector<double> s{0.3, 0.9, 0.1, 0.7, 0.5, 0.2, 0.8, 0.4};
  CHECK(compute_cache_threshold(s, 2) == 0.8);
  CHECK(compute_cache_threshold(s, 8) == 0.1);
  CHECK(compute_cache_threshold(s, 50) == 0.1);
  CHECK(compute_cache_threshold(std::vector<double>{0.4, 0.4, 0.4}, 1) == 0.4);
}

TEST_CASE("cache set is the most prominent quarter") {
  testing::Rng rng(1);
  const testing::FrozenWorld f = testing::frozen_world(rng, 10, 8, 10);
  const std::size_t n = f.world->locations.size();
  CHECK(f.cache.size() == static_cast<std::size_t>(std::lround(0.25 * static_cast<double>(n))));
  const auto again = build_cache_set(f.ranks, 0.25);
  CHECK(again.locations == f.cache.locations);
  std::set<int> in;
  for (LocationId l : f.cache.locations) in.insert(l.value());
  for (const RankEntry& e : f.ranks.entries) {
    if (!f.cache.contains(e.location)) {
      for (LocationId c : f.cache.locations) CHECK(f.ranks.rank(c) <= e.rank);
    }
  }
  CHECK(in.size() == f.cache.size());
}

TEST_CASE("nearest placement is the exhaustive argmin") {
  testing::Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    testing::FrozenWorld f = testing::frozen_world(rng, testing::uniform_int(rng, 5, 22), 6, 8);
    World& w = *f.world;
    // Take one pod off the floor as if it were coming back from a station.
    const PodId pod(static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(w.pods.size()) - 1)));
    w.release_pod(pod, CarriedBy{RobotId(0)});
    const Masks m = masks(w);
    const NodeId release = w.stations[0].waypoint;
    const LocationId got = choose_passive_location(MechanismConfig::parse("N-none"), pod, release, view_of(f, m));
    CHECK(m.free[got.index()]);
    for (const StorageLocation& l : w.locations) {
      if (m.free[l.id.index()]) CHECK(*f.paths->path_time(release, w.location(got).waypoint) <=
                                      *f.paths->path_time(release, l.waypoint) + 1e-12);
    }
  }
}

TEST_CASE("nearest placement with one free location returns it") {
  testing::Rng rng(4);
  testing::FrozenWorld f = testing::frozen_world(rng, 31, 5, 5);
  World& w = *f.world;
  REQUIRE(w.locations.size() == 32);
  Masks m = masks(w);
  const auto free = std::find(m.free.begin(), m.free.end(), 1) - m.free.begin();
  CHECK(choose_passive_location(MechanismConfig::parse("N-none"), PodId(0), w.stations[0].waypoint, view_of(f, m)) ==
        LocationId(static_cast<std::size_t>(free)));
  m.free.assign(m.free.size(), 0);
  CHECK_THROWS(choose_passive_location(MechanismConfig::parse("N-none"), PodId(0), w.stations[0].waypoint,
                                       view_of(f, m)));
}

TEST_CASE("cache placement sends qualifying pods into the cache while it has room") {
  testing::Rng rng(12);
  testing::FrozenWorld f = testing::frozen_world(rng, 6, 6, 10);
  World& w = *f.world;
  const auto best = PodId(static_cast<std::size_t>(
      std::max_element(f.scores.combined.begin(), f.scores.combined.end()) - f.scores.combined.begin()));
  w.release_pod(best, CarriedBy{RobotId(0)});
  const Masks m = masks(w);
  const LocationId got =
      choose_passive_location(MechanismConfig::parse("C-none"), best, w.stations[0].waypoint, view_of(f, m));
  CHECK(f.cache.contains(got));
}

TEST_CASE("utility placement stays close to the desired rank") {
  testing::Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    testing::FrozenWorld f = testing::frozen_world(rng, 16, 6, 10);
    World& w = *f.world;
    const PodId pod(static_cast<std::size_t>(testing::uniform_int(rng, 0, 15)));
    w.release_pod(pod, CarriedBy{RobotId(0)});
    const Masks m = masks(w);
    const LocationId got =
        choose_passive_location(MechanismConfig::parse("U-none"), pod, w.stations[0].waypoint, view_of(f, m));
    const int want = desired_rank(pod, f.scores, f.ranks.max_rank);
    int closest = 1 << 20;
    for (const StorageLocation& l : w.locations) {
      if (m.free[l.id.index()]) closest = std::min(closest, std::abs(f.ranks.rank(l.id) - want));
    }
    CHECK(std::abs(f.ranks.rank(got) - want) <= std::max(closest, 1));
  }
}

TEST_CASE("utility moves stop on a matched inventory") {
  testing::Rng rng(21);
  testing::FrozenWorld f = testing::frozen_world(rng, 12, 6, 10);
  const auto mech = MechanismConfig::parse("N-U");
  for (int step = 0; step < 500; ++step) {
    const Masks m = masks(*f.world);
    const auto move = next_active_move(mech, view_of(f, m));
    if (!move) break;
    testing::move_pod(*f.world, move->pod, move->to);
  }
  const Masks m = masks(*f.world);
  CHECK_FALSE(next_active_move(mech, view_of(f, m)));
  CHECK_FALSE(next_active_move(MechanismConfig::parse("N-none"), view_of(f, m)));
}

TEST_CASE("utility move picks the pod with the largest rank difference") {
  // Three pods with desired ranks 1, 2, 3 sitting at ranks 3, 2, 1.
  testing::Rng rng(5);
  testing::FrozenWorld f = testing::frozen_world(rng, 3, 4, 4);
  World& w = *f.world;
  std::vector<std::vector<LocationId>> by_rank(static_cast<std::size_t>(f.ranks.max_rank) + 1);
  for (const RankEntry& e : f.ranks.entries) by_rank[static_cast<std::size_t>(e.rank)].push_back(e.location);
  REQUIRE(f.ranks.max_rank >= 3);
  f.scores = plain_scores({3.0, 2.0, 1.0});
  // Three ranks only: ranks beyond 3 are out of play.
  RankTable three = f.ranks;
  for (RankEntry& e : three.entries) e.rank = std::min(e.rank, 3);
  for (int& r : three.rank_of) r = std::min(r, 3);
  three.max_rank = 3;
  f.ranks = three;
  for (const Pod& p : w.pods) w.release_pod(p.id, CarriedBy{RobotId(0)});
  w.store_pod(PodId(0), by_rank[3][0]);
  w.store_pod(PodId(1), by_rank[2][0]);
  w.store_pod(PodId(2), by_rank[1][0]);
  const Masks m = masks(w);
  CHECK(desired_ranks(f.scores, 3) == std::vector<int>{1, 2, 3});
  const auto move = next_active_move(MechanismConfig::parse("N-U"), view_of(f, m));
  REQUIRE(move);
  CHECK((move->pod == PodId(0) || move->pod == PodId(2)));
  CHECK(std::abs(f.ranks.rank(move->from) - desired_ranks(f.scores, 3)[move->pod.index()]) == 2);
}

TEST_CASE("utility moves strictly reduce the rank mismatch until none is left") {
  testing::Rng rng(2025);
  const auto mech = MechanismConfig::parse("U-U");
  for (int trial = 0; trial < 50; ++trial) {
    testing::FrozenWorld f = testing::frozen_world(rng, testing::uniform_int(rng, 2, 30), 8, 12);
    const auto desired = desired_ranks(f.scores, f.ranks.max_rank);
    long before = rank_mismatch(*f.world, f.ranks, desired);
    const long bound = before + 1;
    long steps = 0;
    for (;; ++steps) {
      REQUIRE(steps <= bound);
      const Masks m = masks(*f.world);
      const auto move = next_active_move(mech, view_of(f, m));
      if (!move) break;
      testing::move_pod(*f.world, move->pod, move->to);
      const long after = rank_mismatch(*f.world, f.ranks, desired);
      CHECK(after < before);
      before = after;
    }
  }
}

TEST_CASE("cache moves fill the cache with qualifying pods and then stop") {
  testing::Rng rng(31);
  const auto mech = MechanismConfig::parse("C-C");
  for (int trial = 0; trial < 30; ++trial) {
    testing::FrozenWorld f = testing::frozen_world(rng, testing::uniform_int(rng, 4, 28), 8, 12);
    int steps = 0;
    for (; steps < 200; ++steps) {
      const Masks m = masks(*f.world);
      const auto move = next_active_move(mech, view_of(f, m));
      if (!move) break;
      CHECK(m.free[move->to.index()]);
      testing::move_pod(*f.world, move->pod, move->to);
    }
    CHECK(steps < 200);
    // Once stable, no qualifying pod waits outside while the cache has room
    // or holds a weaker pod.
    const World& w = *f.world;
    bool cache_room = false;
    double weakest_inside = std::numeric_limits<double>::infinity();
    double strongest_outside = -1.0;
    for (LocationId l : f.cache.locations) {
      if (!w.location(l).occupant) cache_room = true;
    }
    for (const Pod& p : w.pods) {
      const double s = f.scores[p.id];
      if (f.cache.contains(*p.location())) {
        if (s < f.cache.threshold) weakest_inside = std::min(weakest_inside, s);
      } else if (s >= f.cache.threshold) {
        strongest_outside = std::max(strongest_outside, s);
      }
    }
    if (strongest_outside >= 0) {
      CHECK_FALSE(cache_room);
      CHECK(strongest_outside <= weakest_inside);
    }
  }
}
