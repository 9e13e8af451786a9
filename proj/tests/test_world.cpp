#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "rmfs/world.hpp"
#include "support.hpp"

using namespace rmfs;

namespace {

// Counts storage locations by walking the block rule directly: the storage
// area is split by H horizontal and V vertical aisles into (H+1) x (V+1)
// blocks, each 2 rows by 4 columns of locations.
int count_locations_by_blocks(int aisles_h, int aisles_v) {
  int n = 0;
  for (int br = 0; br <= aisles_h; ++br) {
    for (int bc = 0; bc <= aisles_v; ++bc) {
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) ++n;
      }
    }
  }
  return n;
}

}  // namespace

TEST_CASE("small layout has the documented stations and pods") {
  const World w = generate_layout(*LayoutSpec::builtin("Small"));
  CHECK(w.stations.size() == 8);
  CHECK(w.pods.size() == 673);
  CHECK(w.stations_of(StationKind::Pick).size() == 4);
  CHECK(w.stations_of(StationKind::Replenish).size() == 4);
  CHECK(placement_violations(w) == 0);
}

TEST_CASE("storage location count matches the block rule") {
  for (const LayoutSpec& s : LayoutSpec::builtins()) {
    CAPTURE(s.name);
    const World w = generate_layout(s);
    const int oracle = count_locations_by_blocks(s.aisles_horizontal, s.aisles_vertical);
    CHECK(static_cast<int>(w.locations.size()) == oracle);
    CHECK(storage_location_count(s) == oracle);
    CHECK(oracle >= s.pods);
  }
  CHECK(count_locations_by_blocks(8, 10) == 792);
}

TEST_CASE("layout without pods leaves every location empty") {
  LayoutSpec s = *LayoutSpec::builtin("Small");
  s.pods = 0;
  const World w = generate_layout(s);
  CHECK(w.pods.empty());
  for (const StorageLocation& l : w.locations) CHECK_FALSE(l.occupant);
  CHECK(fill_level(w) == 0.0);
}

TEST_CASE("waypoint graph of every built-in layout is strongly connected") {
  for (const LayoutSpec& s : LayoutSpec::builtins()) {
    CAPTURE(s.name);
    CHECK(strongly_connected(generate_layout(s).graph));
  }
}

TEST_CASE("demand sums open order lines per sku") {
  World w = generate_layout(testing::tiny_layout(4));
  w.set_catalog(SkuCatalog::uniform(5));
  CHECK(w.demand(3) == 0);
  CHECK(w.backlog() == 0);
  w.add_customer_order({{3, 2}}, 0.0);
  w.add_customer_order({{3, 5}}, 0.0);
  CHECK(w.demand(3) == 7);
  CHECK(w.backlog() == 2);
}

TEST_CASE("completed orders carry no demand") {
  World w = generate_layout(testing::tiny_layout(2));
  w.set_catalog(SkuCatalog::uniform(5));
  w.pods[0].inventory.add(1, 3);
  const OrderId o = w.add_customer_order({{1, 2}}, 0.0);
  w.add_customer_order({{1, 4}}, 0.0);
  CHECK_FALSE(w.pick_unit(o, 0, PodId(0), 5.0));
  CHECK(w.demand(1) == 5);
  CHECK(w.pick_unit(o, 0, PodId(0), 6.0));
  CHECK(w.demand(1) == 4);
  CHECK(w.backlog() == 1);
  CHECK(w.pods[0].inventory.count(1) == 1);
}

TEST_CASE("fill level") {
  World w = generate_layout(testing::tiny_layout(2), LayoutOptions{.pod_capacity = 10});
  w.set_catalog(SkuCatalog::uniform(3));
  CHECK(fill_level(w) == 0.0);
  w.pods[0].inventory.add(0, 5);
  w.pods[1].inventory.add(2, 10);
  CHECK(fill_level(w) == doctest::Approx(0.75).epsilon(1e-12));
  w.pods[0].inventory.add(1, 5);
  CHECK(fill_level(w) == 1.0);
}

TEST_CASE("initial fill reaches the target without overfilling") {
  testing::Rng rng(7);
  World w = generate_layout(*LayoutSpec::builtin("Small"), LayoutOptions{.pod_capacity = 200});
  w.set_catalog(SkuCatalog::uniform(100));
  fill_initial_inventory(w, 0.75, 10, rng);
  CHECK(fill_level(w) >= 0.75 - 1e-9);
  CHECK(fill_level(w) <= 0.75 + 10.0 / static_cast<double>(w.total_capacity()) + 1e-9);
  for (const Pod& p : w.pods) CHECK(p.free_capacity() >= 0);
}

TEST_CASE("catalog weights are normalized") {
  testing::Rng rng(3);
  const SkuCatalog c = draw_catalog(1000, 1.0, 2.0, rng);
  CHECK(c.size() == 1000);
  CHECK(std::accumulate(c.frequency.begin(), c.frequency.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("sampled sku frequencies follow the catalog") {
  testing::Rng rng(11);
  const SkuCatalog c = draw_catalog(200, 1.0, 2.0, rng);
  std::discrete_distribution<SkuId> dist(c.frequency.begin(), c.frequency.end());
  std::vector<double> hits(c.size(), 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) hits[static_cast<std::size_t>(dist(rng))] += 1.0;

  // Pearson correlation between empirical and drawn frequencies.
  const double n = static_cast<double>(c.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    mx += hits[i] / draws;
    my += c.frequency[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double dx = hits[i] / draws - mx;
    const double dy = c.frequency[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  CHECK(sxy / std::sqrt(sxx * syy) > 0.99);
}

TEST_CASE("equal weights give a uniform sku histogram") {
  testing::Rng rng(5);
  const SkuCatalog c = SkuCatalog::uniform(50);
  std::discrete_distribution<SkuId> dist(c.frequency.begin(), c.frequency.end());
  std::vector<int> hits(c.size(), 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++hits[static_cast<std::size_t>(dist(rng))];
  const double mean = static_cast<double>(draws) / 50.0;
  const double sigma = std::sqrt(draws * (1.0 / 50.0) * (49.0 / 50.0));
  // 3 sigma per bin, with a little room for the multiple comparisons.
  for (int h : hits) CHECK(std::abs(h - mean) <= 4.0 * sigma);
}

TEST_CASE("placement changes keep locations and pods consistent") {
  testing::Rng rng(2);
  World w = generate_layout(testing::tiny_layout(10));
  for (int step = 0; step < 200; ++step) {
    const PodId p(static_cast<std::size_t>(testing::uniform_int(rng, 0, 9)));
    std::vector<LocationId> free;
    for (const StorageLocation& l : w.locations) {
      if (!l.occupant) free.push_back(l.id);
    }
    const LocationId to = free[static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(free.size()) - 1))];
    testing::move_pod(w, p, to);
    REQUIRE(placement_violations(w) == 0);
  }
  std::set<int> occupied;
  for (const Pod& p : w.pods) occupied.insert(p.location()->value());
  CHECK(occupied.size() == 10);
}
