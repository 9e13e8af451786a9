// Shared generators and independent oracles for the test binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "rmfs/graph.hpp"
#include "rmfs/path_time.hpp"
#include "rmfs/policies.hpp"
#include "rmfs/scoring.hpp"
#include "rmfs/world.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Grid of rows x cols nodes with the given spacing. Each undirected link is
// kept with probability `keep`; kept links are two-way or, with probability
// `one_way`, directed at random.
inline rmfs::WaypointGraph random_grid(Rng& rng, int rows, int cols, double spacing, double keep, double one_way) {
  rmfs::WaypointGraph g;
  std::vector<rmfs::NodeId> id(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      id[static_cast<std::size_t>(r * cols + c)] = g.add_node({c * spacing, r * spacing}, rmfs::NodeKind::Aisle);
    }
  }
  const auto link = [&](rmfs::NodeId a, rmfs::NodeId b) {
    if (uniform_real(rng, 0, 1) >= keep) return;
    if (uniform_real(rng, 0, 1) < one_way) {
      if (uniform_int(rng, 0, 1)) std::swap(a, b);
      g.add_edge(a, b);
    } else {
      g.add_two_way(a, b);
    }
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto here = id[static_cast<std::size_t>(r * cols + c)];
      if (c + 1 < cols) link(here, id[static_cast<std::size_t>(r * cols + c + 1)]);
      if (r + 1 < rows) link(here, id[static_cast<std::size_t>((r + 1) * cols + c)]);
    }
  }
  return g;
}

// Turn-blind shortest travel times from `src` by FIFO label correction.
inline std::vector<double> label_correcting(const rmfs::WaypointGraph& g, rmfs::NodeId src, double speed) {
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  std::vector<char> queued(g.size(), 0);
  std::deque<rmfs::NodeId> queue{src};
  dist[src.index()] = 0.0;
  queued[src.index()] = 1;
  while (!queue.empty()) {
    const rmfs::NodeId u = queue.front();
    queue.pop_front();
    queued[u.index()] = 0;
    for (const rmfs::Edge& e : g.out_edges(u)) {
      const double d = dist[u.index()] + e.length / speed;
      if (d < dist[e.to.index()]) {
        dist[e.to.index()] = d;
        if (!queued[e.to.index()]) {
          queued[e.to.index()] = 1;
          queue.push_back(e.to);
        }
      }
    }
  }
  return dist;
}

// Every ordered pair of occupied locations, counted directly.
inline rmfs::WellSortednessReport naive_well_sortedness(const std::vector<int>& rank,
                                                        const std::vector<std::optional<double>>& score) {
  rmfs::WellSortednessReport r;
  for (std::size_t i = 0; i < rank.size(); ++i) {
    for (std::size_t j = 0; j < rank.size(); ++j) {
      if (!score[i] || !score[j]) continue;
      if (rank[i] < rank[j] && *score[i] < *score[j]) {
        ++r.misplacements;
        r.offset_sum += rank[j] - rank[i];
      }
    }
  }
  r.average = r.misplacements == 0 ? 0.0 : static_cast<double>(r.offset_sum) / static_cast<double>(r.misplacements);
  return r;
}

// A small stocked world with open orders, and everything a policy decision
// reads. Nothing changes unless the test changes it.
struct FrozenWorld {
  std::unique_ptr<rmfs::World> world;
  std::unique_ptr<rmfs::PathTimeEstimator> paths;
  rmfs::RankTable ranks;
  rmfs::CacheSet cache;
  rmfs::PodScores scores;

  void rescore(const rmfs::ScoringWeights& w = {}) {
    scores = rmfs::score_pods(world->pods, world->catalog, world->demand_table(), w);
    cache.threshold = rmfs::compute_cache_threshold(scores.combined, cache.size());
  }
};

inline rmfs::LayoutSpec tiny_layout(int pods) {
  rmfs::LayoutSpec s;
  s.name = "tiny";
  s.pick_stations = 1;
  s.replenish_stations = 1;
  s.aisles_horizontal = 1;
  s.aisles_vertical = 1;
  s.pods = pods;
  return s;
}

inline FrozenWorld frozen_world(Rng& rng, int pods, int skus, int orders) {
  FrozenWorld f;
  rmfs::LayoutOptions opt;
  opt.pod_capacity = 20;
  f.world = std::make_unique<rmfs::World>(rmfs::generate_layout(tiny_layout(pods), opt));
  std::vector<double> weights(static_cast<std::size_t>(skus));
  for (double& w : weights) w = uniform_real(rng, 0.05, 1.0);
  f.world->set_catalog(rmfs::SkuCatalog::from_weights(weights));
  rmfs::fill_initial_inventory(*f.world, uniform_real(rng, 0.3, 0.8), uniform_int(rng, 1, 5), rng);

  // Scatter pods so the stored order is not the generator's prominence order.
  auto& w = *f.world;
  for (int k = 0; k < 3 * pods; ++k) {
    const auto p = rmfs::PodId(static_cast<std::size_t>(uniform_int(rng, 0, pods - 1)));
    std::vector<rmfs::LocationId> free;
    for (const auto& l : w.locations) {
      if (!l.occupant) free.push_back(l.id);
    }
    if (free.empty()) break;
    const auto to = free[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(free.size()) - 1))];
    w.release_pod(p, rmfs::CarriedBy{rmfs::RobotId(0)});
    w.store_pod(p, to);
  }
  for (int o = 0; o < orders; ++o) {
    std::vector<rmfs::OrderLine> lines;
    const int n = uniform_int(rng, 1, 3);
    for (int i = 0; i < n; ++i) lines.push_back({uniform_int(rng, 0, skus - 1), uniform_int(rng, 1, 4)});
    w.add_customer_order(lines, 0.0);
  }

  f.paths = std::make_unique<rmfs::PathTimeEstimator>(w.graph);
  f.ranks = rmfs::compute_ranks(rmfs::compute_prominence_field(w, *f.paths));
  f.cache = rmfs::build_cache_set(f.ranks, 0.25);
  f.rescore();
  return f;
}

inline void move_pod(rmfs::World& w, rmfs::PodId p, rmfs::LocationId to) {
  w.release_pod(p, rmfs::CarriedBy{rmfs::RobotId(0)});
  w.store_pod(p, to);
}

}  // namespace testing
