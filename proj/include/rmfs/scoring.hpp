#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rmfs/path_time.hpp"
#include "rmfs/world.hpp"

namespace rmfs {

struct ScoringWeights {
  double speed = 1.0;
  double utility = 1.0;
  void validate() const;
  friend bool operator==(const ScoringWeights&, const ScoringWeights&) = default;
};

/// Frequency-weighted unit count: sum over SKUs of units x frequency.
double pod_speed(const Pod& pod, const SkuCatalog& catalog);

/// Backlog-capped potential picks: sum over SKUs of min(units, demand).
double pod_utility(const Pod& pod, std::span<const int> demand);

/// Speed and utility of every pod plus the normalized combined score.
struct PodScores {
  std::vector<double> speed;
  std::vector<double> utility;
  std::vector<double> combined;
  double max_speed = 0.0;
  double max_utility = 0.0;

  double operator[](PodId p) const { return combined[p.index()]; }
};

/// Scores all pods. A zero maximum makes its term 0. Throws when every pod is
/// empty (no normalization basis).
PodScores score_pods(std::span<const Pod> pods, const SkuCatalog& catalog, std::span<const int> demand,
                     const ScoringWeights& weights);

/// Combined score of a single pod against the whole pod population.
double combined_score(const Pod& pod, std::span<const Pod> all_pods, const SkuCatalog& catalog,
                      std::span<const int> demand, const ScoringWeights& weights);

bool any_inventory(std::span<const Pod> pods);

// ---------------------------------------------------------------------------

struct RankEntry {
  LocationId location;
  Seconds prominence = 0.0;
  int rank = 1;
};

/// Storage locations sorted by prominence (ties by id) with dense ranks.
struct RankTable {
  std::vector<RankEntry> entries;
  std::vector<int> rank_of;  // by location id
  int max_rank = 0;

  int rank(LocationId l) const { return rank_of[l.index()]; }
};

RankTable compute_ranks(const ProminenceField& field);

struct WellSortednessReport {
  long misplacements = 0;    // c
  long offset_sum = 0;       // d
  double average = 0.0;      // a = d / c, 0 when c == 0
  friend bool operator==(const WellSortednessReport&, const WellSortednessReport&) = default;
};

/// Misplaced pairs over occupied locations. `score_at_location[l]` is the
/// combined score of the pod stored at l, or nullopt for an empty location.
///
/// A pair (i1, i2) with rank(i1) < rank(i2) is misplaced when
/// score(i1) < score(i2); its offset is rank(i2) - rank(i1). Runs in
/// O(n log n) with a Fenwick tree over score order.
WellSortednessReport well_sortedness(const RankTable& ranks, std::span<const std::optional<double>> score_at_location);

WellSortednessReport well_sortedness(const World& world, const RankTable& ranks, const PodScores& scores);

/// Per-location score view used by well_sortedness and the heatmap export.
std::vector<std::optional<double>> scores_by_location(const World& world, const PodScores& scores);

// ---------------------------------------------------------------------------

/// Units per hour the pick stations could handle if they never waited.
double throughput_upper_bound(int pick_stations, Seconds unit_pick_time);

/// Unit throughput rate score: average picked units per active hour over the bound.
double utrs(double units_per_active_hour, int pick_stations, Seconds unit_pick_time);

}  // namespace rmfs
