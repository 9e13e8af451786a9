#include "rmfs/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rmfs {

void ScoringWeights::validate() const {
  if (speed < 0.0 || utility < 0.0 || !(speed + utility > 0.0)) {
    throw std::invalid_argument("scoring weights must be non-negative with a positive sum");
  }
}

double pod_speed(const Pod& pod, const SkuCatalog& catalog) {
  double s = 0.0;
  for (const SkuUnits& u : pod.inventory.items()) s += u.units * catalog.frequency.at(static_cast<std::size_t>(u.sku));
  return s;
}

double pod_utility(const Pod& pod, std::span<const int> demand) {
  double s = 0.0;
  for (const SkuUnits& u : pod.inventory.items()) s += std::min(u.units, demand[static_cast<std::size_t>(u.sku)]);
  return s;
}

bool any_inventory(std::span<const Pod> pods) {
  return std::any_of(pods.begin(), pods.end(), [](const Pod& p) { return !p.inventory.empty(); });
}

PodScores score_pods(std::span<const Pod> pods, const SkuCatalog& catalog, std::span<const int> demand,
                     const ScoringWeights& weights) {
  weights.validate();
  if (!any_inventory(pods)) throw std::domain_error("combined score is undefined when every pod is empty");
  PodScores out;
  out.speed.reserve(pods.size());
  out.utility.reserve(pods.size());
  for (const Pod& p : pods) {
    out.speed.push_back(pod_speed(p, catalog));
    out.utility.push_back(pod_utility(p, demand));
  }
  out.max_speed = *std::max_element(out.speed.begin(), out.speed.end());
  out.max_utility = *std::max_element(out.utility.begin(), out.utility.end());
  out.combined.resize(pods.size());
  for (std::size_t i = 0; i < pods.size(); ++i) {
    double c = 0.0;
    if (out.max_speed > 0.0) c += out.speed[i] / out.max_speed * weights.speed;
    if (out.max_utility > 0.0) c += out.utility[i] / out.max_utility * weights.utility;
    out.combined[i] = c;
  }
  return out;
}

double combined_score(const Pod& pod, std::span<const Pod> all_pods, const SkuCatalog& catalog,
                      std::span<const int> demand, const ScoringWeights& weights) {
  const PodScores s = score_pods(all_pods, catalog, demand, weights);
  double c = 0.0;
  if (s.max_speed > 0.0) c += pod_speed(pod, catalog) / s.max_speed * weights.speed;
  if (s.max_utility > 0.0) c += pod_utility(pod, demand) / s.max_utility * weights.utility;
  return c;
}

// ---------------------------------------------------------------------------

RankTable compute_ranks(const ProminenceField& field) {
  RankTable t;
  t.entries.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) t.entries.push_back({LocationId{i}, field.by_location[i], 0});
  std::sort(t.entries.begin(), t.entries.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.prominence != b.prominence) return a.prominence < b.prominence;
    return a.location < b.location;
  });
  t.rank_of.assign(field.size(), 0);
  if (t.entries.empty()) return t;
  int rank = 1;
  Seconds level = t.entries.front().prominence;
  for (RankEntry& e : t.entries) {
    if (e.prominence > level) {
      ++rank;
      level = e.prominence;
    }
    e.rank = rank;
    t.rank_of[e.location.index()] = rank;
  }
  t.max_rank = rank;
  return t;
}

namespace {

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : count_(n + 1, 0), rank_sum_(n + 1, 0) {}
  void add(std::size_t pos, long rank) {
    for (std::size_t i = pos + 1; i < count_.size(); i += i & (~i + 1)) {
      count_[i] += 1;
      rank_sum_[i] += rank;
    }
  }
  // Totals over positions [0, pos).
  std::pair<long, long> prefix(std::size_t pos) const {
    long c = 0, r = 0;
    for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) {
      c += count_[i];
      r += rank_sum_[i];
    }
    return {c, r};
  }

 private:
  std::vector<long> count_;
  std::vector<long> rank_sum_;
};

}  // namespace

WellSortednessReport well_sortedness(const RankTable& ranks, std::span<const std::optional<double>> score_at_location) {
  if (score_at_location.size() != ranks.rank_of.size()) {
    throw std::invalid_argument("score view does not match the rank table");
  }
  std::vector<double> levels;
  for (const auto& s : score_at_location) {
    if (s) levels.push_back(*s);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const auto level_of = [&](double s) {
    return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), s) - levels.begin());
  };

  WellSortednessReport r;
  Fenwick tree(levels.size());
  std::size_t i = 0;
  const auto& entries = ranks.entries;
  while (i < entries.size()) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].rank == entries[i].rank) ++j;
    // Pairs inside a rank group never count; compare the group against all
    // better-ranked occupied locations, then insert it.
    for (std::size_t k = i; k < j; ++k) {
      const auto& s = score_at_location[entries[k].location.index()];
      if (!s) continue;
      const auto [below, rank_sum] = tree.prefix(level_of(*s));
      r.misplacements += below;
      r.offset_sum += below * entries[k].rank - rank_sum;
    }
    for (std::size_t k = i; k < j; ++k) {
      const auto& s = score_at_location[entries[k].location.index()];
      if (s) tree.add(level_of(*s), entries[k].rank);
    }
    i = j;
  }
  r.average = r.misplacements > 0 ? static_cast<double>(r.offset_sum) / static_cast<double>(r.misplacements) : 0.0;
  return r;
}

std::vector<std::optional<double>> scores_by_location(const World& world, const PodScores& scores) {
  std::vector<std::optional<double>> view(world.locations.size());
  for (const StorageLocation& l : world.locations) {
    if (l.occupant) view[l.id.index()] = scores[*l.occupant];
  }
  return view;
}

WellSortednessReport well_sortedness(const World& world, const RankTable& ranks, const PodScores& scores) {
  const auto view = scores_by_location(world, scores);
  return well_sortedness(ranks, view);
}

double throughput_upper_bound(int pick_stations, Seconds unit_pick_time) {
  if (!(unit_pick_time > 0.0)) throw std::invalid_argument("unit pick time must be positive");
  return pick_stations * 3600.0 / unit_pick_time;
}

double utrs(double units_per_active_hour, int pick_stations, Seconds unit_pick_time) {
  const double ub = throughput_upper_bound(pick_stations, unit_pick_time);
  return ub > 0.0 ? units_per_active_hour / ub : 0.0;
}

}  // namespace rmfs
