#include "rmfs/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace rmfs {

void MechanismConfig::validate() const {
  if (!(cache_fraction > 0.0 && cache_fraction <= 1.0)) {
    throw std::invalid_argument(fmt::format("cache fraction must be in (0, 1], got {}", cache_fraction));
  }
  weights.validate();
}

MechanismConfig MechanismConfig::parse(std::string_view label) {
  const auto dash = label.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument(fmt::format("mechanism '{}' must look like <passive>-<active>, e.g. N-U", label));
  }
  const auto passive = label.substr(0, dash);
  const auto active = label.substr(dash + 1);
  MechanismConfig m;
  if (passive == "N") {
    m.passive = PassiveMechanism::Nearest;
  } else if (passive == "C") {
    m.passive = PassiveMechanism::Cache;
  } else if (passive == "U") {
    m.passive = PassiveMechanism::Utility;
  } else {
    throw std::invalid_argument(fmt::format("mechanism '{}': passive part must be one of N, C, U", label));
  }
  if (active == "C") {
    m.active = ActiveMechanism::Cache;
  } else if (active == "U") {
    m.active = ActiveMechanism::Utility;
  } else if (active == "none") {
    m.active = ActiveMechanism::None;
  } else if (active == "N") {
    throw std::invalid_argument(fmt::format(
        "mechanism '{}': Nearest has no active variant; active part must be one of C, U, none", label));
  } else {
    throw std::invalid_argument(fmt::format("mechanism '{}': active part must be one of C, U, none", label));
  }
  return m;
}

std::string MechanismConfig::label() const {
  const char* p = passive == PassiveMechanism::Nearest ? "N" : passive == PassiveMechanism::Cache ? "C" : "U";
  const char* a = active == ActiveMechanism::None ? "none" : active == ActiveMechanism::Cache ? "C" : "U";
  return fmt::format("{}-{}", p, a);
}

// ---------------------------------------------------------------------------

CacheSet build_cache_set(const RankTable& ranks, double fraction) {
  CacheSet c;
  const auto n = ranks.entries.size();
  const auto k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  c.member.assign(n, 0);
  for (std::size_t i = 0; i < std::min(k, n); ++i) {
    c.locations.push_back(ranks.entries[i].location);
    c.member[ranks.entries[i].location.index()] = 1;
  }
  return c;
}

double compute_cache_threshold(std::span<const double> scores, std::size_t cache_size) {
  if (scores.empty()) throw std::invalid_argument("cache threshold needs at least one pod");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t k = std::clamp<std::size_t>(cache_size, 1, sorted.size());
  return sorted[k - 1];
}

std::vector<std::uint8_t> unoccupied_locations(const World& world) {
  std::vector<std::uint8_t> free(world.locations.size(), 0);
  for (const StorageLocation& l : world.locations) free[l.id.index()] = l.occupant ? 0 : 1;
  return free;
}

std::vector<std::uint8_t> stored_pods(const World& world) {
  std::vector<std::uint8_t> movable(world.pods.size(), 0);
  for (const Pod& p : world.pods) movable[p.id.index()] = p.stored() ? 1 : 0;
  return movable;
}

std::vector<int> desired_ranks(const PodScores& scores, int max_rank) {
  const std::size_t n = scores.combined.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores.combined[a] != scores.combined[b]) return scores.combined[a] > scores.combined[b];
    return a < b;
  });
  std::vector<int> desired(n, 1);
  for (std::size_t pos = 0; pos < n; ++pos) {
    desired[order[pos]] = 1 + static_cast<int>(static_cast<long>(pos) * max_rank / static_cast<long>(n));
  }
  return desired;
}

int desired_rank(PodId pod, const PodScores& scores, int max_rank) {
  const double s = scores[pod];
  long pos = 0;
  for (std::size_t i = 0; i < scores.combined.size(); ++i) {
    const double o = scores.combined[i];
    if (o > s || (o == s && i < pod.index())) ++pos;
  }
  return 1 + static_cast<int>(pos * max_rank / static_cast<long>(scores.combined.size()));
}

long rank_mismatch(const World& world, const RankTable& ranks, std::span<const int> desired) {
  long sum = 0;
  for (const Pod& p : world.pods) {
    if (const auto loc = p.location()) sum += std::abs(ranks.rank(*loc) - desired[p.id.index()]);
  }
  return sum;
}

namespace {

constexpr Seconds kInf = std::numeric_limits<Seconds>::infinity();

// Nearest free location (by the given time row) among those accepted by `keep`.
template <class Keep>
std::optional<LocationId> nearest_free(const PolicyView& v, const std::vector<Seconds>& times, Keep&& keep) {
  std::optional<LocationId> best;
  Seconds best_t = kInf;
  for (const StorageLocation& l : v.world.locations) {
    if (!v.location_free[l.id.index()] || !keep(l.id)) continue;
    const Seconds t = times[l.waypoint.index()];
    if (!best || t < best_t) {
      best = l.id;
      best_t = t;
    }
  }
  return best;
}

std::optional<RepositioningMove> next_utility_move(const PolicyView& v) {
  const World& w = v.world;
  const int max_rank = v.ranks.max_rank;
  const std::vector<int> desired = desired_ranks(v.scores, max_rank);

  std::vector<std::vector<LocationId>> free_by_rank(static_cast<std::size_t>(max_rank) + 1);
  for (const RankEntry& e : v.ranks.entries) {
    if (v.location_free[e.location.index()]) free_by_rank[static_cast<std::size_t>(e.rank)].push_back(e.location);
  }

  struct Candidate {
    int diff;
    double score;
    PodId pod;
    LocationId at;
  };
  std::vector<Candidate> candidates;
  for (const Pod& p : w.pods) {
    const auto loc = p.location();
    if (!loc || !v.pod_movable[p.id.index()]) continue;
    const int diff = std::abs(v.ranks.rank(*loc) - desired[p.id.index()]);
    if (diff > 0) candidates.push_back({diff, v.scores[p.id], p.id, *loc});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.diff != b.diff) return a.diff > b.diff;
    if (a.score != b.score) return a.score > b.score;
    return a.pod < b.pod;
  });

  for (const Candidate& c : candidates) {
    const int want = desired[c.pod.index()];
    for (int delta = 0; delta < c.diff; ++delta) {
      std::vector<LocationId> ring;
      for (int r : {want - delta, want + delta}) {
        if (r < 1 || r > max_rank) continue;
        const auto& bucket = free_by_rank[static_cast<std::size_t>(r)];
        ring.insert(ring.end(), bucket.begin(), bucket.end());
        if (delta == 0) break;
      }
      if (ring.empty()) continue;
      const auto& times = v.paths.times_from(w.location(c.at).waypoint);
      const auto best = *std::min_element(ring.begin(), ring.end(), [&](LocationId a, LocationId b) {
        return std::tuple(times[w.location(a).waypoint.index()], a) <
               std::tuple(times[w.location(b).waypoint.index()], b);
      });
      return RepositioningMove{c.pod, c.at, best, static_cast<double>(c.diff - delta)};
    }
  }
  return std::nullopt;
}

std::optional<RepositioningMove> next_cache_move(const PolicyView& v) {
  const World& w = v.world;
  const double threshold = v.cache.threshold;
  std::optional<PodId> high;  // best qualifying pod outside the cache
  std::optional<PodId> low;   // worst non-qualifying pod inside the cache
  for (const Pod& p : w.pods) {
    const auto loc = p.location();
    if (!loc || !v.pod_movable[p.id.index()]) continue;
    const double s = v.scores[p.id];
    if (!v.cache.contains(*loc)) {
      if (s >= threshold && (!high || s > v.scores[*high])) high = p.id;
    } else if (s < threshold && (!low || s < v.scores[*low])) {
      low = p.id;
    }
  }
  if (!high) return std::nullopt;

  const LocationId high_at = *w.pod(*high).location();
  const auto in_cache = [&](LocationId l) { return v.cache.contains(l); };
  if (auto slot = nearest_free(v, v.paths.times_from(w.location(high_at).waypoint), in_cache)) {
    return RepositioningMove{*high, high_at, *slot, v.scores[*high]};
  }
  if (!low || !(v.scores[*high] > v.scores[*low])) return std::nullopt;
  const LocationId low_at = *w.pod(*low).location();
  const auto buffer =
      nearest_free(v, v.paths.times_from(w.location(low_at).waypoint), [&](LocationId l) { return !in_cache(l); });
  if (!buffer) return std::nullopt;
  return RepositioningMove{*low, low_at, *buffer, v.scores[*high] - v.scores[*low]};
}

}  // namespace

LocationId choose_passive_location(const MechanismConfig& mechanism, PodId pod, NodeId release_point,
                                   const PolicyView& v) {
  const auto& times = v.paths.times_from(release_point);
  std::optional<LocationId> chosen;
  switch (mechanism.passive) {
    case PassiveMechanism::Nearest:
      chosen = nearest_free(v, times, [](LocationId) { return true; });
      break;
    case PassiveMechanism::Cache: {
      const bool qualifies = v.scores[pod] >= v.cache.threshold;
      chosen = nearest_free(v, times, [&](LocationId l) { return v.cache.contains(l) == qualifies; });
      if (!chosen) chosen = nearest_free(v, times, [&](LocationId l) { return v.cache.contains(l) != qualifies; });
      break;
    }
    case PassiveMechanism::Utility: {
      const int want = desired_rank(pod, v.scores, v.ranks.max_rank);
      int window = std::numeric_limits<int>::max();
      for (const StorageLocation& l : v.world.locations) {
        if (v.location_free[l.id.index()]) window = std::min(window, std::abs(v.ranks.rank(l.id) - want));
      }
      window = std::max(window, 1);
      chosen = nearest_free(v, times, [&](LocationId l) { return std::abs(v.ranks.rank(l) - want) <= window; });
      break;
    }
  }
  if (!chosen) throw std::runtime_error(fmt::format("no free storage location for pod {}", pod.value()));
  return *chosen;
}

std::optional<RepositioningMove> next_active_move(const MechanismConfig& mechanism, const PolicyView& view) {
  switch (mechanism.active) {
    case ActiveMechanism::None: return std::nullopt;
    case ActiveMechanism::Utility: return next_utility_move(view);
    case ActiveMechanism::Cache: return next_cache_move(view);
  }
  return std::nullopt;
}

}  // namespace rmfs
