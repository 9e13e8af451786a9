#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmfs/path_time.hpp"
#include "rmfs/scoring.hpp"
#include "rmfs/world.hpp"

namespace rmfs {

enum class PassiveMechanism : std::uint8_t { Nearest, Cache, Utility };
enum class ActiveMechanism : std::uint8_t { None, Cache, Utility };

struct MechanismConfig {
  PassiveMechanism passive = PassiveMechanism::Nearest;
  ActiveMechanism active = ActiveMechanism::None;
  double cache_fraction = 0.25;
  ScoringWeights weights;

  void validate() const;
  /// Parses a "<passive>-<active>" label such as "N-U" or "C-C". The active
  /// part may also be "none". Nearest has no active variant, so "N-N" is rejected.
  static MechanismConfig parse(std::string_view label);
  std::string label() const;

  friend bool operator==(const MechanismConfig&, const MechanismConfig&) = default;
};

/// The most prominent fraction of storage locations plus the current
/// combined-score cutoff for cache admission.
struct CacheSet {
  std::vector<LocationId> locations;
  std::vector<std::uint8_t> member;  // by location id
  double threshold = 0.0;

  bool contains(LocationId l) const { return member[l.index()] != 0; }
  std::size_t size() const { return locations.size(); }
};

/// round(fraction x locations) lowest-prominence locations (ties by id).
CacheSet build_cache_set(const RankTable& ranks, double fraction);

/// Combined score at the capacity-matched quantile: the k-th highest score,
/// k = min(cache size, pod count).
double compute_cache_threshold(std::span<const double> scores, std::size_t cache_size);

struct RepositioningMove {
  PodId pod;
  LocationId from;
  LocationId to;
  double gain = 0.0;
};

/// Everything a policy decision reads. Availability is decided by the caller:
/// `location_free[l]` marks locations a pod may be sent to right now,
/// `pod_movable[p]` marks stored pods an active move may pick up.
struct PolicyView {
  const World& world;
  const PathTimeEstimator& paths;
  const RankTable& ranks;
  const CacheSet& cache;
  const PodScores& scores;
  std::span<const std::uint8_t> location_free;
  std::span<const std::uint8_t> pod_movable;
};

/// Free-location mask from occupancy alone.
std::vector<std::uint8_t> unoccupied_locations(const World& world);
/// Movable-pod mask from placement alone (every stored pod).
std::vector<std::uint8_t> stored_pods(const World& world);

/// Desired rank of every pod: pods sorted by combined score (descending, ties
/// by id) are spread proportionally over ranks 1..max_rank.
std::vector<int> desired_ranks(const PodScores& scores, int max_rank);
int desired_rank(PodId pod, const PodScores& scores, int max_rank);

/// Storage location for a pod coming back from a station. Throws when no
/// location is free.
LocationId choose_passive_location(const MechanismConfig& mechanism, PodId pod, NodeId release_point,
                                   const PolicyView& view);

/// Next greedy active repositioning move, or nullopt when none improves the
/// inventory. A cache swap is issued as two consecutive moves: the evicted pod
/// goes to a buffer location first, its replacement follows on the next call.
std::optional<RepositioningMove> next_active_move(const MechanismConfig& mechanism, const PolicyView& view);

/// Sum over stored pods of |actual rank - desired rank|.
long rank_mismatch(const World& world, const RankTable& ranks, std::span<const int> desired);

}  // namespace rmfs
