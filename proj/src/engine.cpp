#include "rmfs/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rmfs/path_time.hpp"
#include "rmfs/scoring.hpp"

namespace rmfs {

Seconds time_of_day(Seconds t) { return std::fmod(t + 6 * kHour, kDay); }

bool in_down_window(Seconds t) {
  const Seconds h = time_of_day(t);
  return h >= 22 * kHour || h < 6 * kHour;
}

const char* to_string(ScenarioKind k) { return k == ScenarioKind::DownPeriod ? "down-period" : "parallel"; }

ScenarioKind parse_scenario_kind(std::string_view s) {
  if (s == "down-period") return ScenarioKind::DownPeriod;
  if (s == "parallel") return ScenarioKind::Parallel;
  throw std::invalid_argument(fmt::format("unknown scenario '{}'; accepted: down-period, parallel", s));
}

const char* to_string(Setup s) {
  switch (s) {
    case Setup::Deactivated: return "Deactivated";
    case Setup::Activated: return "Activated";
    case Setup::R1P3A0: return "R1P3A0";
    case Setup::R1P2A1: return "R1P2A1";
    case Setup::R1P3A1: return "R1P3A1";
  }
  return "?";
}

Setup parse_setup(std::string_view s) {
  for (Setup v : {Setup::Deactivated, Setup::Activated, Setup::R1P3A0, Setup::R1P2A1, Setup::R1P3A1}) {
    if (s == to_string(v)) return v;
  }
  throw std::invalid_argument(
      fmt::format("unknown setup '{}'; accepted: Deactivated, Activated, R1P3A0, R1P2A1, R1P3A1", s));
}

RobotSplit robot_split(Setup s) {
  switch (s) {
    case Setup::R1P2A1: return {1, 2, 1};
    case Setup::R1P3A1: return {1, 3, 1};
    default: return {1, 3, 0};
  }
}

void SimulationParams::validate() const {
  const auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  need(sku_count >= 1, "sku_count must be >= 1");
  need(sku_gamma_shape > 0 && sku_gamma_scale > 0, "sku gamma parameters must be positive");
  need(order_lines_min >= 1 && order_lines_max >= order_lines_min, "order line bounds must satisfy 1 <= min <= max");
  need(customer_backlog >= 0 && night_orders_per_station >= 0 && replenishment_backlog >= 0,
       "backlog sizes must be non-negative");
  need(replenishment_order_size >= 1, "replenishment order size must be >= 1");
  need(target_fill >= 0 && target_fill <= 1, "target fill must be in [0, 1]");
  need(initial_fill_chunk >= 1, "initial fill chunk must be >= 1");
  need(station_order_pool >= 1 && replenishment_order_pool >= 1, "station order pools must be >= 1");
  need(sample_interval > 0 && threshold_refresh > 0 && deadlock_timeout > 0, "intervals must be positive");
}

void ScenarioConfig::validate() const {
  layout.validate();
  mechanism.validate();
  kinematics.validate();
  params.validate();
  if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  const bool split = setup == Setup::R1P3A0 || setup == Setup::R1P2A1 || setup == Setup::R1P3A1;
  if (kind == ScenarioKind::DownPeriod && split) {
    throw std::invalid_argument(
        fmt::format("setup '{}' belongs to the parallel scenario; down-period accepts Activated, Deactivated",
                    to_string(setup)));
  }
  if (kind == ScenarioKind::Parallel && !split) {
    throw std::invalid_argument(fmt::format(
        "setup '{}' belongs to the down-period scenario; parallel accepts R1P3A0, R1P2A1, R1P3A1", to_string(setup)));
  }
}

bool ScenarioConfig::night_repositioning() const {
  return kind == ScenarioKind::DownPeriod && setup == Setup::Activated && mechanism.active != ActiveMechanism::None;
}

std::string serialize(const RunResult& r) {
  nlohmann::ordered_json j;
  j["layout"] = r.layout;
  j["scenario"] = r.scenario;
  j["mechanism"] = r.mechanism;
  j["setup"] = r.setup;
  j["seed"] = r.seed;
  j["horizon_s"] = r.horizon;
  j["utrs"] = r.utrs;
  const RunTotals& t = r.totals;
  j["totals"] = {{"units_picked", t.units_picked},
                 {"units_replenished", t.units_replenished},
                 {"orders_completed", t.orders_completed},
                 {"pick_trips", t.pick_trips},
                 {"moves_executed", t.moves_executed},
                 {"distance_traveled_m", t.distance_traveled},
                 {"active_hours", t.active_hours},
                 {"robots", t.robots},
                 {"station_units", t.station_units},
                 {"invariant_checks", t.invariant_checks},
                 {"unit_conservation_violations", t.unit_conservation_violations},
                 {"placement_violations", t.placement_violations},
                 {"collision_violations", t.collision_violations}};
  auto series = nlohmann::ordered_json::array();
  for (const Sample& s : r.series) {
    series.push_back({s.time, s.orders_per_hour, s.well_sortedness, s.mean_trip_time, s.fill_level});
  }
  j["series_columns"] = {"time_s", "orders_per_hour", "well_sortedness", "mean_trip_time_to_pick_s", "fill_level"};
  j["series"] = std::move(series);
  auto maps = nlohmann::ordered_json::array();
  for (const HeatmapGrid& h : r.heatmaps) {
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : h.cells) cells.push_back(c ? nlohmann::ordered_json(*c) : nlohmann::ordered_json(nullptr));
    maps.push_back({{"time_s", h.time}, {"rows", h.rows}, {"cols", h.cols}, {"cells", std::move(cells)}});
  }
  j["heatmaps"] = std::move(maps);
  return j.dump(1);
}

// ---------------------------------------------------------------------------

int pickable_units(const Pod& pod, std::span<const int> need) {
  int n = 0;
  for (const SkuUnits& u : pod.inventory.items()) n += std::min(u.units, need[static_cast<std::size_t>(u.sku)]);
  return n;
}

namespace {

template <class Value>
std::optional<PodId> best_pod(const World& world, std::span<const std::uint8_t> movable,
                              std::span<const Seconds> time_to, Value&& value) {
  std::optional<PodId> best;
  int best_value = 0;
  Seconds best_time = 0.0;
  for (const Pod& p : world.pods) {
    if (!movable[p.id.index()]) continue;
    const auto loc = p.location();
    if (!loc) continue;
    const int v = value(p);
    if (v <= 0) continue;
    const Seconds t = time_to[world.location(*loc).waypoint.index()];
    if (!best || v > best_value || (v == best_value && t < best_time)) {
      best = p.id;
      best_value = v;
      best_time = t;
    }
  }
  return best;
}

}  // namespace

std::optional<PodId> select_pick_pod(const World& world, std::span<const int> need,
                                     std::span<const std::uint8_t> movable, std::span<const Seconds> time_to) {
  return best_pod(world, movable, time_to, [&](const Pod& p) { return pickable_units(p, need); });
}

std::optional<PodId> select_replenish_pod(const World& world, int min_free, std::span<const std::uint8_t> movable,
                                          std::span<const Seconds> time_to) {
  return best_pod(world, movable, time_to, [&](const Pod& p) {
    const int free = p.free_capacity();
    return free >= std::max(min_free, 1) ? free : 0;
  });
}

std::vector<OrderLine> draw_order_lines(std::discrete_distribution<SkuId>& sku_dist, int min_lines, int max_lines,
                                        std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(min_lines, max_lines);
  const int n = count(rng);
  std::vector<OrderLine> lines;
  for (int i = 0; i < n; ++i) {
    const SkuId sku = sku_dist(rng);
    auto it = std::find_if(lines.begin(), lines.end(), [&](const OrderLine& l) { return l.sku == sku; });
    if (it != lines.end()) {
      ++it->quantity;
    } else {
      lines.push_back({sku, 1, 0, 0});
    }
  }
  return lines;
}

// ---------------------------------------------------------------------------

namespace {

enum class EventKind : std::uint8_t {
  Arrival,
  TurnDone,
  LiftDone,
  DropDone,
  Retry,
  UnitHandled,
  Close,
  Open,
  ReplenishmentCall,
  Sample,
  Refresh,
};

struct Event {
  Seconds time;
  std::uint64_t seq;
  EventKind kind;
  std::int32_t subject;
  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return seq > o.seq;
  }
};

enum class Phase : std::uint8_t { Idle, ToPod, Lifting, ToStation, AtStation, ToStorage, Dropping };

struct Claim {
  OrderId order;
  std::size_t line;
};

struct Agent {
  Phase phase = Phase::Idle;
  TaskKind kind = TaskKind::Pick;
  PodId pod;
  std::optional<StationId> station;
  std::optional<LocationId> target;
  std::deque<Claim> claims;            // customer order units promised by the carried pod
  std::vector<OrderId> replenishment;  // replenishment orders served by the carried pod
  std::optional<Claim> current_unit;
  bool drop_in_place = false;
  Seconds lifted_at = 0.0;

  std::vector<NodeId> route;
  std::vector<double> along;  // cumulative distance along the route
  std::size_t at = 0;
  std::size_t run_begin = 0;
  std::size_t run_end = 0;
  Seconds run_start = 0.0;
  std::optional<NodeId> waiting_for;
  Seconds waiting_since = 0.0;
};

constexpr std::int32_t kNobody = -1;

}  // namespace

struct Simulation::Impl {
  ScenarioConfig cfg;
  World world;
  std::unique_ptr<PathTimeEstimator> paths;
  RankTable ranks;
  CacheSet cache;

  std::mt19937_64 customer_rng;
  std::mt19937_64 replenish_rng;
  std::discrete_distribution<SkuId> customer_skus;
  std::discrete_distribution<SkuId> replenish_skus;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::uint64_t next_seq = 0;
  Seconds now = 0.0;
  bool open = true;
  bool dirty = true;

  std::vector<Agent> agents;
  std::vector<std::int32_t> holder;                 // by node
  std::vector<std::vector<std::int32_t>> waiters;   // by node
  std::vector<std::int32_t> pod_reserved;           // by pod
  std::vector<std::int32_t> location_reserved;      // by location

  std::vector<std::vector<OrderId>> station_orders;  // by station: assigned customer or replenishment orders
  std::deque<OrderId> customer_queue;
  std::deque<OrderId> replenishment_queue;
  std::size_t pick_rr = 0;
  std::size_t replenish_rr = 0;
  std::vector<int> stock;      // units per SKU over all pods
  std::vector<int> committed;  // unpicked units of assigned orders per SKU
  std::vector<int> need;       // scratch
  int open_replenishment = 0;

  mutable std::uint64_t inventory_version = 0;
  mutable std::uint64_t scored_version = std::numeric_limits<std::uint64_t>::max();
  mutable PodScores cached_scores;

  RunResult result;
  long completions_in_interval = 0;
  double trip_time_sum = 0.0;
  long trip_count = 0;

  explicit Impl(const ScenarioConfig& c);

  // -- bookkeeping --------------------------------------------------------
  void schedule(Seconds t, EventKind kind, std::int32_t subject = 0) {
    if (t < now) throw std::logic_error("event scheduled in the past");
    events.push({t, next_seq++, kind, subject});
  }

  const PodScores& scores() const {
    if (scored_version != inventory_version) {
      if (any_inventory(world.pods)) {
        cached_scores = score_pods(world.pods, world.catalog, world.demand_table(), cfg.mechanism.weights);
      } else {
        const std::size_t n = world.pods.size();
        cached_scores = PodScores{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                                  std::vector<double>(n, 0.0), 0.0, 0.0};
      }
      scored_version = inventory_version;
    }
    return cached_scores;
  }

  bool location_free_for(LocationId l, std::int32_t robot) const {
    const StorageLocation& loc = world.location(l);
    if (loc.occupant || location_reserved[l.index()] != kNobody) return false;
    const std::int32_t h = holder[loc.waypoint.index()];
    return h == kNobody || h == robot;
  }

  bool pod_movable_for(const Pod& p, std::int32_t robot) const {
    const auto loc = p.location();
    if (!loc || pod_reserved[p.id.index()] != kNobody) return false;
    const std::int32_t h = holder[world.location(*loc).waypoint.index()];
    return h == kNobody || h == robot;
  }

  std::vector<std::uint8_t> free_mask(std::int32_t robot) const {
    std::vector<std::uint8_t> m(world.locations.size());
    for (const StorageLocation& l : world.locations) m[l.id.index()] = location_free_for(l.id, robot) ? 1 : 0;
    return m;
  }

  std::vector<std::uint8_t> movable_mask(std::int32_t robot) const {
    std::vector<std::uint8_t> m(world.pods.size());
    for (const Pod& p : world.pods) m[p.id.index()] = pod_movable_for(p, robot) ? 1 : 0;
    return m;
  }

  // -- orders -------------------------------------------------------------
  void new_customer_order() {
    auto lines = draw_order_lines(customer_skus, cfg.params.order_lines_min, cfg.params.order_lines_max, customer_rng);
    customer_queue.push_back(world.add_customer_order(std::move(lines), now));
    ++inventory_version;
  }

  void refill_customer_backlog() {
    while (world.backlog() < cfg.params.customer_backlog) new_customer_order();
  }

  void new_replenishment_order() {
    const SkuId sku = replenish_skus(replenish_rng);
    replenishment_queue.push_back(world.add_replenishment_order(sku, cfg.params.replenishment_order_size, now));
    ++open_replenishment;
  }

  bool coverable(const CustomerOrder& o) const {
    for (const OrderLine& l : o.lines) {
      const auto s = static_cast<std::size_t>(l.sku);
      if (stock[s] - committed[s] < l.remaining()) return false;
    }
    return true;
  }

  // Station with the fewest assigned orders below `cap`, ties broken round-robin.
  std::optional<StationId> least_loaded(const std::vector<StationId>& ids, std::size_t cap, std::size_t& rr) const {
    std::optional<StationId> best;
    std::size_t best_load = cap;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const StationId s = ids[(rr + k) % ids.size()];
      const std::size_t load = station_orders[s.index()].size();
      if (load < best_load) {
        best = s;
        best_load = load;
      }
    }
    if (best) rr = (static_cast<std::size_t>(std::find(ids.begin(), ids.end(), *best) - ids.begin()) + 1) % ids.size();
    return best;
  }

  void assign_customer_orders() {
    if (!open) return;
    const auto picks = world.stations_of(StationKind::Pick);
    if (picks.empty()) return;
    const auto cap = static_cast<std::size_t>(cfg.params.station_order_pool);
    std::vector<OrderId> taken;
    for (OrderId id : customer_queue) {
      CustomerOrder& o = world.customer_orders[static_cast<std::size_t>(id)];
      if (!coverable(o)) continue;
      const auto s = least_loaded(picks, cap, pick_rr);
      if (!s) break;
      o.state = OrderState::Assigned;
      o.station = *s;
      for (const OrderLine& l : o.lines) committed[static_cast<std::size_t>(l.sku)] += l.remaining();
      station_orders[s->index()].push_back(id);
      taken.push_back(id);
      dirty = true;
    }
    if (!taken.empty()) {
      std::erase_if(customer_queue, [&](OrderId id) {
        return world.customer_orders[static_cast<std::size_t>(id)].state != OrderState::Open;
      });
    }
  }

  void assign_replenishment_orders() {
    if (!open) return;
    const auto reps = world.stations_of(StationKind::Replenish);
    if (reps.empty()) return;
    const auto cap = static_cast<std::size_t>(cfg.params.replenishment_order_pool);
    while (!replenishment_queue.empty()) {
      const auto s = least_loaded(reps, cap, replenish_rr);
      if (!s) break;
      ReplenishmentOrder& r = world.replenishment_orders[static_cast<std::size_t>(replenishment_queue.front())];
      replenishment_queue.pop_front();
      r.state = OrderState::Assigned;
      r.station = *s;
      station_orders[s->index()].push_back(r.id);
      dirty = true;
    }
  }

  // -- motion -------------------------------------------------------------
  void release_node(NodeId n) {
    holder[n.index()] = kNobody;
    auto& w = waiters[n.index()];
    if (w.empty()) return;
    std::sort(w.begin(), w.end());
    for (std::int32_t r : w) schedule(now, EventKind::Retry, r);
    w.clear();
  }

  Heading edge_heading(NodeId a, NodeId b) const {
    for (const Edge& e : world.graph.out_edges(a)) {
      if (e.to == b) return e.heading;
    }
    throw std::logic_error("route uses a missing edge");
  }

  void start_route(std::int32_t r, NodeId destination) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    a.route = paths->route(robot.node, destination, robot.heading);
    if (a.route.empty()) {
      throw std::runtime_error(fmt::format("robot {}: no route from node {} to node {}", r, robot.node.value(),
                                           destination.value()));
    }
    a.along.assign(a.route.size(), 0.0);
    for (std::size_t i = 1; i < a.route.size(); ++i) {
      a.along[i] = a.along[i - 1] + distance(world.graph.position(a.route[i - 1]), world.graph.position(a.route[i]));
    }
    a.at = 0;
    if (a.route.size() == 1) {
      route_done(r);
      return;
    }
    begin_run(r);
  }

  // The robot is at rest on route[at]; turn onto the next edge if needed.
  void begin_run(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    const Heading h = edge_heading(a.route[a.at], a.route[a.at + 1]);
    const int turns = quarter_turns(robot.heading, h);
    robot.heading = h;
    if (turns > 0) {
      schedule(now + turns * cfg.kinematics.turn_time_90, EventKind::TurnDone, r);
      return;
    }
    start_run(r);
  }

  void start_run(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    const Heading h = edge_heading(a.route[a.at], a.route[a.at + 1]);
    std::size_t j = a.at + 1;
    while (j + 1 < a.route.size() && edge_heading(a.route[j], a.route[j + 1]) == h) ++j;
    a.run_begin = a.at;
    a.run_end = j;
    a.run_start = now;
    try_step(r);
  }

  void try_step(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    const NodeId next = a.route[a.at + 1];
    std::int32_t& h = holder[next.index()];
    if (h != kNobody && h != r) {
      if (!a.waiting_for) a.waiting_since = now;
      a.waiting_for = next;
      waiters[next.index()].push_back(r);
      return;
    }
    h = r;
    a.waiting_for.reset();
    const double run = a.along[a.run_end] - a.along[a.run_begin];
    const double x = a.along[a.at + 1] - a.along[a.run_begin];
    const Seconds t = a.run_start + time_at_distance(x, run, cfg.kinematics);
    world.robots[static_cast<std::size_t>(r)].speed = cfg.kinematics.max_speed;
    schedule(std::max(t, now), EventKind::Arrival, r);
  }

  void on_retry(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    if (!a.waiting_for) return;
    // Blocked robots stop in place and restart the remainder of the run from rest.
    a.run_begin = a.at;
    a.run_start = now;
    try_step(r);
  }

  void on_arrival(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    const NodeId prev = a.route[a.at];
    ++a.at;
    const NodeId here = a.route[a.at];
    robot.node = here;
    robot.position = world.graph.position(here);
    result.totals.distance_traveled += a.along[a.at] - a.along[a.at - 1];
    for (const RobotAgent& other : world.robots) {
      if (other.id != robot.id && other.node == here) ++result.totals.collision_violations;
    }
    release_node(prev);

    if (a.phase == Phase::ToStation && !open) {
      robot.speed = 0.0;
      head_to_storage(r);
      return;
    }
    if (a.at + 1 == a.route.size()) {
      robot.speed = 0.0;
      route_done(r);
    } else if (a.at == a.run_end) {
      robot.speed = 0.0;
      begin_run(r);
    } else {
      try_step(r);
    }
  }

  // -- tasks --------------------------------------------------------------
  void release_claims(Agent& a) {
    for (const Claim& c : a.claims) {
      --world.customer_orders[static_cast<std::size_t>(c.order)].lines[c.line].reserved;
    }
    a.claims.clear();
    if (a.current_unit) {
      --world.customer_orders[static_cast<std::size_t>(a.current_unit->order)].lines[a.current_unit->line].reserved;
      a.current_unit.reset();
    }
    for (OrderId id : a.replenishment) world.replenishment_orders[static_cast<std::size_t>(id)].in_progress = false;
    a.replenishment.clear();
  }

  void become_idle(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    if (a.target) location_reserved[a.target->index()] = kNobody;
    if (a.pod.valid()) pod_reserved[a.pod.index()] = kNobody;
    a.phase = Phase::Idle;
    a.pod = PodId{};
    a.station.reset();
    a.target.reset();
    a.drop_in_place = false;
    robot.task.reset();
    robot.carried.reset();
    robot.speed = 0.0;
    dirty = true;
  }

  void route_done(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    switch (a.phase) {
      case Phase::ToPod:
        if (a.kind != TaskKind::Reposition && !open) {
          release_claims(a);
          become_idle(r);
          return;
        }
        a.phase = Phase::Lifting;
        schedule(now + cfg.kinematics.lift_time, EventKind::LiftDone, r);
        return;
      case Phase::ToStation:
        arrive_at_station(r);
        return;
      case Phase::ToStorage:
        a.phase = Phase::Dropping;
        schedule(now + cfg.kinematics.lift_time, EventKind::DropDone, r);
        return;
      default:
        throw std::logic_error("route finished in an unexpected task phase");
    }
  }

  void on_lift_done(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    if (a.kind != TaskKind::Reposition && !open) {
      // Stations closed while lifting: set the pod straight back down.
      release_claims(a);
      a.drop_in_place = true;
      a.phase = Phase::Dropping;
      schedule(now + cfg.kinematics.lift_time, EventKind::DropDone, r);
      return;
    }
    world.release_pod(a.pod, CarriedBy{robot.id});
    robot.carried = a.pod;
    a.lifted_at = now;
    dirty = true;  // the location is free now
    if (a.kind == TaskKind::Reposition) {
      a.phase = Phase::ToStorage;
      start_route(r, world.location(*a.target).waypoint);
    } else {
      a.phase = Phase::ToStation;
      start_route(r, world.station(*a.station).waypoint);
    }
  }

  void on_drop_done(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    if (!a.drop_in_place) {
      world.store_pod(a.pod, *a.target);
      if (a.kind == TaskKind::Reposition) ++result.totals.moves_executed;
    }
    become_idle(r);
  }

  void head_to_storage(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    release_claims(a);
    world.pod(a.pod).placement = CarriedBy{robot.id};
    const auto free = free_mask(r);
    const auto movable = movable_mask(r);
    const PolicyView view{world, *paths, ranks, cache, scores(), free, movable};
    const LocationId loc = choose_passive_location(cfg.mechanism, a.pod, robot.node, view);
    location_reserved[loc.index()] = r;
    a.target = loc;
    a.phase = Phase::ToStorage;
    start_route(r, world.location(loc).waypoint);
  }

  void arrive_at_station(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    if (!open) {
      head_to_storage(r);
      return;
    }
    world.pod(a.pod).placement = AtStation{*a.station};
    a.phase = Phase::AtStation;
    if (a.kind == TaskKind::Pick) {
      ++result.totals.pick_trips;
      trip_time_sum += now - a.lifted_at;
      ++trip_count;
    }
    next_unit(r);
  }

  // Picks the next unit the pod can serve at its station, or leaves.
  void next_unit(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    const Station& st = world.station(*a.station);
    bool work = false;
    if (open) {
      if (a.kind == TaskKind::Pick) {
        if (a.claims.empty()) claim_opportunistic(a);
        if (!a.claims.empty()) {
          a.current_unit = a.claims.front();
          a.claims.pop_front();
          work = true;
        }
      } else {
        const Pod& p = world.pod(a.pod);
        work = p.free_capacity() > 0 &&
               std::any_of(a.replenishment.begin(), a.replenishment.end(), [&](OrderId id) {
                 return world.replenishment_orders[static_cast<std::size_t>(id)].state != OrderState::Completed;
               });
      }
    }
    if (work) {
      schedule(now + st.unit_handling_time, EventKind::UnitHandled, r);
    } else {
      head_to_storage(r);
    }
  }

  void claim_opportunistic(Agent& a) {
    const Pod& p = world.pod(a.pod);
    for (OrderId id : station_orders[a.station->index()]) {
      CustomerOrder& o = world.customer_orders[static_cast<std::size_t>(id)];
      for (std::size_t i = 0; i < o.lines.size(); ++i) {
        OrderLine& l = o.lines[i];
        if (l.unreserved() > 0 && p.inventory.count(l.sku) > 0) {
          ++l.reserved;
          a.claims.push_back({id, i});
          return;
        }
      }
    }
  }

  void on_unit_handled(std::int32_t r) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    const StationId s = *a.station;
    if (a.kind == TaskKind::Pick) {
      const Claim c = *a.current_unit;
      a.current_unit.reset();
      CustomerOrder& o = world.customer_orders[static_cast<std::size_t>(c.order)];
      const SkuId sku = o.lines[c.line].sku;
      --o.lines[c.line].reserved;
      const bool completed = world.pick_unit(c.order, c.line, a.pod, now);
      --stock[static_cast<std::size_t>(sku)];
      --committed[static_cast<std::size_t>(sku)];
      ++result.totals.station_units[s.index()];
      ++inventory_version;
      if (completed) {
        std::erase(station_orders[s.index()], c.order);
        ++completions_in_interval;
        ++result.totals.orders_completed;
        refill_customer_backlog();
        assign_customer_orders();
        dirty = true;
      }
    } else {
      for (OrderId id : a.replenishment) {
        ReplenishmentOrder& ro = world.replenishment_orders[static_cast<std::size_t>(id)];
        if (ro.state == OrderState::Completed) continue;
        const bool completed = world.store_unit(id, a.pod);
        ++stock[static_cast<std::size_t>(ro.sku)];
        ++result.totals.station_units[s.index()];
        ++inventory_version;
        if (completed) {
          ro.in_progress = false;
          --open_replenishment;
          std::erase(station_orders[s.index()], id);
          if (cfg.kind == ScenarioKind::Parallel) {
            while (open_replenishment < cfg.params.replenishment_backlog) new_replenishment_order();
          }
          assign_replenishment_orders();
          assign_customer_orders();  // new stock may cover waiting orders
          dirty = true;
        }
        break;
      }
    }
    next_unit(r);
  }

  void begin_task(std::int32_t r, TaskKind kind, PodId pod, std::optional<StationId> station,
                  std::optional<LocationId> target) {
    Agent& a = agents[static_cast<std::size_t>(r)];
    RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    a.kind = kind;
    a.pod = pod;
    a.station = station;
    a.target = target;
    a.phase = Phase::ToPod;
    a.drop_in_place = false;
    pod_reserved[pod.index()] = r;
    if (target) location_reserved[target->index()] = r;
    robot.task = TaskDescriptor{kind, pod, station, target};
    start_route(r, world.location(*world.pod(pod).location()).waypoint);
  }

  bool try_pick_task(std::int32_t r) {
    const RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    const StationId s = *robot.home_station;
    const auto& orders = station_orders[s.index()];
    std::vector<std::size_t> touched;
    for (OrderId id : orders) {
      for (const OrderLine& l : world.customer_orders[static_cast<std::size_t>(id)].lines) {
        if (l.unreserved() <= 0) continue;
        const auto k = static_cast<std::size_t>(l.sku);
        if (need[k] == 0) touched.push_back(k);
        need[k] += l.unreserved();
      }
    }
    std::optional<PodId> pod;
    if (!touched.empty()) {
      const auto movable = movable_mask(r);
      pod = select_pick_pod(world, need, movable, paths->times_from(robot.node));
    }
    for (std::size_t k : touched) need[k] = 0;
    if (!pod) return false;

    Agent& a = agents[static_cast<std::size_t>(r)];
    a.claims.clear();
    const Pod& p = world.pod(*pod);
    for (OrderId id : orders) {
      CustomerOrder& o = world.customer_orders[static_cast<std::size_t>(id)];
      for (std::size_t i = 0; i < o.lines.size(); ++i) {
        OrderLine& l = o.lines[i];
        int left = p.inventory.count(l.sku);
        for (const Claim& c : a.claims) {
          if (world.customer_orders[static_cast<std::size_t>(c.order)].lines[c.line].sku == l.sku) --left;
        }
        const int take = std::min(left, l.unreserved());
        for (int u = 0; u < take; ++u) a.claims.push_back({id, i});
        l.reserved += std::max(take, 0);
      }
    }
    begin_task(r, TaskKind::Pick, *pod, s, std::nullopt);
    return true;
  }

  bool try_replenish_task(std::int32_t r) {
    const RobotAgent& robot = world.robots[static_cast<std::size_t>(r)];
    const StationId s = *robot.home_station;
    std::vector<OrderId> waiting;
    int min_left = std::numeric_limits<int>::max();
    for (OrderId id : station_orders[s.index()]) {
      const ReplenishmentOrder& ro = world.replenishment_orders[static_cast<std::size_t>(id)];
      if (ro.in_progress || ro.state == OrderState::Completed) continue;
      waiting.push_back(id);
      min_left = std::min(min_left, ro.quantity - ro.stored);
    }
    if (waiting.empty()) return false;
    const auto movable = movable_mask(r);
    const auto pod = select_replenish_pod(world, min_left, movable, paths->times_to(world.station(s).waypoint));
    if (!pod) return false;
    Agent& a = agents[static_cast<std::size_t>(r)];
    a.replenishment.clear();
    int room = world.pod(*pod).free_capacity();
    for (OrderId id : waiting) {
      ReplenishmentOrder& ro = world.replenishment_orders[static_cast<std::size_t>(id)];
      const int left = ro.quantity - ro.stored;
      if (left > room) continue;
      ro.in_progress = true;
      a.replenishment.push_back(id);
      room -= left;
    }
    begin_task(r, TaskKind::Replenish, *pod, s, std::nullopt);
    return true;
  }

  bool try_active_move(std::int32_t r) {
    if (cfg.mechanism.active == ActiveMechanism::None || world.pods.empty()) return false;
    const auto free = free_mask(r);
    const auto movable = movable_mask(r);
    const PolicyView view{world, *paths, ranks, cache, scores(), free, movable};
    const auto move = next_active_move(cfg.mechanism, view);
    if (!move) return false;
    begin_task(r, TaskKind::Reposition, move->pod, std::nullopt, move->to);
    return true;
  }

  void dispatch() {
    dirty = false;
    const bool night = cfg.kind == ScenarioKind::DownPeriod && !open;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (agents[i].phase != Phase::Idle) continue;
      const auto r = static_cast<std::int32_t>(i);
      if (night) {
        if (cfg.night_repositioning()) try_active_move(r);
        continue;
      }
      switch (world.robots[i].role) {
        case RobotRole::PickSupply: try_pick_task(r); break;
        case RobotRole::ReplenishSupply: try_replenish_task(r); break;
        case RobotRole::Repositioner: try_active_move(r); break;
      }
    }
  }

  // -- scenario events ----------------------------------------------------
  void on_close() {
    open = false;
    for (int k = 0; k < cfg.params.night_orders_per_station * world.pick_station_count(); ++k) new_customer_order();
    dirty = true;
  }

  void on_open() {
    open = true;
    assign_customer_orders();
    assign_replenishment_orders();
    dirty = true;
  }

  void on_replenishment_call() {
    const double goal = cfg.params.target_fill * static_cast<double>(world.total_capacity());
    const double missing = goal - static_cast<double>(world.total_units() + world.units_in_pending_replenishment());
    const int size = cfg.params.replenishment_order_size;
    const long count = missing > 0 ? static_cast<long>(std::ceil(missing / size)) : 0;
    for (long k = 0; k < count; ++k) new_replenishment_order();
    assign_replenishment_orders();
  }

  void on_refresh() {
    if (!world.pods.empty()) cache.threshold = compute_cache_threshold(scores().combined, cache.size());
    dirty = true;
  }

  void check_invariants() {
    ++result.totals.invariant_checks;
    long handled_pick = 0;
    for (const Station& s : world.stations) {
      if (s.kind == StationKind::Pick) handled_pick += result.totals.station_units[s.id.index()];
    }
    if (world.total_units() + world.units_picked != world.initial_units + world.units_replenished ||
        handled_pick != world.units_picked) {
      ++result.totals.unit_conservation_violations;
    }
    if (placement_violations(world) != 0) ++result.totals.placement_violations;
  }

  void watchdog() {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const Agent& a = agents[i];
      if (a.waiting_for && now - a.waiting_since > cfg.params.deadlock_timeout) {
        const std::int32_t h = holder[a.waiting_for->index()];
        throw std::runtime_error(fmt::format(
            "deadlock: robot {} has waited {:.0f} s at node {} for node {} held by robot {} (t = {:.0f} s)", i,
            now - a.waiting_since, world.robots[i].node.value(), a.waiting_for->value(), h, now));
      }
    }
  }

  void on_sample() {
    Sample s;
    s.time = now;
    s.orders_per_hour = static_cast<double>(completions_in_interval) * kHour / cfg.params.sample_interval;
    const PodScores& sc = scores();
    s.well_sortedness = world.pods.empty() ? 0.0 : well_sortedness(world, ranks, sc).average;
    s.mean_trip_time = trip_count > 0 ? trip_time_sum / static_cast<double>(trip_count) : 0.0;
    s.fill_level = fill_level(world);
    result.series.push_back(s);
    completions_in_interval = 0;
    trip_time_sum = 0.0;
    trip_count = 0;
    check_invariants();
    watchdog();

    if (cfg.params.record_heatmaps && cfg.kind == ScenarioKind::DownPeriod && now > 0.0) {
      const Seconds tod = time_of_day(now);
      if (tod == 22 * kHour || tod == 6 * kHour) result.heatmaps.push_back(make_heatmap(world, sc, now));
    }
  }

  void handle(const Event& e) {
    switch (e.kind) {
      case EventKind::Arrival:
        on_arrival(e.subject);
        break;
      case EventKind::TurnDone:
        start_run(e.subject);
        break;
      case EventKind::LiftDone:
        on_lift_done(e.subject);
        break;
      case EventKind::DropDone:
        on_drop_done(e.subject);
        break;
      case EventKind::Retry:
        on_retry(e.subject);
        break;
      case EventKind::UnitHandled:
        on_unit_handled(e.subject);
        break;
      case EventKind::Close: on_close(); break;
      case EventKind::Open: on_open(); break;
      case EventKind::ReplenishmentCall: on_replenishment_call(); break;
      case EventKind::Sample: on_sample(); break;
      case EventKind::Refresh: on_refresh(); break;
    }
  }

  void run_until(Seconds t) {
    t = std::min(t, cfg.horizon);
    while (!events.empty() && events.top().time <= t) {
      const Event e = events.top();
      events.pop();
      now = e.time;
      world.now = now;
      handle(e);
      if (dirty) dispatch();
    }
    now = std::max(now, t);
    world.now = now;
  }

  double active_hours() const {
    if (cfg.kind == ScenarioKind::Parallel) return cfg.horizon / kHour;
    double active = 0.0;
    for (Seconds day = 0.0; day < cfg.horizon; day += kDay) {
      active += std::min(day + 16 * kHour, cfg.horizon) - day;
    }
    return active / kHour;
  }
};

Simulation::Impl::Impl(const ScenarioConfig& c) : cfg(c) {
  cfg.validate();
  const SimulationParams& p = cfg.params;

  // Substreams are drawn in a fixed order so each process keeps its own
  // random sequence regardless of how the others are consumed.
  std::mt19937_64 master(cfg.seed);
  std::mt19937_64 catalog_rng(master());
  std::mt19937_64 inventory_rng(master());
  customer_rng.seed(master());
  replenish_rng.seed(master());

  world = generate_layout(cfg.layout, p.layout_options);
  world.set_catalog(draw_catalog(static_cast<std::size_t>(p.sku_count), p.sku_gamma_shape, p.sku_gamma_scale,
                                 catalog_rng));
  fill_initial_inventory(world, p.target_fill, p.initial_fill_chunk, inventory_rng);
  customer_skus = std::discrete_distribution<SkuId>(world.catalog.frequency.begin(), world.catalog.frequency.end());
  replenish_skus = customer_skus;

  paths = std::make_unique<PathTimeEstimator>(
      world.graph, PathTimeParams{cfg.kinematics.max_speed, cfg.kinematics.turn_time_90});
  ranks = compute_ranks(compute_prominence_field(world, *paths));
  cache = build_cache_set(ranks, cfg.mechanism.cache_fraction);

  stock.assign(world.catalog.size(), 0);
  committed.assign(world.catalog.size(), 0);
  need.assign(world.catalog.size(), 0);
  for (const Pod& pod : world.pods) {
    for (const SkuUnits& u : pod.inventory.items()) stock[static_cast<std::size_t>(u.sku)] += u.units;
  }
  pod_reserved.assign(world.pods.size(), kNobody);
  location_reserved.assign(world.locations.size(), kNobody);
  holder.assign(world.graph.size(), kNobody);
  waiters.resize(world.graph.size());
  station_orders.resize(world.stations.size());
  result.totals.station_units.assign(world.stations.size(), 0);

  // Robots: per pick station the split's replenishment, pick and repositioner
  // robots. Each starts parked in the free storage leaf closest to its home station.
  const RobotSplit split = robot_split(cfg.setup);
  const auto picks = world.stations_of(StationKind::Pick);
  const auto reps = world.stations_of(StationKind::Replenish);
  const int n_pick = static_cast<int>(picks.size());
  std::vector<std::pair<RobotRole, StationId>> roster;
  for (int k = 0; k < split.replenish * n_pick && !reps.empty(); ++k) {
    roster.emplace_back(RobotRole::ReplenishSupply, reps[static_cast<std::size_t>(k) % reps.size()]);
  }
  for (int k = 0; k < split.pick * n_pick; ++k) {
    roster.emplace_back(RobotRole::PickSupply, picks[static_cast<std::size_t>(k / split.pick)]);
  }
  for (int k = 0; k < split.repositioner * n_pick; ++k) {
    roster.emplace_back(RobotRole::Repositioner, picks[static_cast<std::size_t>(k / split.repositioner)]);
  }
  if (roster.size() > world.locations.size()) throw std::invalid_argument("more robots than storage locations");
  std::vector<bool> taken(world.locations.size(), false);
  for (const auto& [role, home] : roster) {
    const Point hp = world.graph.position(world.station(home).waypoint);
    std::optional<LocationId> best;
    double best_d = 0.0;
    for (const StorageLocation& l : world.locations) {
      if (taken[l.id.index()]) continue;
      const double d = distance(world.graph.position(l.waypoint), hp);
      if (!best || d < best_d) {
        best = l.id;
        best_d = d;
      }
    }
    taken[best->index()] = true;
    RobotAgent robot;
    robot.id = RobotId{world.robots.size()};
    robot.role = role;
    robot.home_station = home;
    robot.node = world.location(*best).waypoint;
    robot.position = world.graph.position(robot.node);
    holder[robot.node.index()] = static_cast<std::int32_t>(world.robots.size());
    world.robots.push_back(robot);
  }
  agents.resize(world.robots.size());
  result.totals.robots = static_cast<int>(world.robots.size());

  // Scenario calendar. Phase changes are queued before samples so that a
  // sample at the same instant sees the new phase.
  if (cfg.kind == ScenarioKind::DownPeriod) {
    for (Seconds day = 0.0; day <= cfg.horizon; day += kDay) {
      if (day + 10 * kHour <= cfg.horizon) schedule(day + 10 * kHour, EventKind::ReplenishmentCall);
      if (day + 16 * kHour <= cfg.horizon) schedule(day + 16 * kHour, EventKind::Close);
      if (day + kDay <= cfg.horizon) schedule(day + kDay, EventKind::Open);
    }
  } else {
    for (int k = 0; k < p.replenishment_backlog; ++k) new_replenishment_order();
  }
  for (long k = 0; k * p.threshold_refresh <= cfg.horizon; ++k) schedule(k * p.threshold_refresh, EventKind::Refresh);
  for (long k = 0; k * p.sample_interval <= cfg.horizon; ++k) schedule(k * p.sample_interval, EventKind::Sample);

  refill_customer_backlog();
  assign_customer_orders();
  assign_replenishment_orders();
  if (!world.pods.empty()) cache.threshold = compute_cache_threshold(scores().combined, cache.size());
  dispatch();
}

Simulation::Simulation(const ScenarioConfig& config) : impl_(std::make_unique<Impl>(config)) {}
Simulation::~Simulation() = default;

void Simulation::run_until(Seconds t) { impl_->run_until(t); }
Seconds Simulation::now() const { return impl_->now; }
const World& Simulation::world() const { return impl_->world; }
const RankTable& Simulation::ranks() const { return impl_->ranks; }
bool Simulation::stations_open() const { return impl_->open; }
PodScores Simulation::scores() const { return impl_->scores(); }

RunResult Simulation::finish() {
  Impl& s = *impl_;
  s.run_until(s.cfg.horizon);
  RunResult& r = s.result;
  r.layout = s.cfg.layout.name;
  r.scenario = to_string(s.cfg.kind);
  r.mechanism = s.cfg.mechanism.label();
  r.setup = to_string(s.cfg.setup);
  r.seed = s.cfg.seed;
  r.horizon = s.cfg.horizon;
  r.totals.units_picked = s.world.units_picked;
  r.totals.units_replenished = s.world.units_replenished;
  r.totals.active_hours = s.active_hours();
  const int stations = s.world.pick_station_count();
  if (stations > 0 && r.totals.active_hours > 0) {
    const double per_hour = static_cast<double>(r.totals.units_picked) / r.totals.active_hours;
    r.utrs = utrs(per_hour, stations, s.cfg.params.layout_options.pick_unit_time);
  }
  return r;
}

RunResult run(const ScenarioConfig& config) {
  Simulation sim(config);
  return sim.finish();
}

}  // namespace rmfs
