#include "rmfs/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace rmfs {

void SkuCatalog::validate() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < frequency.size(); ++i) {
    if (!(frequency[i] >= 0.0 && frequency[i] <= 1.0)) {
      throw std::invalid_argument(fmt::format("sku {} has frequency {} outside [0,1]", i, frequency[i]));
    }
    sum += frequency[i];
  }
  if (frequency.empty() || std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("sku frequencies sum to {}, expected 1", sum));
  }
}

SkuCatalog SkuCatalog::from_weights(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("sku weights must have a positive sum");
  SkuCatalog c;
  c.frequency.reserve(weights.size());
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("sku weights must be non-negative");
    c.frequency.push_back(w / total);
  }
  return c;
}

SkuCatalog SkuCatalog::uniform(std::size_t n) {
  std::vector<double> w(n, 1.0);
  return from_weights(w);
}

SkuCatalog draw_catalog(std::size_t sku_count, double shape, double scale, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(shape, scale);
  std::vector<double> w(sku_count);
  for (double& x : w) x = gamma(rng);
  return SkuCatalog::from_weights(w);
}

// ---------------------------------------------------------------------------

int Inventory::count(SkuId sku) const {
  const auto it = std::lower_bound(items_.begin(), items_.end(), sku,
                                   [](const SkuUnits& u, SkuId s) { return u.sku < s; });
  return (it != items_.end() && it->sku == sku) ? it->units : 0;
}

void Inventory::add(SkuId sku, int units) {
  if (units < 0) throw std::invalid_argument("cannot add a negative unit count");
  if (units == 0) return;
  auto it = std::lower_bound(items_.begin(), items_.end(), sku,
                             [](const SkuUnits& u, SkuId s) { return u.sku < s; });
  if (it != items_.end() && it->sku == sku) {
    it->units += units;
  } else {
    items_.insert(it, SkuUnits{sku, units});
  }
  total_ += units;
}

void Inventory::remove(SkuId sku, int units) {
  auto it = std::lower_bound(items_.begin(), items_.end(), sku,
                             [](const SkuUnits& u, SkuId s) { return u.sku < s; });
  if (it == items_.end() || it->sku != sku || it->units < units || units < 0) {
    throw std::logic_error(fmt::format("inventory holds {} of sku {}, cannot remove {}",
                                       count(sku), sku, units));
  }
  it->units -= units;
  total_ -= units;
  if (it->units == 0) items_.erase(it);
}

std::optional<LocationId> Pod::location() const {
  if (const auto* s = std::get_if<StoredAt>(&placement)) return s->location;
  return std::nullopt;
}

const char* to_string(RobotRole r) {
  switch (r) {
    case RobotRole::PickSupply: return "pick";
    case RobotRole::ReplenishSupply: return "replenish";
    case RobotRole::Repositioner: return "reposition";
  }
  return "?";
}

bool CustomerOrder::done() const {
  return std::all_of(lines.begin(), lines.end(), [](const OrderLine& l) { return l.remaining() == 0; });
}

// ---------------------------------------------------------------------------

void LayoutSpec::validate() const {
  const auto positive = [&](int v, const char* what) {
    if (v < 1) throw std::invalid_argument(fmt::format("layout '{}': {} must be >= 1, got {}", name, what, v));
  };
  positive(pick_stations, "pick stations");
  positive(replenish_stations, "replenish stations");
  positive(aisles_horizontal, "horizontal aisles");
  positive(aisles_vertical, "vertical aisles");
  if (pods < 0) throw std::invalid_argument(fmt::format("layout '{}': pod count is negative", name));
  const int capacity = storage_location_count(*this);
  if (pods > capacity) {
    throw std::invalid_argument(fmt::format(
        "layout '{}': {} pods requested but the {}x{} aisle grid only has {} storage locations",
        name, pods, aisles_horizontal, aisles_vertical, capacity));
  }
}

const std::vector<LayoutSpec>& LayoutSpec::builtins() {
  static const std::vector<LayoutSpec> table = {
      {"Small", 4, 4, 8, 10, 673},
      {"Wide", 8, 8, 16, 10, 1271},
      {"Long", 4, 4, 8, 22, 1407},
      {"Large", 8, 8, 16, 22, 2658},
  };
  return table;
}

std::optional<LayoutSpec> LayoutSpec::builtin(std::string_view name) {
  for (const auto& s : builtins()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

int storage_location_count(const LayoutSpec& spec) {
  return 8 * (spec.aisles_horizontal + 1) * (spec.aisles_vertical + 1);
}

// ---------------------------------------------------------------------------

std::vector<StationId> World::stations_of(StationKind kind) const {
  std::vector<StationId> out;
  for (const Station& s : stations) {
    if (s.kind == kind) out.push_back(s.id);
  }
  return out;
}

int World::pick_station_count() const {
  return static_cast<int>(std::count_if(stations.begin(), stations.end(),
                                        [](const Station& s) { return s.kind == StationKind::Pick; }));
}

void World::set_catalog(SkuCatalog c) {
  c.validate();
  catalog = std::move(c);
  demand_.assign(catalog.size(), 0);
  for (const CustomerOrder& o : customer_orders) {
    if (o.state == OrderState::Completed) continue;
    for (const OrderLine& l : o.lines) demand_.at(static_cast<std::size_t>(l.sku)) += l.remaining();
  }
}

int World::demand(SkuId sku) const {
  if (!catalog.contains(sku)) throw std::out_of_range(fmt::format("unknown sku {}", sku));
  return demand_[static_cast<std::size_t>(sku)];
}

OrderId World::add_customer_order(std::vector<OrderLine> lines, Seconds t) {
  if (lines.empty()) throw std::invalid_argument("customer order needs at least one line");
  for (const OrderLine& l : lines) {
    if (!catalog.contains(l.sku)) throw std::out_of_range(fmt::format("unknown sku {}", l.sku));
    if (l.quantity < 1) throw std::invalid_argument("order line quantity must be >= 1");
  }
  CustomerOrder o;
  o.id = static_cast<OrderId>(customer_orders.size());
  o.lines = std::move(lines);
  o.created = t;
  for (const OrderLine& l : o.lines) demand_[static_cast<std::size_t>(l.sku)] += l.remaining();
  ++backlog_;
  customer_orders.push_back(std::move(o));
  return customer_orders.back().id;
}

bool World::pick_unit(OrderId order, std::size_t line, PodId pod_id, Seconds t) {
  CustomerOrder& o = customer_orders.at(static_cast<std::size_t>(order));
  OrderLine& l = o.lines.at(line);
  if (o.state == OrderState::Completed || l.remaining() <= 0) {
    throw std::logic_error(fmt::format("order {} line {} has nothing left to pick", order, line));
  }
  pod(pod_id).inventory.remove(l.sku, 1);
  ++l.picked;
  --demand_[static_cast<std::size_t>(l.sku)];
  ++units_picked;
  if (o.done()) {
    o.state = OrderState::Completed;
    o.completed = t;
    --backlog_;
    return true;
  }
  return false;
}

OrderId World::add_replenishment_order(SkuId sku, int quantity, Seconds t) {
  if (!catalog.contains(sku)) throw std::out_of_range(fmt::format("unknown sku {}", sku));
  if (quantity < 1) throw std::invalid_argument("replenishment quantity must be >= 1");
  ReplenishmentOrder r;
  r.id = static_cast<OrderId>(replenishment_orders.size());
  r.sku = sku;
  r.quantity = quantity;
  r.created = t;
  replenishment_orders.push_back(r);
  return r.id;
}

bool World::store_unit(OrderId order, PodId pod_id) {
  ReplenishmentOrder& r = replenishment_orders.at(static_cast<std::size_t>(order));
  if (r.state == OrderState::Completed) throw std::logic_error("replenishment order already complete");
  Pod& p = pod(pod_id);
  if (p.free_capacity() < 1) throw std::logic_error(fmt::format("pod {} is full", pod_id.value()));
  p.inventory.add(r.sku, 1);
  ++r.stored;
  ++units_replenished;
  if (r.stored == r.quantity) {
    r.state = OrderState::Completed;
    return true;
  }
  return false;
}

void World::store_pod(PodId pod_id, LocationId loc) {
  StorageLocation& l = location(loc);
  if (l.occupant) {
    throw std::logic_error(fmt::format("location {} already holds pod {}", loc.value(), l.occupant->value()));
  }
  Pod& p = pod(pod_id);
  if (p.stored()) throw std::logic_error(fmt::format("pod {} is already stored", pod_id.value()));
  l.occupant = pod_id;
  p.placement = StoredAt{loc};
}

void World::release_pod(PodId pod_id, Placement next) {
  Pod& p = pod(pod_id);
  const auto loc = p.location();
  if (!loc) throw std::logic_error(fmt::format("pod {} is not stored", pod_id.value()));
  location(*loc).occupant.reset();
  p.placement = next;
}

long World::total_units() const {
  long sum = 0;
  for (const Pod& p : pods) sum += p.inventory.total();
  return sum;
}

long World::total_capacity() const {
  long sum = 0;
  for (const Pod& p : pods) sum += p.capacity;
  return sum;
}

long World::units_in_pending_replenishment() const {
  long sum = 0;
  for (const ReplenishmentOrder& r : replenishment_orders) {
    if (r.state != OrderState::Completed) sum += r.quantity - r.stored;
  }
  return sum;
}

double fill_level(const World& world) {
  const long cap = world.total_capacity();
  if (cap == 0) return 0.0;
  return static_cast<double>(world.total_units()) / static_cast<double>(cap);
}

void fill_initial_inventory(World& world, double target, int chunk, std::mt19937_64& rng) {
  if (chunk < 1) throw std::invalid_argument("inventory chunk must be >= 1");
  if (world.pods.empty()) return;
  world.catalog.validate();
  std::discrete_distribution<SkuId> pick_sku(world.catalog.frequency.begin(), world.catalog.frequency.end());
  std::uniform_int_distribution<std::size_t> pick_pod(0, world.pods.size() - 1);

  const long goal = static_cast<long>(std::floor(target * static_cast<double>(world.total_capacity())));
  long remaining = goal - world.total_units();
  while (remaining > 0) {
    const SkuId sku = pick_sku(rng);
    const int amount = static_cast<int>(std::min<long>(chunk, remaining));
    // Probe pods from a random start; take the first with room for the chunk,
    // otherwise the one with the most room.
    const std::size_t start = pick_pod(rng);
    std::size_t best = start;
    for (std::size_t k = 0; k < world.pods.size(); ++k) {
      const std::size_t i = (start + k) % world.pods.size();
      if (world.pods[i].free_capacity() >= amount) {
        best = i;
        break;
      }
      if (world.pods[i].free_capacity() > world.pods[best].free_capacity()) best = i;
    }
    const int put = std::min(amount, world.pods[best].free_capacity());
    if (put <= 0) break;
    world.pods[best].inventory.add(sku, put);
    remaining -= put;
  }
  world.initial_units = world.total_units();
  world.set_catalog(world.catalog);
}

int placement_violations(const World& world) {
  int bad = 0;
  for (const StorageLocation& l : world.locations) {
    if (!l.occupant) continue;
    const auto loc = world.pod(*l.occupant).location();
    if (!loc || *loc != l.id) ++bad;
  }
  for (const Pod& p : world.pods) {
    const auto loc = p.location();
    if (!loc) continue;
    const auto& occ = world.location(*loc).occupant;
    if (!occ || *occ != p.id) ++bad;
  }
  return bad;
}

}  // namespace rmfs
