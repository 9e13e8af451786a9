#include "rmfs/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace rmfs {

LayoutSpec layout_by_name(std::string_view name) {
  if (auto spec = LayoutSpec::builtin(name)) return *spec;
  std::vector<std::string> names;
  for (const LayoutSpec& s : LayoutSpec::builtins()) names.push_back(s.name);
  throw ConfigError(fmt::format("unknown layout '{}'; accepted: {} or a map with keys name, pick_stations, "
                                "replenish_stations, aisles_horizontal, aisles_vertical, pods",
                                name, fmt::join(names, ", ")));
}

void ExperimentPlan::validate() const {
  if (repetitions < 1) throw ConfigError(fmt::format("repetitions must be >= 1, got {}", repetitions));
  if (parallel < 1) throw ConfigError(fmt::format("parallel must be >= 1, got {}", parallel));
  std::set<std::string> seen;
  for (const PlanCell& c : cells) {
    if (c.id.empty() || !std::all_of(c.id.begin(), c.id.end(), [](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
        })) {
      throw ConfigError(fmt::format("cell id '{}' must be non-empty and use only letters, digits, '-', '_', '.'", c.id));
    }
    if (!seen.insert(c.id).second) throw ConfigError(fmt::format("duplicate cell id '{}'", c.id));
    try {
      c.scenario.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("cell '{}': {}", c.id, e.what()));
    }
  }
}

namespace {

// -- reading ---------------------------------------------------------------

template <class T>
T scalar(const YAML::Node& n, std::string_view key, const char* expected) {
  if (!n.IsScalar()) throw ConfigError(fmt::format("key '{}': expected {}", key, expected));
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("key '{}': expected {}, got '{}'", key, expected, n.Scalar()));
  }
}

double number(const YAML::Node& n, std::string_view key) { return scalar<double>(n, key, "a number"); }
int integer(const YAML::Node& n, std::string_view key) { return scalar<int>(n, key, "an integer"); }
std::string text(const YAML::Node& n, std::string_view key) { return scalar<std::string>(n, key, "a string"); }

using Setter = std::function<void(const YAML::Node&)>;

void apply_map(const YAML::Node& node, std::string_view section, const std::map<std::string, Setter>& setters) {
  if (!node.IsMap()) throw ConfigError(fmt::format("'{}' must be a map", section));
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const auto it = setters.find(key);
    if (it == setters.end()) {
      std::vector<std::string> names;
      for (const auto& [name, _] : setters) names.push_back(name);
      throw ConfigError(
          fmt::format("unknown key '{}' in {}; accepted keys: {}", key, section, fmt::join(names, ", ")));
    }
    it->second(kv.second);
  }
}

LayoutSpec read_layout(const YAML::Node& n) {
  if (n.IsScalar()) return layout_by_name(n.Scalar());
  LayoutSpec s;
  std::map<std::string, Setter> keys{
      {"name", [&](const YAML::Node& v) { s.name = text(v, "layout.name"); }},
      {"pick_stations", [&](const YAML::Node& v) { s.pick_stations = integer(v, "layout.pick_stations"); }},
      {"replenish_stations", [&](const YAML::Node& v) { s.replenish_stations = integer(v, "layout.replenish_stations"); }},
      {"aisles_horizontal", [&](const YAML::Node& v) { s.aisles_horizontal = integer(v, "layout.aisles_horizontal"); }},
      {"aisles_vertical", [&](const YAML::Node& v) { s.aisles_vertical = integer(v, "layout.aisles_vertical"); }},
      {"pods", [&](const YAML::Node& v) { s.pods = integer(v, "layout.pods"); }},
  };
  apply_map(n, "layout", keys);
  if (s.name.empty()) s.name = "custom";
  return s;
}

struct CellDraft {
  std::optional<std::string> id;
  std::optional<LayoutSpec> layout;
  std::optional<ScenarioKind> kind;
  std::optional<std::string> mechanism;
  std::optional<Setup> setup;
  std::optional<Seconds> horizon;
  std::optional<std::uint64_t> base_seed;
  KinematicsConfig kinematics;
  SimulationParams params;
  double cache_fraction = MechanismConfig{}.cache_fraction;
  ScoringWeights weights;
};

const std::vector<std::string> kCellKeys{"id",        "layout",        "scenario",   "mechanism", "setup",
                                         "horizon_hours", "horizon_s", "base_seed", "kinematics", "model"};

void read_kinematics(const YAML::Node& n, KinematicsConfig& k) {
  apply_map(n, "kinematics",
            {{"max_speed", [&](const YAML::Node& v) { k.max_speed = number(v, "kinematics.max_speed"); }},
             {"acceleration", [&](const YAML::Node& v) { k.acceleration = number(v, "kinematics.acceleration"); }},
             {"deceleration", [&](const YAML::Node& v) { k.deceleration = number(v, "kinematics.deceleration"); }},
             {"turn_time_90", [&](const YAML::Node& v) { k.turn_time_90 = number(v, "kinematics.turn_time_90"); }},
             {"lift_time", [&](const YAML::Node& v) { k.lift_time = number(v, "kinematics.lift_time"); }}});
}

void read_model(const YAML::Node& n, CellDraft& d) {
  SimulationParams& p = d.params;
  const auto i = [](int& field, const char* key) {
    return Setter([&field, key](const YAML::Node& v) { field = integer(v, key); });
  };
  const auto x = [](double& field, const char* key) {
    return Setter([&field, key](const YAML::Node& v) { field = number(v, key); });
  };
  apply_map(n, "model",
            {{"sku_count", i(p.sku_count, "model.sku_count")},
             {"sku_gamma_shape", x(p.sku_gamma_shape, "model.sku_gamma_shape")},
             {"sku_gamma_scale", x(p.sku_gamma_scale, "model.sku_gamma_scale")},
             {"order_lines_min", i(p.order_lines_min, "model.order_lines_min")},
             {"order_lines_max", i(p.order_lines_max, "model.order_lines_max")},
             {"customer_backlog", i(p.customer_backlog, "model.customer_backlog")},
             {"night_orders_per_station", i(p.night_orders_per_station, "model.night_orders_per_station")},
             {"replenishment_backlog", i(p.replenishment_backlog, "model.replenishment_backlog")},
             {"replenishment_order_size", i(p.replenishment_order_size, "model.replenishment_order_size")},
             {"target_fill", x(p.target_fill, "model.target_fill")},
             {"initial_fill_chunk", i(p.initial_fill_chunk, "model.initial_fill_chunk")},
             {"station_order_pool", i(p.station_order_pool, "model.station_order_pool")},
             {"replenishment_order_pool", i(p.replenishment_order_pool, "model.replenishment_order_pool")},
             {"pod_capacity", i(p.layout_options.pod_capacity, "model.pod_capacity")},
             {"queue_length", i(p.layout_options.queue_length, "model.queue_length")},
             {"pick_unit_time", x(p.layout_options.pick_unit_time, "model.pick_unit_time")},
             {"replenish_unit_time", x(p.layout_options.replenish_unit_time, "model.replenish_unit_time")},
             {"sample_interval_s", x(p.sample_interval, "model.sample_interval_s")},
             {"threshold_refresh_s", x(p.threshold_refresh, "model.threshold_refresh_s")},
             {"deadlock_timeout_s", x(p.deadlock_timeout, "model.deadlock_timeout_s")},
             {"record_heatmaps",
              [&](const YAML::Node& v) { p.record_heatmaps = scalar<bool>(v, "model.record_heatmaps", "true or false"); }},
             {"cache_fraction", x(d.cache_fraction, "model.cache_fraction")},
             {"speed_weight", x(d.weights.speed, "model.speed_weight")},
             {"utility_weight", x(d.weights.utility, "model.utility_weight")}});
}

void read_cell_keys(const YAML::Node& node, CellDraft& d, bool allow_plan_keys) {
  std::map<std::string, Setter> keys{
      {"id", [&](const YAML::Node& v) { d.id = text(v, "id"); }},
      {"layout", [&](const YAML::Node& v) { d.layout = read_layout(v); }},
      {"scenario",
       [&](const YAML::Node& v) {
         try {
           d.kind = parse_scenario_kind(text(v, "scenario"));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(fmt::format("key 'scenario': {}", e.what()));
         }
       }},
      {"mechanism", [&](const YAML::Node& v) { d.mechanism = text(v, "mechanism"); }},
      {"setup",
       [&](const YAML::Node& v) {
         try {
           d.setup = parse_setup(text(v, "setup"));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(fmt::format("key 'setup': {}", e.what()));
         }
       }},
      {"horizon_hours", [&](const YAML::Node& v) { d.horizon = number(v, "horizon_hours") * kHour; }},
      {"horizon_s", [&](const YAML::Node& v) { d.horizon = number(v, "horizon_s"); }},
      {"base_seed",
       [&](const YAML::Node& v) { d.base_seed = scalar<std::uint64_t>(v, "base_seed", "a non-negative integer"); }},
      {"kinematics", [&](const YAML::Node& v) { read_kinematics(v, d.kinematics); }},
      {"model", [&](const YAML::Node& v) { read_model(v, d); }},
  };
  if (allow_plan_keys) {
    for (const char* k : {"output", "parallel", "repetitions", "cells"}) keys[k] = [](const YAML::Node&) {};
  }
  apply_map(node, allow_plan_keys ? "plan" : "cell", keys);
  if (node["horizon_hours"] && node["horizon_s"]) throw ConfigError("give either horizon_hours or horizon_s, not both");
}

PlanCell finish_cell(const CellDraft& d) {
  if (!d.layout) throw ConfigError("missing key 'layout' (a built-in name or a layout map)");
  if (!d.mechanism) throw ConfigError("missing key 'mechanism' (e.g. N-U; passive N/C/U, active C/U/none)");
  PlanCell c;
  ScenarioConfig& s = c.scenario;
  s.layout = *d.layout;
  s.kind = d.kind.value_or(ScenarioKind::DownPeriod);
  try {
    s.mechanism = MechanismConfig::parse(*d.mechanism);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("key 'mechanism': {}", e.what()));
  }
  s.mechanism.cache_fraction = d.cache_fraction;
  s.mechanism.weights = d.weights;
  s.setup = d.setup.value_or(s.kind == ScenarioKind::DownPeriod ? Setup::Activated : Setup::R1P3A0);
  if (d.horizon) s.horizon = *d.horizon;
  s.kinematics = d.kinematics;
  s.params = d.params;
  c.base_seed = d.base_seed.value_or(1);
  c.id = d.id.value_or(fmt::format("{}-{}-{}-{}", s.layout.name, to_string(s.kind), s.mechanism.label(),
                                   to_string(s.setup)));
  return c;
}

}  // namespace

ExperimentPlan parse_plan(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("not valid YAML: {}", e.what()));
  }
  ExperimentPlan plan;
  if (!root || root.IsNull()) throw ConfigError("empty config");
  if (!root.IsMap()) throw ConfigError("config must be a map of keys");

  CellDraft defaults;
  read_cell_keys(root, defaults, true);
  if (const auto n = root["output"]) plan.output_dir = text(n, "output");
  if (const auto n = root["parallel"]) plan.parallel = integer(n, "parallel");
  if (const auto n = root["repetitions"]) plan.repetitions = integer(n, "repetitions");

  if (const auto cells = root["cells"]) {
    if (!cells.IsSequence()) throw ConfigError("'cells' must be a list of maps");
    for (const auto& entry : cells) {
      CellDraft d = defaults;
      d.id.reset();
      read_cell_keys(entry, d, false);
      plan.cells.push_back(finish_cell(d));
    }
  } else {
    plan.cells.push_back(finish_cell(defaults));
  }
  for (PlanCell& c : plan.cells) c.scenario.repetitions = std::max(plan.repetitions, 1);
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", file.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_plan(ss.str());
}

// -- writing -----------------------------------------------------------------

namespace {

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

std::string serialize_plan(const ExperimentPlan& plan) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "output" << YAML::Value << plan.output_dir.string();
  out << YAML::Key << "parallel" << YAML::Value << plan.parallel;
  out << YAML::Key << "repetitions" << YAML::Value << plan.repetitions;
  out << YAML::Key << "cells" << YAML::Value << YAML::BeginSeq;
  for (const PlanCell& c : plan.cells) {
    const ScenarioConfig& s = c.scenario;
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << c.id;
    out << YAML::Key << "layout" << YAML::Value;
    if (LayoutSpec::builtin(s.layout.name) == s.layout) {
      out << s.layout.name;
    } else {
      out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.layout.name << YAML::Key << "pick_stations"
          << YAML::Value << s.layout.pick_stations << YAML::Key << "replenish_stations" << YAML::Value
          << s.layout.replenish_stations << YAML::Key << "aisles_horizontal" << YAML::Value
          << s.layout.aisles_horizontal << YAML::Key << "aisles_vertical" << YAML::Value << s.layout.aisles_vertical
          << YAML::Key << "pods" << YAML::Value << s.layout.pods << YAML::EndMap;
    }
    out << YAML::Key << "scenario" << YAML::Value << to_string(s.kind);
    out << YAML::Key << "mechanism" << YAML::Value << s.mechanism.label();
    out << YAML::Key << "setup" << YAML::Value << to_string(s.setup);
    out << YAML::Key << "horizon_s" << YAML::Value << num(s.horizon);
    out << YAML::Key << "base_seed" << YAML::Value << fmt::format("{}", c.base_seed);

    const KinematicsConfig& k = s.kinematics;
    out << YAML::Key << "kinematics" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "max_speed" << YAML::Value << num(k.max_speed);
    out << YAML::Key << "acceleration" << YAML::Value << num(k.acceleration);
    out << YAML::Key << "deceleration" << YAML::Value << num(k.deceleration);
    out << YAML::Key << "turn_time_90" << YAML::Value << num(k.turn_time_90);
    out << YAML::Key << "lift_time" << YAML::Value << num(k.lift_time);
    out << YAML::EndMap;

    const SimulationParams& p = s.params;
    const std::vector<std::pair<const char*, std::string>> model{
        {"sku_count", fmt::format("{}", p.sku_count)},
        {"sku_gamma_shape", num(p.sku_gamma_shape)},
        {"sku_gamma_scale", num(p.sku_gamma_scale)},
        {"order_lines_min", fmt::format("{}", p.order_lines_min)},
        {"order_lines_max", fmt::format("{}", p.order_lines_max)},
        {"customer_backlog", fmt::format("{}", p.customer_backlog)},
        {"night_orders_per_station", fmt::format("{}", p.night_orders_per_station)},
        {"replenishment_backlog", fmt::format("{}", p.replenishment_backlog)},
        {"replenishment_order_size", fmt::format("{}", p.replenishment_order_size)},
        {"target_fill", num(p.target_fill)},
        {"initial_fill_chunk", fmt::format("{}", p.initial_fill_chunk)},
        {"station_order_pool", fmt::format("{}", p.station_order_pool)},
        {"replenishment_order_pool", fmt::format("{}", p.replenishment_order_pool)},
        {"pod_capacity", fmt::format("{}", p.layout_options.pod_capacity)},
        {"queue_length", fmt::format("{}", p.layout_options.queue_length)},
        {"pick_unit_time", num(p.layout_options.pick_unit_time)},
        {"replenish_unit_time", num(p.layout_options.replenish_unit_time)},
        {"sample_interval_s", num(p.sample_interval)},
        {"threshold_refresh_s", num(p.threshold_refresh)},
        {"deadlock_timeout_s", num(p.deadlock_timeout)},
        {"record_heatmaps", p.record_heatmaps ? "true" : "false"},
        {"cache_fraction", num(s.mechanism.cache_fraction)},
        {"speed_weight", num(s.mechanism.weights.speed)},
        {"utility_weight", num(s.mechanism.weights.utility)},
    };
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    for (const auto& [key, value] : model) out << YAML::Key << key << YAML::Value << value;
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace rmfs
