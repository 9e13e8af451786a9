#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rmfs/engine.hpp"

namespace rmfs {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One table cell: a scenario run `repetitions` times with seeds
/// base_seed, base_seed + 1, ...
struct PlanCell {
  std::string id;
  ScenarioConfig scenario;  // scenario.seed is ignored; seeds come from base_seed
  std::uint64_t base_seed = 1;
  friend bool operator==(const PlanCell&, const PlanCell&) = default;
};

struct ExperimentPlan {
  std::vector<PlanCell> cells;
  int repetitions = 5;
  std::filesystem::path output_dir = "results";
  int parallel = 1;

  /// Seed of repetition `rep` of `cell`.
  static std::uint64_t seed_for(const PlanCell& cell, int rep) { return cell.base_seed + static_cast<std::uint64_t>(rep); }

  /// Throws ConfigError on duplicate or unusable cell ids and invalid scenarios.
  void validate() const;
  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

/// Parses a YAML plan. Top-level scenario keys form a single cell, or act as
/// defaults for every entry of an optional `cells:` list. Unknown keys are
/// rejected with the list of accepted ones.
ExperimentPlan parse_plan(std::string_view yaml_text);
ExperimentPlan load_plan(const std::filesystem::path& file);

/// Emits a plan that parse_plan reads back to an equal plan.
std::string serialize_plan(const ExperimentPlan& plan);

/// Resolves a layout name ("Small", "Wide", "Long", "Large"); ConfigError otherwise.
LayoutSpec layout_by_name(std::string_view name);

}  // namespace rmfs
