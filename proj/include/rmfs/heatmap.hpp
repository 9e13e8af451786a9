#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "rmfs/scoring.hpp"
#include "rmfs/world.hpp"

namespace rmfs {

/// Combined score per storage-grid cell at one instant. Cells are row-major
/// with row 0 on the northern edge; empty locations hold nullopt.
struct HeatmapGrid {
  Seconds time = 0.0;
  int rows = 0;
  int cols = 0;
  std::vector<std::optional<double>> cells;

  const std::optional<double>& at(int row, int col) const { return cells[static_cast<std::size_t>(row * cols + col)]; }
  friend bool operator==(const HeatmapGrid&, const HeatmapGrid&) = default;
};

HeatmapGrid make_heatmap(const World& world, const PodScores& scores, Seconds t);

/// Grid as comma-separated rows; empty cells are left blank.
void write_heatmap_csv(const HeatmapGrid& grid, const std::filesystem::path& path);

/// Plain-text PPM (P3), one pixel per cell: blue (score 0) through red (grid
/// maximum), empty cells in light grey. `scale` repeats each cell as a
/// scale x scale block.
void write_heatmap_ppm(const HeatmapGrid& grid, const std::filesystem::path& path, int scale = 4);

}  // namespace rmfs
