#include "rmfs/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace rmfs {

HeatmapGrid make_heatmap(const World& world, const PodScores& scores, Seconds t) {
  HeatmapGrid g;
  g.time = t;
  g.rows = world.storage_rows;
  g.cols = world.storage_cols;
  g.cells.assign(static_cast<std::size_t>(g.rows * g.cols), std::nullopt);
  for (const StorageLocation& l : world.locations) {
    if (l.occupant) g.cells[static_cast<std::size_t>(l.grid_row * g.cols + l.grid_col)] = scores[*l.occupant];
  }
  return g;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return out;
}

using Rgb = std::array<int, 3>;

constexpr Rgb kBackground{220, 220, 220};

// Piecewise-linear blue -> cyan -> yellow -> red.
Rgb heat(double v) {
  static constexpr std::array<Rgb, 4> stops{{{0, 0, 255}, {0, 255, 255}, {255, 255, 0}, {255, 0, 0}}};
  v = std::clamp(v, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(v), stops.size() - 2);
  const double f = v - static_cast<double>(i);
  Rgb c{};
  for (std::size_t k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  return c;
}

}  // namespace

void write_heatmap_csv(const HeatmapGrid& grid, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (int r = 0; r < grid.rows; ++r) {
    std::string line;
    for (int c = 0; c < grid.cols; ++c) {
      if (c > 0) line += ',';
      if (const auto& v = grid.at(r, c)) line += fmt::format("{:.6f}", *v);
    }
    out << line << '\n';
  }
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

void write_heatmap_ppm(const HeatmapGrid& grid, const std::filesystem::path& path, int scale) {
  if (scale < 1) throw std::invalid_argument("heatmap scale must be >= 1");
  double hi = 0.0;
  for (const auto& v : grid.cells) {
    if (v) hi = std::max(hi, *v);
  }
  auto out = open_for_write(path);
  out << "P3\n" << grid.cols * scale << ' ' << grid.rows * scale << "\n255\n";
  for (int r = 0; r < grid.rows; ++r) {
    std::string line;
    for (int c = 0; c < grid.cols; ++c) {
      const auto& v = grid.at(r, c);
      const Rgb px = v ? heat(hi > 0.0 ? *v / hi : 0.0) : kBackground;
      for (int s = 0; s < scale; ++s) line += fmt::format("{} {} {} ", px[0], px[1], px[2]);
    }
    line.back() = '\n';
    for (int s = 0; s < scale; ++s) out << line;
  }
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

}  // namespace rmfs
