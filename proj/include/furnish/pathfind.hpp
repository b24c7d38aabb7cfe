#pragma once

// Reachability on the occupancy grid: 4-connected A* with a Manhattan
// heuristic, ties broken by (f-score, row-major cell index).

#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "furnish/grid.hpp"
#include "furnish/layout.hpp"
#include "furnish/scene.hpp"

namespace furnish {

struct ReachResult {
  std::optional<double> distance;  // meters; empty when unreachable

  bool reachable() const { return distance.has_value(); }
  static ReachResult unreachable() { return {}; }
};

/// Shortest 4-connected path from any free source cell to `goal`, in meters.
inline ReachResult astar(const OccupancyGrid& grid, std::span<const Cell> sources, Cell goal) {
  if (!grid.in_bounds(goal) || grid.occupied(goal)) return ReachResult::unreachable();
  const int n = grid.rows * grid.cols;
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> g(static_cast<std::size_t>(n), kInf);
  std::vector<std::uint8_t> closed(static_cast<std::size_t>(n), 0);
  auto h = [&](int idx) {
    const int r = idx / grid.cols, c = idx % grid.cols;
    return std::abs(r - goal.row) + std::abs(c - goal.col);
  };
  using Entry = std::pair<int, int>;  // (f, index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (const Cell s : sources) {
    if (!grid.in_bounds(s) || grid.occupied(s)) continue;
    const int idx = static_cast<int>(grid.index(s));
    if (g[idx] == 0) continue;
    g[idx] = 0;
    open.emplace(h(idx), idx);
  }
  const int goal_idx = static_cast<int>(grid.index(goal));
  constexpr int dr[4] = {-1, 0, 0, 1};
  constexpr int dc[4] = {0, -1, 1, 0};
  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = 1;
    if (idx == goal_idx) return {g[idx] * grid.resolution};
    const int r = idx / grid.cols, c = idx % grid.cols;
    for (int k = 0; k < 4; ++k) {
      const int rr = r + dr[k], cc = c + dc[k];
      if (rr < 0 || rr >= grid.rows || cc < 0 || cc >= grid.cols) continue;
      const int nidx = rr * grid.cols + cc;
      if (grid.cells[nidx] || closed[nidx]) continue;
      const int ng = g[idx] + 1;
      if (ng < g[nidx]) {
        g[nidx] = ng;
        open.emplace(ng + h(nidx), nidx);
      }
    }
  }
  return ReachResult::unreachable();
}

inline ReachResult astar(const OccupancyGrid& grid, Cell start, Cell goal) {
  return astar(grid, std::span<const Cell>(&start, 1), goal);
}

/// The room rasterized at a fixed resolution with no furniture, plus the
/// cells that count as doorway entry points.
struct RoomRaster {
  OccupancyGrid base;
  std::vector<Cell> door_cells;

  RoomRaster(const Room& room, double resolution)
      : base(rasterize(std::span<const Polygon>{}, room.boundary, resolution)) {
    const double reach = 0.5 * resolution + 1e-9;
    for (int r = 0; r < base.rows; ++r)
      for (int c = 0; c < base.cols; ++c) {
        const Cell cell{r, c};
        if (base.occupied(cell)) continue;
        const Vec2 p = base.center(cell);
        for (const auto& d : room.doors)
          if (point_segment_distance(p, d) <= reach) {
            door_cells.push_back(cell);
            break;
          }
      }
  }

  OccupancyGrid with(std::span<const Polygon> polys) const {
    OccupancyGrid g = base;
    for (const auto& p : polys)
      detail::stamp(g.cells, g.rows, g.cols, g.origin, g.resolution, g.resolution, p);
    return g;
  }
};

/// Path length from the nearest doorway to the center of placed[which],
/// with that item's own footprint treated as free space.
inline ReachResult reachability(const RoomRaster& raster, std::span<const PlacedItem> placed,
                                std::size_t which, std::span<const Polygon> obstacles = {}) {
  std::vector<Polygon> others(obstacles.begin(), obstacles.end());
  for (std::size_t i = 0; i < placed.size(); ++i)
    if (i != which) others.push_back(placed[i].footprint);
  const OccupancyGrid grid = raster.with(others);
  const auto goal = grid.cell_of(placed[which].position);
  if (!goal) return ReachResult::unreachable();
  return astar(grid, raster.door_cells, *goal);
}

inline ReachResult reachability(const Room& room, double resolution, std::span<const PlacedItem> placed,
                                std::size_t which, std::span<const Polygon> obstacles = {}) {
  return reachability(RoomRaster(room, resolution), placed, which, obstacles);
}

}  // namespace furnish
