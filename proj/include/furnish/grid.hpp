#pragma once

// Binary occupancy grids over a room's bounding box.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "furnish/geometry.hpp"

namespace furnish {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(Cell, Cell) = default;
};

/// Row-major grid; row indexes y, col indexes x. Cell (r,c) covers
/// [origin.x + c·res, origin.x + (c+1)·res) × [origin.y + r·res, ...).
struct OccupancyGrid {
  int rows = 0;
  int cols = 0;
  double resolution = 1.0;
  Vec2 origin;
  std::vector<std::uint8_t> cells;

  OccupancyGrid() = default;
  OccupancyGrid(int rows_, int cols_, double res, Vec2 origin_)
      : rows(rows_), cols(cols_), resolution(res), origin(origin_),
        cells(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_), 0) {
    if (!(res > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(c.col);
  }
  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
  bool occupied(Cell c) const { return cells[index(c)] != 0; }
  void set(Cell c, bool v) { cells[index(c)] = v ? 1 : 0; }

  Vec2 center(Cell c) const {
    return {origin.x + (c.col + 0.5) * resolution, origin.y + (c.row + 0.5) * resolution};
  }
  std::optional<Cell> cell_of(Vec2 p) const {
    const Cell c{static_cast<int>(std::floor((p.y - origin.y) / resolution)),
                 static_cast<int>(std::floor((p.x - origin.x) / resolution))};
    if (!in_bounds(c)) return std::nullopt;
    return c;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : cells) n += v;
    return n;
  }
};

namespace detail {

// Marks every cell whose center lies in the closed polygon.
inline void stamp(std::vector<std::uint8_t>& cells, int rows, int cols, Vec2 origin,
                  double cell_w, double cell_h, const Polygon& poly) {
  const Box b = poly.bounds();
  const int c0 = std::max(0, static_cast<int>(std::floor((b.lo.x - origin.x) / cell_w - 0.5)));
  const int c1 = std::min(cols - 1, static_cast<int>(std::ceil((b.hi.x - origin.x) / cell_w - 0.5)));
  const int r0 = std::max(0, static_cast<int>(std::floor((b.lo.y - origin.y) / cell_h - 0.5)));
  const int r1 = std::min(rows - 1, static_cast<int>(std::ceil((b.hi.y - origin.y) / cell_h - 0.5)));
  const auto box = poly.as_box();
  for (int r = r0; r <= r1; ++r) {
    const double y = origin.y + (r + 0.5) * cell_h;
    for (int c = c0; c <= c1; ++c) {
      const double x = origin.x + (c + 0.5) * cell_w;
      const bool in = box ? (x >= box->lo.x - kBoundaryEps && x <= box->hi.x + kBoundaryEps &&
                             y >= box->lo.y - kBoundaryEps && y <= box->hi.y + kBoundaryEps)
                          : contains_point(poly, {x, y});
      if (in) cells[static_cast<std::size_t>(r) * cols + c] = 1;
    }
  }
}

}  // namespace detail

/// Rasterizes `polys` onto a rows×cols lattice of cell_w×cell_h cells over
/// the boundary's bounding box. Cells whose centers fall outside the
/// boundary are marked occupied.
inline std::vector<std::uint8_t> rasterize_cells(std::span<const Polygon> polys,
                                                 const Polygon& boundary, int rows, int cols) {
  const Box bb = boundary.bounds();
  const double cw = bb.width() / cols, ch = bb.height() / rows;
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(rows) * cols, 0);
  const bool rect = boundary.as_box().has_value();
  if (!rect) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (!contains_point(boundary, {bb.lo.x + (c + 0.5) * cw, bb.lo.y + (r + 0.5) * ch}))
          cells[static_cast<std::size_t>(r) * cols + c] = 1;
  }
  for (const Polygon& p : polys) detail::stamp(cells, rows, cols, bb.lo, cw, ch, p);
  return cells;
}

/// Grid of square cells with the given resolution covering the boundary's
/// bounding box; dimensions are ceil(extent / resolution).
inline OccupancyGrid rasterize(std::span<const Polygon> polys, const Polygon& boundary,
                               double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  const Box bb = boundary.bounds();
  const int cols = static_cast<int>(std::ceil(bb.width() / resolution - 1e-9));
  const int rows = static_cast<int>(std::ceil(bb.height() / resolution - 1e-9));
  OccupancyGrid g(rows, cols, resolution, bb.lo);
  const bool rect = boundary.as_box().has_value();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const Vec2 p = g.center({r, c});
      const bool inside = rect ? (p.x <= bb.hi.x + kBoundaryEps && p.y <= bb.hi.y + kBoundaryEps)
                               : contains_point(boundary, p);
      if (!inside) g.set({r, c}, true);
    }
  for (const Polygon& p : polys)
    detail::stamp(g.cells, rows, cols, bb.lo, resolution, resolution, p);
  return g;
}

}  // namespace furnish
