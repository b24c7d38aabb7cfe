#include <gtest/gtest.h>

#include <random>

#include "furnish/pathfind.hpp"
#include "oracles/dijkstra.hpp"

using namespace furnish;

namespace {

OccupancyGrid empty_grid(int rows, int cols) { return OccupancyGrid(rows, cols, 1.0, {0, 0}); }

std::optional<int> oracle_steps(const OccupancyGrid& g, const std::vector<Cell>& sources, Cell goal) {
  std::vector<std::pair<int, int>> src;
  for (auto s : sources) src.push_back({s.row, s.col});
  return oracle::grid_dijkstra(g.cells, g.rows, g.cols, src, {goal.row, goal.col});
}

}  // namespace

TEST(Astar, EmptyThreeByThree) {
  const auto r = astar(empty_grid(3, 3), Cell{0, 0}, Cell{2, 2});
  ASSERT_TRUE(r.reachable());
  EXPECT_DOUBLE_EQ(*r.distance, 4.0);
}

TEST(Astar, WallRowBlocks) {
  auto g = empty_grid(5, 5);
  for (int c = 0; c < 5; ++c) g.set({2, c}, true);
  EXPECT_FALSE(astar(g, Cell{0, 0}, Cell{4, 4}).reachable());
}

TEST(Astar, OccupiedEndpointsAreUnreachable) {
  auto g = empty_grid(4, 4);
  g.set({0, 0}, true);
  EXPECT_FALSE(astar(g, Cell{0, 0}, Cell{3, 3}).reachable());
  EXPECT_FALSE(astar(g, Cell{3, 3}, Cell{0, 0}).reachable());
  EXPECT_TRUE(astar(g, Cell{1, 1}, Cell{1, 1}).reachable());
}

TEST(Astar, ScalesByResolution) {
  OccupancyGrid g(10, 10, 0.25, {0, 0});
  EXPECT_DOUBLE_EQ(*astar(g, Cell{0, 0}, Cell{0, 9}).distance, 9 * 0.25);
}

TEST(Astar, MatchesDijkstraOnRandomGrids) {
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution wall(0.3);
  std::uniform_int_distribution<int> pick(0, 19);
  int reachable = 0, unreachable = 0;
  for (int inst = 0; inst < 50; ++inst) {
    auto g = empty_grid(20, 20);
    for (auto& c : g.cells) c = wall(rng);
    const Cell s{pick(rng), pick(rng)}, t{pick(rng), pick(rng)};
    g.set(s, false);
    g.set(t, false);
    const auto got = astar(g, s, t);
    const auto want = oracle_steps(g, {s}, t);
    ASSERT_EQ(got.reachable(), want.has_value()) << "instance " << inst;
    if (want) {
      EXPECT_EQ(*got.distance, static_cast<double>(*want)) << "instance " << inst;
      ++reachable;
    } else {
      ++unreachable;
    }
  }
  EXPECT_GT(reachable, 10);
}

TEST(Astar, MultiSourceMatchesDijkstra) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution wall(0.25);
  std::uniform_int_distribution<int> pick(0, 14);
  for (int inst = 0; inst < 30; ++inst) {
    auto g = empty_grid(15, 15);
    for (auto& c : g.cells) c = wall(rng);
    std::vector<Cell> sources{{0, pick(rng)}, {0, pick(rng)}, {pick(rng), 0}};
    const Cell goal{pick(rng), pick(rng)};
    g.set(goal, false);
    const auto got = astar(g, sources, goal);
    const auto want = oracle_steps(g, sources, goal);
    ASSERT_EQ(got.reachable(), want.has_value());
    if (want) {
      EXPECT_EQ(*got.distance, static_cast<double>(*want));
    }
  }
}

TEST(Astar, AddingObstaclesNeverShortens) {
  std::mt19937_64 rng(31);
  std::bernoulli_distribution wall(0.15), extra(0.1);
  std::uniform_int_distribution<int> pick(0, 19);
  for (int inst = 0; inst < 40; ++inst) {
    auto g = empty_grid(20, 20);
    const Cell s{pick(rng), pick(rng)}, t{pick(rng), pick(rng)};
    const auto free_d = astar(g, s, t);
    for (auto& c : g.cells) c = wall(rng);
    g.set(s, false);
    g.set(t, false);
    const auto base = astar(g, s, t);
    auto more = g;
    for (auto& c : more.cells) c = c || extra(rng);
    more.set(s, false);
    more.set(t, false);
    const auto worse = astar(more, s, t);
    if (base.reachable()) {
      EXPECT_LE(*free_d.distance, *base.distance);
    }
    if (worse.reachable()) {
      ASSERT_TRUE(base.reachable());
      EXPECT_LE(*base.distance, *worse.distance);
    }
  }
}

TEST(Reachability, EmptyTenByTenDoorToNorthMatchesOracle) {
  const Room room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  const Catalog c = default_catalog();
  const std::vector<PlacedItem> placed{place(c.at("chair"), {5, 9}, Rotation(0))};
  const RoomRaster raster(room, 0.1);
  const auto r = reachability(raster, placed, 0);
  ASSERT_TRUE(r.reachable());
  // the item's own cells are free, so the grid is the empty room
  const auto goal = raster.base.cell_of({5, 9});
  const auto steps = oracle_steps(raster.base, raster.door_cells, *goal);
  ASSERT_TRUE(steps.has_value());
  EXPECT_NEAR(*r.distance, *steps * 0.1, 1e-12);
  // 90 cell steps from the door row to the row holding y = 9
  EXPECT_NEAR(*r.distance, 9.0, 1e-12);
  EXPECT_GE(*r.distance, 9.0 - 0.1);  // straight-line lower bound less one cell
}

TEST(Reachability, DoorCellsHugTheDoor) {
  const Room room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  const RoomRaster raster(room, 0.1);
  ASSERT_FALSE(raster.door_cells.empty());
  for (const Cell cell : raster.door_cells) {
    EXPECT_EQ(cell.row, 0);
    const Vec2 p = raster.base.center(cell);
    EXPECT_GE(p.x, 4.55 - 0.05);
    EXPECT_LE(p.x, 5.45 + 0.05);
  }
}

TEST(Reachability, SingleItemIsFiniteAndBounded) {
  const Room room = room_preset(RoomShape::square);
  const Catalog c = default_catalog();
  const std::vector<PlacedItem> placed{place(c.at("bed"), {2.5, 3.5}, Rotation(0))};
  const auto r = reachability(room, 0.1, placed, 0);
  ASSERT_TRUE(r.reachable());
  // Manhattan path is at most √2 times the Euclidean diagonal
  EXPECT_LE(*r.distance, std::sqrt(2.0) * room.diagonal() + 2 * 0.1);
}

TEST(Reachability, WalledInByOtherItems) {
  const Room room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  Catalog c;
  FurnitureSpec wall;
  wall.id = "wall";
  wall.width = 4.0;
  wall.depth = 0.5;
  FurnitureSpec dot = wall;
  dot.id = "dot";
  dot.width = dot.depth = 0.5;
  c.items = {wall, dot};
  std::vector<PlacedItem> placed{place(c.at("dot"), {5, 5}, Rotation(0)),
                                 place(c.at("wall"), {5, 3.25}, Rotation(0)),
                                 place(c.at("wall"), {5, 6.75}, Rotation(0)),
                                 place(c.at("wall"), {3.25, 5}, Rotation(1)),
                                 place(c.at("wall"), {6.75, 5}, Rotation(1))};
  EXPECT_FALSE(reachability(room, 0.1, placed, 0).reachable());
  EXPECT_TRUE(reachability(room, 0.1, placed, 1).reachable());
}

TEST(Reachability, ObstaclesNeverShortenPaths) {
  const Room room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  const Catalog c = default_catalog();
  const RoomRaster raster(room, 0.1);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1.0, 9.0);
  for (int i = 0; i < 20; ++i) {
    const std::vector<PlacedItem> placed{place(c.at("chair"), {u(rng), u(rng)}, Rotation(0))};
    const auto free_r = reachability(raster, placed, 0);
    const Vec2 o{u(rng), u(rng)};
    const std::vector<Polygon> obstacle{Polygon::from_box({o - Vec2{1.0, 0.2}, o + Vec2{1.0, 0.2}})};
    const auto blocked = reachability(raster, placed, 0, obstacle);
    ASSERT_TRUE(free_r.reachable());
    if (blocked.reachable()) {
      EXPECT_GE(*blocked.distance, *free_r.distance);
    }
  }
}
