#include <gtest/gtest.h>

#include <random>

#include "furnish/env.hpp"

using namespace furnish;

namespace {

EpisodeConfig ten_by_ten(std::vector<std::string> ids = furniture_preset(4)) {
  EpisodeConfig c;
  c.room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  c.furniture_ids = std::move(ids);
  return c;
}

// raw value whose squash lands on fraction f of the bounding box
double raw_for(double f) { return std::atanh(2.0 * f - 1.0); }

RawAction at(double x, double y, double n, double m, int k) {
  return {raw_for(x / n), raw_for(y / m), raw_for((k + 0.5) / 4.0)};
}

}  // namespace

TEST(Decode, Examples) {
  const Room room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  const Placement mid = decode_action({0, 0, 0}, room);
  EXPECT_DOUBLE_EQ(mid.position.x, 5.0);
  EXPECT_DOUBLE_EQ(mid.position.y, 5.0);
  EXPECT_EQ(mid.rotation.index(), 2);
  const Placement lo = decode_action({-50, -50, -50}, room);
  EXPECT_NEAR(lo.position.x, 0.0, 1e-12);
  EXPECT_NEAR(lo.position.y, 0.0, 1e-12);
  EXPECT_EQ(lo.rotation.index(), 0);
  const Placement hi = decode_action({50, 50, 50}, room);
  EXPECT_NEAR(hi.position.x, 10.0, 1e-12);
  EXPECT_NEAR(hi.position.y, 10.0, 1e-12);
  EXPECT_EQ(hi.rotation.index(), 3);
}

TEST(Decode, RotationBuckets) {
  const Room room = room_preset(RoomShape::rectangle);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(decode_action({0, 0, raw_for((k + 0.5) / 4.0)}, room).rotation.index(), k);
  const Placement p = decode_action(at(1.5, 2.5, 6, 4, 1), room);
  EXPECT_NEAR(p.position.x, 1.5, 1e-12);
  EXPECT_NEAR(p.position.y, 2.5, 1e-12);
}

TEST(Reset, ObservationCarriesFirstTwoDescriptors) {
  const LayoutEnv env(ten_by_ten());
  const auto s = env.reset();
  const auto o = env.observe(s);
  const Catalog& c = *env.config().catalog;
  EXPECT_EQ(o.current, descriptor(env.items()[0], env.config().room, c));
  EXPECT_EQ(o.next, descriptor(env.items()[1], env.config().room, c));
  EXPECT_EQ(env.items()[0].id, "bed");
  ASSERT_EQ(o.occupancy.size(), static_cast<std::size_t>(kObservationGrid * kObservationGrid));
  for (float v : o.occupancy) EXPECT_EQ(v, 0.0f);
}

TEST(Reset, SingleItemHasZeroSentinel) {
  const LayoutEnv env(ten_by_ten({"desk"}));
  const auto o = env.observe(env.reset());
  for (double v : o.next) EXPECT_EQ(v, 0.0);
}

TEST(Reset, LShapeMarksOutsideCells) {
  EpisodeConfig c = ten_by_ten();
  c.room = room_preset(RoomShape::l_shape);
  const LayoutEnv env(c);
  const auto o = env.observe(env.reset());
  double set = 0;
  for (float v : o.occupancy) set += v;
  EXPECT_EQ(set, kObservationGrid * kObservationGrid / 4);
}

TEST(Reset, Deterministic) {
  const LayoutEnv env(ten_by_ten());
  const auto a = env.reset(), b = env.reset();
  EXPECT_EQ(a.occupancy.cells, b.occupancy.cells);
  EXPECT_EQ(a.cursor, b.cursor);
}

TEST(Step, ValidPlacementRewardsCompositeOfOneItem) {
  const LayoutEnv env(ten_by_ten());
  const auto out = env.step(env.reset(), at(5, 5, 10, 10, 0));
  ASSERT_TRUE(out.info.has_value());
  EXPECT_FALSE(out.done);
  const std::vector<PlacedItem> one{place(env.items()[0], {5, 5}, Rotation(0))};
  const auto expected = composite_reward(one, *env.config().catalog, env.config().room);
  EXPECT_NEAR(out.reward, expected.r_composite, 1e-12);
  EXPECT_EQ(out.next_state.cursor, 1u);
  EXPECT_EQ(out.next_state.placed.size(), 1u);
}

TEST(Step, OverlapEndsEpisodeWithPenalty) {
  const LayoutEnv env(ten_by_ten());
  const auto first = env.step(env.reset(), at(5, 5, 10, 10, 0));
  const auto second = env.step(first.next_state, at(5, 5, 10, 10, 0));
  EXPECT_EQ(second.reward, -10.0);
  EXPECT_TRUE(second.done);
  EXPECT_FALSE(second.info.has_value());
  EXPECT_EQ(second.next_state.placed.size(), 1u);
  EXPECT_THROW(env.step(second.next_state, {0, 0, 0}), std::logic_error);
  EXPECT_THROW(env.observe(second.next_state), std::logic_error);
}

TEST(Step, OutsideRoomIsInvalid) {
  const LayoutEnv env(ten_by_ten());
  const auto out = env.step(env.reset(), at(0.2, 5, 10, 10, 0));
  EXPECT_TRUE(out.done);
  EXPECT_EQ(out.reward, -10.0);
}

TEST(Step, RejectsNonFiniteActions) {
  const LayoutEnv env(ten_by_ten());
  EXPECT_THROW(env.step(env.reset(), {std::nan(""), 0, 0}), std::invalid_argument);
}

TEST(Step, LastValidPlacementTerminates) {
  const LayoutEnv env(ten_by_ten());
  auto s = env.reset();
  const Vec2 spots[4] = {{2, 2}, {7, 2}, {2, 7}, {7, 7}};
  StepOutcome out;
  for (int i = 0; i < 4; ++i) {
    out = env.step(s, at(spots[i].x, spots[i].y, 10, 10, 0));
    ASSERT_TRUE(out.info.has_value()) << i;
    s = out.next_state;
  }
  EXPECT_TRUE(out.done);
  EXPECT_EQ(s.cursor, 4u);
}

TEST(Observe, OccupancyAfterOnePlacement) {
  const LayoutEnv env(ten_by_ten());
  const auto out = env.step(env.reset(), at(5, 5, 10, 10, 0));
  const auto o = env.observe(out.next_state);
  std::size_t set = 0;
  for (float v : o.occupancy) set += v != 0.0f;
  const Polygon fp = out.next_state.placed[0].footprint;
  const auto cells = rasterize_cells(std::span<const Polygon>(&fp, 1), env.config().room.boundary, kObservationGrid,
                                     kObservationGrid);
  std::size_t want = 0;
  for (auto c : cells) want += c;
  EXPECT_EQ(set, want);
  EXPECT_GT(set, 0u);
  // the state grid also gains the footprint
  EXPECT_EQ(out.next_state.occupancy.count(), rasterize(std::span<const Polygon>(&fp, 1), env.config().room.boundary,
                                                        0.1).count());
}

TEST(Observe, LastItemHasZeroNext) {
  const LayoutEnv env(ten_by_ten({"desk", "chair"}));
  const auto out = env.step(env.reset(), at(3, 3, 10, 10, 0));
  const auto o = env.observe(out.next_state);
  for (double v : o.next) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(o.current, descriptor(env.config().catalog->at("chair"), env.config().room, *env.config().catalog));
}

TEST(Properties, RandomRolloutsRespectInvariants) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0.0, 0.8);
  for (auto shape : {RoomShape::square, RoomShape::rectangle, RoomShape::l_shape, RoomShape::u_shape}) {
    EpisodeConfig c;
    c.room = room_preset(shape);
    c.furniture_ids = furniture_preset(6);
    const LayoutEnv env(c);
    for (int ep = 0; ep < 60; ++ep) {
      auto s = env.reset();
      std::size_t len = 0;
      while (!s.done) {
        const auto out = env.step(s, {g(rng), g(rng), g(rng)});
        ++len;
        EXPECT_TRUE(out.reward == -10.0 || (out.reward >= -1.0 && out.reward <= 1.0));
        const auto& placed = out.next_state.placed;
        for (std::size_t i = 0; i < placed.size(); ++i) {
          EXPECT_TRUE(contains(c.room.boundary, placed[i].footprint));
          for (std::size_t j = i + 1; j < placed.size(); ++j)
            EXPECT_LE(intersection_area(placed[i].footprint, placed[j].footprint), 1e-9);
        }
        s = out.next_state;
      }
      EXPECT_LE(len, env.items().size());
    }
  }
}

TEST(Properties, SameActionsSameTrajectory) {
  const LayoutEnv env(ten_by_ten(furniture_preset(8)));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.6);
  std::vector<RawAction> actions(8);
  for (auto& a : actions) a = {g(rng), g(rng), g(rng)};
  auto run = [&] {
    std::vector<double> rewards;
    auto s = env.reset();
    for (const auto& a : actions) {
      if (s.done) break;
      const auto out = env.step(s, a);
      rewards.push_back(out.reward);
      s = out.next_state;
    }
    return std::make_pair(rewards, s.occupancy.cells);
  };
  EXPECT_EQ(run(), run());
}

TEST(Config, RejectsEmptyOrBadPenalty) {
  EXPECT_THROW(LayoutEnv(ten_by_ten({})), std::invalid_argument);
  EpisodeConfig c = ten_by_ten();
  c.penalty = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LayoutEnv{c}, std::invalid_argument);
}
