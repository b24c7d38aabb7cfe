#pragma once

// Episodic placement environment. One item is placed per step, in the
// configured size order; an invalid placement ends the episode with the
// penalty reward.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "furnish/grid.hpp"
#include "furnish/layout.hpp"
#include "furnish/pathfind.hpp"
#include "furnish/rewards.hpp"
#include "furnish/scene.hpp"

namespace furnish {

inline constexpr int kObservationGrid = 64;
inline constexpr double kOverlapTolerance = 1e-9;  // m²

struct EpisodeConfig {
  Room room = room_preset(RoomShape::square);
  std::shared_ptr<const Catalog> catalog = std::make_shared<const Catalog>(default_catalog());
  std::vector<std::string> furniture_ids = furniture_preset(4);
  PlacementOrder order = PlacementOrder::descending;
  GuidelineMask mask;
  double penalty = -10.0;
  double resolution = 0.1;
  std::uint64_t seed = 0;
};

struct LayoutState {
  std::vector<PlacedItem> placed;
  std::size_t cursor = 0;
  OccupancyGrid occupancy;
  bool done = false;
};

using RawAction = std::array<double, 3>;

struct Observation {
  Descriptor current{};
  Descriptor next{};
  std::vector<float> occupancy;  // kObservationGrid², row-major, y up
};

struct StepOutcome {
  LayoutState next_state;
  double reward = 0.0;
  bool done = false;
  std::optional<RewardBreakdown> info;  // empty for an invalid action
};

struct Placement {
  Vec2 position;
  Rotation rotation;
};

/// Squashes a raw action onto the room's bounding box and a rotation index.
inline Placement decode_action(const RawAction& raw, const Room& room) {
  const double u = 0.5 * (std::tanh(raw[0]) + 1.0);
  const double v = 0.5 * (std::tanh(raw[1]) + 1.0);
  const double w = 0.5 * (std::tanh(raw[2]) + 1.0);
  const int k = std::min(3, static_cast<int>(std::floor(w * 4.0)));
  return {{u * room.n, v * room.m}, Rotation(k)};
}

/// Definition of a valid placement: inside the room and not overlapping any
/// previously placed footprint by more than kOverlapTolerance.
inline bool valid_placement(const Polygon& footprint, std::span<const PlacedItem> placed, const Room& room) {
  if (!contains(room.boundary, footprint)) return false;
  for (const auto& p : placed)
    if (intersection_area(footprint, p.footprint) > kOverlapTolerance) return false;
  return true;
}

class LayoutEnv {
 public:
  explicit LayoutEnv(EpisodeConfig config)
      : config_(std::move(config)),
        items_(sort_by_area(*config_.catalog, config_.furniture_ids, config_.order)),
        raster_(config_.room, config_.resolution),
        obs_base_(rasterize_cells({}, config_.room.boundary, kObservationGrid, kObservationGrid)) {
    if (items_.empty()) throw std::invalid_argument("episode needs at least one furniture item");
    if (!std::isfinite(config_.penalty)) throw std::invalid_argument("penalty must be finite");
  }

  const EpisodeConfig& config() const { return config_; }
  const std::vector<FurnitureSpec>& items() const { return items_; }
  const RoomRaster& raster() const { return raster_; }

  LayoutState reset() const {
    LayoutState s;
    s.occupancy = raster_.base;
    return s;
  }

  StepOutcome step(const LayoutState& state, const RawAction& raw) const {
    if (state.done) throw std::logic_error("step called on a finished episode");
    for (double a : raw)
      if (!std::isfinite(a)) throw std::invalid_argument("raw action must be finite");
    const FurnitureSpec& spec = items_[state.cursor];
    const Placement pl = decode_action(raw, config_.room);
    PlacedItem item = place(spec, pl.position, pl.rotation);
    StepOutcome out;
    out.next_state = state;
    if (!valid_placement(item.footprint, state.placed, config_.room)) {
      out.reward = config_.penalty;
      out.done = out.next_state.done = true;
      return out;
    }
    detail::stamp(out.next_state.occupancy.cells, out.next_state.occupancy.rows, out.next_state.occupancy.cols,
                  out.next_state.occupancy.origin, config_.resolution, config_.resolution, item.footprint);
    out.next_state.placed.push_back(std::move(item));
    out.next_state.cursor = state.cursor + 1;
    const RewardBreakdown b =
        composite_reward(out.next_state.placed, *config_.catalog, config_.room, raster_, config_.mask);
    out.reward = b.r_composite;
    out.info = b;
    out.done = out.next_state.done = out.next_state.cursor == items_.size();
    return out;
  }

  /// Descriptors of the current and next item plus the occupancy map
  /// resampled onto a fixed grid over the room's bounding box.
  Observation observe(const LayoutState& state) const {
    if (state.done) throw std::logic_error("observe called on a finished episode");
    Observation o;
    o.current = descriptor(items_[state.cursor], config_.room, *config_.catalog);
    if (state.cursor + 1 < items_.size())
      o.next = descriptor(items_[state.cursor + 1], config_.room, *config_.catalog);
    auto cells = obs_base_;
    const Box bb = config_.room.boundary.bounds();
    for (const auto& p : state.placed)
      detail::stamp(cells, kObservationGrid, kObservationGrid, bb.lo, bb.width() / kObservationGrid,
                    bb.height() / kObservationGrid, p.footprint);
    o.occupancy.assign(cells.begin(), cells.end());
    return o;
  }

 private:
  EpisodeConfig config_;
  std::vector<FurnitureSpec> items_;
  RoomRaster raster_;
  std::vector<std::uint8_t> obs_base_;
};

}  // namespace furnish
