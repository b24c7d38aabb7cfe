#pragma once

#include <string>
#include <vector>

#include "furnish/geometry.hpp"
#include "furnish/scene.hpp"

namespace furnish {

/// A furniture item placed in the room (world frame).
struct PlacedItem {
  std::string spec_id;
  Vec2 position;
  Rotation rotation;
  Polygon footprint;
  Vec2 front_world;
};

inline PlacedItem place(const FurnitureSpec& spec, Vec2 position, Rotation k) {
  return {spec.id, position, k, transform(position, k, spec.footprint()), rotate(spec.front, k)};
}

inline std::vector<Polygon> footprints(const std::vector<PlacedItem>& placed) {
  std::vector<Polygon> out;
  out.reserve(placed.size());
  for (const auto& p : placed) out.push_back(p.footprint);
  return out;
}

}  // namespace furnish
