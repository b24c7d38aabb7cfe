#pragma once

// layout.json: a room, an optional catalog (the default one when absent) and
// the placed items as {spec_id, x, y, k}. Writers may add "breakdown" and "meta"
// blocks; readers ignore them.

#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "furnish/layout.hpp"
#include "furnish/rewards.hpp"
#include "furnish/scene.hpp"

namespace furnish {

struct LayoutDocument {
  Room room;
  std::shared_ptr<const Catalog> catalog;
  std::vector<PlacedItem> items;
};

inline json to_json(const RewardBreakdown& b) {
  return {{"r_pair", b.r_pair},       {"r_access", b.r_access},   {"r_vis", b.r_vis},
          {"r_path", b.r_path},       {"r_balance", b.r_balance}, {"r_align", b.r_align},
          {"r_composite", b.r_composite}};
}

inline json layout_to_json(std::span<const PlacedItem> placed, const Room& room, const Catalog* catalog = nullptr) {
  json items = json::array();
  for (const auto& p : placed)
    items.push_back({{"spec_id", p.spec_id}, {"x", p.position.x}, {"y", p.position.y}, {"k", p.rotation.index()}});
  json j = {{"room", to_json(room)}, {"items", items}};
  if (catalog) j["catalog"] = to_json(*catalog);
  return j;
}

inline LayoutDocument layout_from_json(const json& j) {
  using detail::require;
  if (!j.is_object()) throw SceneError(SceneError::Kind::schema, "layout must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "room" && key != "catalog" && key != "items" && key != "breakdown" && key != "meta")
      throw SceneError(SceneError::Kind::schema, "layout: unknown field '" + key + "'");
  LayoutDocument doc;
  doc.room = room_from_json(require<json>(j, "room", "layout"));
  doc.catalog = std::make_shared<const Catalog>(j.contains("catalog") ? catalog_from_json(j.at("catalog"))
                                                                      : default_catalog());
  const auto items = require<json>(j, "items", "layout");
  if (!items.is_array()) throw SceneError(SceneError::Kind::schema, "layout: 'items' must be an array");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string where = "items[" + std::to_string(i) + "]";
    const auto id = require<std::string>(items[i], "spec_id", where);
    const FurnitureSpec* spec = doc.catalog->find(id);
    if (!spec) throw SceneError(SceneError::Kind::unknown_id, where + ": unknown furniture id '" + id + "'");
    const int k = require<int>(items[i], "k", where);
    if (k < 0 || k > 3) throw SceneError(SceneError::Kind::schema, where + ": k must be 0, 1, 2 or 3");
    const Vec2 pos{require<double>(items[i], "x", where), require<double>(items[i], "y", where)};
    if (!std::isfinite(pos.x) || !std::isfinite(pos.y))
      throw SceneError(SceneError::Kind::schema, where + ": position must be finite");
    doc.items.push_back(place(*spec, pos, Rotation(k)));
  }
  return doc;
}

inline LayoutDocument load_layout(const std::string& path) { return layout_from_json(detail::read_json_file(path)); }

}  // namespace furnish
