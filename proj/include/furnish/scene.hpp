#pragma once

// World model: furniture catalog, parent-child pairs, rooms with doors, and
// their JSON file formats.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "furnish/geometry.hpp"

namespace furnish {

using json = nlohmann::json;

class SceneError : public std::runtime_error {
 public:
  enum class Kind { parse, schema, empty_catalog, duplicate_id, dangling_reference, unknown_id, door_off_boundary, bad_room };

  SceneError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class Side { front = 0, back = 1, left = 2, right = 3 };
inline constexpr std::array<const char*, 4> kSideNames{"front", "back", "left", "right"};

struct FurnitureSpec {
  std::string id;
  std::string name;
  double width = 0.0;  // canonical x extent
  double depth = 0.0;  // canonical y extent
  Vec2 front{0.0, 1.0};
  std::array<double, 4> clearances{};  // indexed by Side
  bool alignment_exempt = false;
  std::string category;

  double area() const { return width * depth; }
  double clearance(Side s) const { return clearances[static_cast<int>(s)]; }
  Polygon footprint() const { return Polygon::rectangle(width, depth); }

  /// Canonical-frame unit direction for a clearance side.
  Vec2 direction(Side s) const {
    switch (s) {
      case Side::front: return front;
      case Side::back: return -front;
      case Side::left: return perp(front);
      case Side::right: return -perp(front);
    }
    return front;
  }
};

struct PairRelation {
  std::string parent;
  std::string child;
  int alpha = -1;  // -1 face-to-face, +1 parallel
};

class Catalog {
 public:
  std::vector<FurnitureSpec> items;
  std::vector<PairRelation> pairs;

  const FurnitureSpec* find(std::string_view id) const {
    for (const auto& f : items)
      if (f.id == id) return &f;
    return nullptr;
  }
  const FurnitureSpec& at(std::string_view id) const {
    if (const auto* f = find(id)) return *f;
    throw SceneError(SceneError::Kind::unknown_id, "unknown furniture id '" + std::string(id) + "'");
  }
  bool paired(std::string_view a, std::string_view b) const {
    for (const auto& p : pairs)
      if ((p.parent == a && p.child == b) || (p.parent == b && p.child == a)) return true;
    return false;
  }
  bool has_child(std::string_view id) const {
    return std::any_of(pairs.begin(), pairs.end(), [&](const auto& p) { return p.parent == id; });
  }
  bool has_parent(std::string_view id) const {
    return std::any_of(pairs.begin(), pairs.end(), [&](const auto& p) { return p.child == id; });
  }
};

enum class RoomShape { square, rectangle, l_shape, u_shape };

inline std::string_view to_string(RoomShape s) {
  switch (s) {
    case RoomShape::square: return "square";
    case RoomShape::rectangle: return "rectangle";
    case RoomShape::l_shape: return "l_shape";
    case RoomShape::u_shape: return "u_shape";
  }
  return "square";
}

inline RoomShape parse_room_shape(std::string_view s) {
  if (s == "square") return RoomShape::square;
  if (s == "rectangle") return RoomShape::rectangle;
  if (s == "l_shape") return RoomShape::l_shape;
  if (s == "u_shape") return RoomShape::u_shape;
  throw SceneError(SceneError::Kind::bad_room, "unknown room shape '" + std::string(s) + "'");
}

/// A door on one side of the room: `center` is the coordinate along that
/// side (x for n/s, y for e/w).
struct DoorSpec {
  char edge = 's';
  double center = 0.0;
  double width = 0.9;
};

struct Room {
  RoomShape shape = RoomShape::square;
  double n = 0.0;  // bounding-box width
  double m = 0.0;  // bounding-box height
  Polygon boundary;
  std::vector<DoorSpec> door_specs;
  std::vector<Segment> doors;

  double diagonal() const { return std::sqrt(n * n + m * m); }
  double reference_variance() const { return (n * n + m * m) / 12.0; }
  Vec2 center() const { return boundary.centroid(); }
  double area() const { return boundary.area(); }

  /// Index of the boundary edge nearest to p (lowest index on ties).
  std::size_t nearest_wall(Vec2 p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      const double d = point_segment_distance(p, boundary.edge(i));
      if (d < best_d - 1e-12) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }
  Vec2 wall_tangent(std::size_t i) const {
    const Segment e = boundary.edge(i);
    const Vec2 d = e.b - e.a;
    return (1.0 / norm(d)) * d;
  }
  Vec2 wall_normal(std::size_t i) const {
    const Vec2 t = wall_tangent(i);
    return {t.y, -t.x};
  }
};

namespace detail {

inline Vec2 side_normal(char edge) {
  switch (edge) {
    case 'n': return {0, 1};
    case 's': return {0, -1};
    case 'e': return {1, 0};
    case 'w': return {-1, 0};
  }
  throw SceneError(SceneError::Kind::bad_room, std::string("door edge must be one of n,s,e,w; got '") + edge + "'");
}

// Places a door on the boundary edge with matching outward normal that
// spans the door interval and lies nearest to the nominal bounding-box side.
inline Segment snap_door(const Polygon& boundary, double n, double m, const DoorSpec& d) {
  const Vec2 normal = side_normal(d.edge);
  if (!(d.width > 0.0)) throw SceneError(SceneError::Kind::bad_room, "door width must be positive");
  const bool horizontal = d.edge == 'n' || d.edge == 's';
  const double nominal = d.edge == 'n' ? m : d.edge == 'e' ? n : 0.0;
  const double lo = d.center - 0.5 * d.width, hi = d.center + 0.5 * d.width;
  std::optional<Segment> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const Segment e = boundary.edge(i);
    const Vec2 t = e.b - e.a;
    const Vec2 out = (1.0 / norm(t)) * Vec2{t.y, -t.x};
    if (distance(out, normal) > 1e-9) continue;
    const double a = horizontal ? e.a.x : e.a.y, b = horizontal ? e.b.x : e.b.y;
    if (lo < std::min(a, b) - 1e-9 || hi > std::max(a, b) + 1e-9) continue;
    const double line = horizontal ? e.a.y : e.a.x;
    const double gap = std::abs(line - nominal);
    if (gap < best_gap) {
      best_gap = gap;
      best = horizontal ? Segment{{lo, line}, {hi, line}} : Segment{{line, lo}, {line, hi}};
    }
  }
  if (!best) {
    std::ostringstream os;
    os << "door on edge '" << d.edge << "' at " << d.center << " (width " << d.width
       << ") does not lie on the room boundary";
    throw SceneError(SceneError::Kind::door_off_boundary, os.str());
  }
  return *best;
}

}  // namespace detail

/// Builds a rectilinear room. L-shapes remove the top-right N/2 × M/2
/// quadrant; U-shapes remove a centered top notch N/3 wide and M/2 deep.
inline Room make_room(RoomShape shape, double n, double m, std::vector<DoorSpec> doors) {
  if (!(n > 0.0) || !(m > 0.0)) throw SceneError(SceneError::Kind::bad_room, "room extents must be positive");
  if (shape == RoomShape::square && std::abs(n - m) > 1e-12)
    throw SceneError(SceneError::Kind::bad_room, "square room needs n == m");
  if (doors.empty()) throw SceneError(SceneError::Kind::bad_room, "room needs at least one door");
  Room room;
  room.shape = shape;
  room.n = n;
  room.m = m;
  switch (shape) {
    case RoomShape::square:
    case RoomShape::rectangle:
      room.boundary = Polygon({{0, 0}, {n, 0}, {n, m}, {0, m}});
      break;
    case RoomShape::l_shape:
      room.boundary = Polygon({{0, 0}, {n, 0}, {n, m / 2}, {n / 2, m / 2}, {n / 2, m}, {0, m}});
      break;
    case RoomShape::u_shape:
      room.boundary = Polygon({{0, 0}, {n, 0}, {n, m}, {2 * n / 3, m}, {2 * n / 3, m / 2},
                               {n / 3, m / 2}, {n / 3, m}, {0, m}});
      break;
  }
  for (const auto& d : doors) room.doors.push_back(detail::snap_door(room.boundary, n, m, d));
  room.door_specs = std::move(doors);
  return room;
}

/// Default rooms used by training and the comparison experiments.
inline Room room_preset(RoomShape shape) {
  switch (shape) {
    case RoomShape::square: return make_room(shape, 5.0, 5.0, {{'s', 2.5, 0.9}});
    case RoomShape::rectangle: return make_room(shape, 6.0, 4.0, {{'s', 3.0, 0.9}});
    case RoomShape::l_shape: return make_room(shape, 6.0, 6.0, {{'s', 3.0, 0.9}});
    case RoomShape::u_shape: return make_room(shape, 7.5, 6.0, {{'s', 3.75, 0.9}});
  }
  return make_room(RoomShape::square, 5.0, 5.0, {{'s', 2.5, 0.9}});
}

inline Catalog default_catalog() {
  Catalog c;
  auto add = [&](std::string id, std::string name, double w, double d, std::array<double, 4> cl,
                 bool exempt, std::string cat) {
    c.items.push_back({std::move(id), std::move(name), w, d, {0.0, 1.0}, cl, exempt, std::move(cat)});
  };
  //      id              name             w     d     front back left right
  add("bed", "Double bed", 1.6, 2.0, {0.6, 0.0, 0.5, 0.5}, false, "bedroom");
  add("wardrobe", "Wardrobe", 1.2, 0.6, {0.8, 0.0, 0.0, 0.0}, false, "storage");
  add("desk", "Desk", 1.2, 0.6, {0.7, 0.0, 0.0, 0.0}, false, "work");
  add("chair", "Desk chair", 0.5, 0.5, {0.3, 0.3, 0.0, 0.0}, false, "work");
  add("side_table", "Side table", 0.5, 0.4, {0.3, 0.0, 0.0, 0.0}, false, "bedroom");
  add("bookshelf", "Bookshelf", 0.9, 0.35, {0.6, 0.0, 0.0, 0.0}, false, "storage");
  add("dresser", "Dresser", 1.0, 0.5, {0.7, 0.0, 0.0, 0.0}, false, "storage");
  add("armchair", "Armchair", 0.8, 0.8, {0.5, 0.0, 0.0, 0.0}, false, "living");
  add("sofa", "Sofa", 2.0, 0.9, {0.8, 0.0, 0.0, 0.0}, false, "living");
  add("coffee_table", "Coffee table", 1.0, 0.6, {0.4, 0.4, 0.3, 0.3}, true, "living");
  add("tv_stand", "TV stand", 1.5, 0.45, {1.2, 0.0, 0.0, 0.0}, false, "living");
  add("dining_table", "Dining table", 1.4, 0.8, {0.6, 0.6, 0.6, 0.6}, true, "dining");
  add("cabinet", "Cabinet", 0.8, 0.45, {0.6, 0.0, 0.0, 0.0}, false, "storage");
  add("plant", "Floor plant", 0.4, 0.4, {0.0, 0.0, 0.0, 0.0}, true, "decor");
  add("floor_lamp", "Floor lamp", 0.35, 0.35, {0.0, 0.0, 0.0, 0.0}, true, "decor");
  c.pairs.push_back({"desk", "chair", -1});
  c.pairs.push_back({"bed", "side_table", 1});
  return c;
}

/// Furniture selection for a given count; larger sets extend smaller ones.
inline std::vector<std::string> furniture_preset(int count) {
  static const std::vector<std::string> order{"bed", "wardrobe", "desk", "chair",
                                               "side_table", "bookshelf", "dresser", "armchair"};
  if (count != 4 && count != 6 && count != 8)
    throw std::invalid_argument("furniture count must be 4, 6 or 8");
  return {order.begin(), order.begin() + count};
}

enum class PlacementOrder { descending, ascending };

/// Orders the selection by footprint area (descending by default); ties by id.
inline std::vector<FurnitureSpec> sort_by_area(const Catalog& catalog,
                                               const std::vector<std::string>& ids,
                                               PlacementOrder order = PlacementOrder::descending) {
  std::vector<FurnitureSpec> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(catalog.at(id));
  std::stable_sort(out.begin(), out.end(), [&](const FurnitureSpec& a, const FurnitureSpec& b) {
    if (a.area() != b.area())
      return order == PlacementOrder::descending ? a.area() > b.area() : a.area() < b.area();
    return a.id < b.id;
  });
  return out;
}

inline constexpr std::size_t kDescriptorSize = 12;
using Descriptor = std::array<double, kDescriptorSize>;

/// Room-normalized geometric and relational features of one item.
inline Descriptor descriptor(const FurnitureSpec& f, const Room& room, const Catalog& catalog) {
  const double d = room.diagonal();
  return {f.width / room.n,
          f.depth / room.m,
          f.area() / (room.n * room.m),
          f.front.x,
          f.front.y,
          f.clearances[0] / d,
          f.clearances[1] / d,
          f.clearances[2] / d,
          f.clearances[3] / d,
          catalog.has_parent(f.id) ? 1.0 : 0.0,
          catalog.has_child(f.id) ? 1.0 : 0.0,
          f.alignment_exempt ? 1.0 : 0.0};
}

// ---------------------------------------------------------------------------
// JSON formats

namespace detail {

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw SceneError(SceneError::Kind::schema, where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SceneError(SceneError::Kind::schema, where + ": field '" + key + "' has the wrong type");
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(SceneError::Kind::parse, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SceneError(SceneError::Kind::parse, "'" + path + "': " + e.what());
  }
}

}  // namespace detail

inline Catalog catalog_from_json(const json& j) {
  using detail::require;
  if (!j.is_object()) throw SceneError(SceneError::Kind::schema, "catalog must be a JSON object");
  const auto items = require<json>(j, "items", "catalog");
  if (!items.is_array()) throw SceneError(SceneError::Kind::schema, "catalog: 'items' must be an array");
  if (items.empty()) throw SceneError(SceneError::Kind::empty_catalog, "empty catalog");
  Catalog c;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const json& it = items[i];
    const std::string where = "items[" + std::to_string(i) + "]";
    FurnitureSpec f;
    f.id = require<std::string>(it, "id", where);
    f.name = require<std::string>(it, "name", where);
    f.width = require<double>(it, "width", where);
    f.depth = require<double>(it, "depth", where);
    const auto front = require<std::vector<double>>(it, "front", where);
    const auto cl = require<json>(it, "clearances", where);
    f.alignment_exempt = require<bool>(it, "alignment_exempt", where);
    f.category = require<std::string>(it, "category", where);
    if (!(f.width > 0.0) || !(f.depth > 0.0))
      throw SceneError(SceneError::Kind::schema, where + " ('" + f.id + "'): width and depth must be positive");
    if (front.size() != 2)
      throw SceneError(SceneError::Kind::schema, where + ": front must have 2 components");
    f.front = {front[0], front[1]};
    const bool axis = (std::abs(f.front.x) == 1.0 && f.front.y == 0.0) ||
                      (f.front.x == 0.0 && std::abs(f.front.y) == 1.0);
    if (!axis) throw SceneError(SceneError::Kind::schema, where + ": front must be an axis unit vector");
    for (int s = 0; s < 4; ++s) {
      f.clearances[s] = require<double>(cl, kSideNames[s], where + ".clearances");
      if (!(f.clearances[s] >= 0.0))
        throw SceneError(SceneError::Kind::schema, where + ": clearances must be non-negative");
    }
    if (!seen.insert(f.id).second)
      throw SceneError(SceneError::Kind::duplicate_id, "duplicate furniture id '" + f.id + "'");
    c.items.push_back(std::move(f));
  }
  if (j.contains("pairs")) {
    const json& pairs = j.at("pairs");
    if (!pairs.is_array()) throw SceneError(SceneError::Kind::schema, "catalog: 'pairs' must be an array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string where = "pairs[" + std::to_string(i) + "]";
      PairRelation p{require<std::string>(pairs[i], "parent", where),
                     require<std::string>(pairs[i], "child", where), require<int>(pairs[i], "alpha", where)};
      for (const auto* id : {&p.parent, &p.child})
        if (!seen.count(*id))
          throw SceneError(SceneError::Kind::dangling_reference, where + " references unknown id '" + *id + "'");
      if (p.parent == p.child)
        throw SceneError(SceneError::Kind::schema, where + ": parent and child must differ");
      if (p.alpha != -1 && p.alpha != 1)
        throw SceneError(SceneError::Kind::schema, where + ": alpha must be -1 or +1");
      c.pairs.push_back(std::move(p));
    }
  }
  return c;
}

inline json to_json(const Catalog& c) {
  json items = json::array();
  for (const auto& f : c.items) {
    json cl;
    for (int s = 0; s < 4; ++s) cl[kSideNames[s]] = f.clearances[s];
    items.push_back({{"id", f.id},
                     {"name", f.name},
                     {"width", f.width},
                     {"depth", f.depth},
                     {"front", {f.front.x, f.front.y}},
                     {"clearances", cl},
                     {"alignment_exempt", f.alignment_exempt},
                     {"category", f.category}});
  }
  json pairs = json::array();
  for (const auto& p : c.pairs) pairs.push_back({{"parent", p.parent}, {"child", p.child}, {"alpha", p.alpha}});
  return {{"items", items}, {"pairs", pairs}};
}

inline Catalog load_catalog(const std::string& path) { return catalog_from_json(detail::read_json_file(path)); }

inline void save_catalog(const Catalog& c, const std::string& path) {
  std::ofstream out(path);
  out << to_json(c).dump(2) << '\n';
}

inline Room room_from_json(const json& j) {
  using detail::require;
  const auto shape = parse_room_shape(require<std::string>(j, "shape", "room"));
  const double n = require<double>(j, "n", "room");
  const double m = require<double>(j, "m", "room");
  const auto doors = require<json>(j, "doors", "room");
  if (!doors.is_array()) throw SceneError(SceneError::Kind::schema, "room: 'doors' must be an array");
  std::vector<DoorSpec> specs;
  for (std::size_t i = 0; i < doors.size(); ++i) {
    const std::string where = "room.doors[" + std::to_string(i) + "]";
    const auto edge = require<std::string>(doors[i], "edge", where);
    if (edge.size() != 1) throw SceneError(SceneError::Kind::schema, where + ": edge must be n, s, e or w");
    specs.push_back({edge[0], require<double>(doors[i], "center", where),
                     doors[i].contains("width") ? require<double>(doors[i], "width", where) : 0.9});
  }
  return make_room(shape, n, m, std::move(specs));
}

inline json to_json(const Room& r) {
  json doors = json::array();
  for (const auto& d : r.door_specs)
    doors.push_back({{"edge", std::string(1, d.edge)}, {"center", d.center}, {"width", d.width}});
  return {{"shape", std::string(to_string(r.shape))}, {"n", r.n}, {"m", r.m}, {"doors", doors}};
}

inline Room load_room(const std::string& path) { return room_from_json(detail::read_json_file(path)); }

}  // namespace furnish
