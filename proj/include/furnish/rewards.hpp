#pragma once

// The six interior-design guideline rewards and their composite.
//
// All rewards are evaluated over the items placed so far. Degenerate
// denominators (nothing placed, no complete pair, every item exempt from
// alignment) yield the neutral value 0.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "furnish/layout.hpp"
#include "furnish/pathfind.hpp"
#include "furnish/scene.hpp"

namespace furnish {

enum class Guideline { pair = 0, access, visibility, pathway, balance, alignment };
inline constexpr std::array<std::string_view, 6> kGuidelineNames{"pair", "access", "vis",
                                                                 "path", "balance", "align"};

inline Guideline parse_guideline(std::string_view s) {
  for (std::size_t i = 0; i < kGuidelineNames.size(); ++i)
    if (kGuidelineNames[i] == s) return static_cast<Guideline>(i);
  throw std::invalid_argument("unknown reward '" + std::string(s) + "'");
}

class GuidelineMask {
 public:
  GuidelineMask() { enabled_.fill(true); }
  explicit GuidelineMask(std::array<bool, 6> enabled) : enabled_(enabled) { validate(); }

  static GuidelineMask only(Guideline g) {
    std::array<bool, 6> e{};
    e[static_cast<int>(g)] = true;
    return GuidelineMask(e);
  }
  GuidelineMask without(Guideline g) const {
    auto e = enabled_;
    e[static_cast<int>(g)] = false;
    return GuidelineMask(e);
  }
  bool enabled(Guideline g) const { return enabled_[static_cast<int>(g)]; }
  const std::array<bool, 6>& flags() const { return enabled_; }
  std::size_t count() const {
    std::size_t n = 0;
    for (bool b : enabled_) n += b;
    return n;
  }
  friend bool operator==(const GuidelineMask&, const GuidelineMask&) = default;

 private:
  void validate() const {
    if (count() == 0) throw std::invalid_argument("at least one reward must stay enabled");
  }
  std::array<bool, 6> enabled_;
};

struct RewardBreakdown {
  double r_pair = 0.0;
  double r_access = 0.0;
  double r_vis = 0.0;
  double r_path = 0.0;
  double r_balance = 0.0;
  double r_align = 0.0;
  double r_composite = 0.0;

  std::array<double, 6> components() const { return {r_pair, r_access, r_vis, r_path, r_balance, r_align}; }
};

// ---------------------------------------------------------------------------
// Pairwise relationship

/// Kernel product minus one, in [-1, 1].
inline double pair_score(double distance, double diagonal, int alpha, Vec2 parent_front, Vec2 child_front) {
  const double k_dist = 1.0 + std::cos(std::numbers::pi * distance / diagonal);
  const double k_dir = 0.5 * (1.0 + alpha * dot(parent_front, child_front));
  return k_dist * k_dir - 1.0;
}

inline double pair_reward(std::span<const PlacedItem> placed, std::span<const PairRelation> pairs,
                          const Room& room) {
  auto find = [&](const std::string& id) -> const PlacedItem* {
    for (const auto& p : placed)
      if (p.spec_id == id) return &p;
    return nullptr;
  };
  double total = 0.0;
  int count = 0;
  for (const auto& rel : pairs) {
    const PlacedItem* p = find(rel.parent);
    const PlacedItem* c = find(rel.child);
    if (!p || !c) continue;
    total += pair_score(distance(p->position, c->position), room.diagonal(), rel.alpha, p->front_world,
                        c->front_world);
    ++count;
  }
  return count ? total / count : 0.0;
}

// ---------------------------------------------------------------------------
// Accessibility

/// World-frame clearance strips of a placed item, one per side with a
/// positive clearance.
inline std::vector<Polygon> access_strips(const PlacedItem& item, const FurnitureSpec& spec) {
  std::vector<Polygon> out;
  for (int s = 0; s < 4; ++s) {
    const double omega = spec.clearances[s];
    if (omega <= 0.0) continue;
    out.push_back(sweep_strip(item.footprint, rotate(spec.direction(static_cast<Side>(s)), item.rotation), omega));
  }
  return out;
}

/// Fraction of an item's required access area that is blocked by
/// non-paired footprints or lies outside the room.
inline double obstructed_fraction(std::span<const PlacedItem> placed, std::size_t which,
                                  const Catalog& catalog, const Room& room) {
  const PlacedItem& item = placed[which];
  const auto strips = access_strips(item, catalog.at(item.spec_id));
  double required = 0.0, blocked = 0.0;
  for (const auto& strip : strips) {
    const double a = strip.area();
    double v = a - intersection_area(strip, room.boundary);
    for (std::size_t q = 0; q < placed.size(); ++q) {
      if (q == which || catalog.paired(item.spec_id, placed[q].spec_id)) continue;
      v += intersection_area(strip, placed[q].footprint);
    }
    required += a;
    blocked += std::clamp(v, 0.0, a);
  }
  return required > 0.0 ? blocked / required : 0.0;
}

inline double access_reward(std::span<const PlacedItem> placed, const Catalog& catalog, const Room& room) {
  if (placed.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < placed.size(); ++i) s += obstructed_fraction(placed, i, catalog, room);
  return 1.0 - 2.0 * s / static_cast<double>(placed.size());
}

// ---------------------------------------------------------------------------
// Visibility

inline double visibility_reward(std::span<const PlacedItem> placed, const Room& room) {
  if (placed.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : placed) {
    const std::size_t w = room.nearest_wall(p.footprint.centroid());
    s += dot(p.front_world, room.wall_normal(w));
  }
  return -s / static_cast<double>(placed.size());
}

// ---------------------------------------------------------------------------
// Pathway connection

/// Per-item pathway term: 1 when unreachable, exp(-(d_door/d)^2) otherwise.
inline double pathway_term(bool reachable, double door_distance, double diagonal) {
  if (!reachable) return 1.0;
  const double kappa = (door_distance / diagonal) * (door_distance / diagonal);
  return std::exp(-kappa);
}

inline double door_distance(Vec2 p, const Room& room) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d : room.doors) best = std::min(best, distance(p, d.midpoint()));
  return best;
}

inline double pathway_reward(std::span<const PlacedItem> placed, const Room& room, const RoomRaster& raster,
                             std::span<const Polygon> obstacles = {}) {
  if (placed.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    const bool reach = reachability(raster, placed, i, obstacles).reachable();
    s += pathway_term(reach, door_distance(placed[i].position, room), room.diagonal());
  }
  return 1.0 - 2.0 * s / static_cast<double>(placed.size());
}

inline double pathway_reward(std::span<const PlacedItem> placed, const Room& room, double resolution,
                             std::span<const Polygon> obstacles = {}) {
  return pathway_reward(placed, room, RoomRaster(room, resolution), obstacles);
}

// ---------------------------------------------------------------------------
// Visual balance

struct SpatialMoments {
  Vec2 mean;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
};

/// Area-weighted centroid and variance tensor of item centers.
inline SpatialMoments spatial_moments(std::span<const PlacedItem> placed) {
  SpatialMoments m;
  double total = 0.0;
  for (const auto& p : placed) {
    const double w = p.footprint.area();
    total += w;
    m.mean = m.mean + w * p.position;
  }
  m.mean = (1.0 / total) * m.mean;
  for (const auto& p : placed) {
    const double w = p.footprint.area() / total;
    const Vec2 d = p.position - m.mean;
    m.sxx += w * d.x * d.x;
    m.sxy += w * d.x * d.y;
    m.syy += w * d.y * d.y;
  }
  return m;
}

inline double balance_reward(std::span<const PlacedItem> placed, const Room& room) {
  if (placed.empty()) return 0.0;
  const SpatialMoments m = spatial_moments(placed);
  const double d2 = room.diagonal() * room.diagonal();
  const Vec2 off = m.mean - room.center();
  const double k2 = room.reference_variance();
  const double frob2 = (m.sxx - k2) * (m.sxx - k2) + 2.0 * m.sxy * m.sxy + (m.syy - k2) * (m.syy - k2);
  return std::exp(-dot(off, off) / d2) + std::exp(-frob2 / (k2 * k2)) - 1.0;
}

// ---------------------------------------------------------------------------
// Alignment

/// cos²(2ϑ)·(1 − tanh²(d/ℓ)) for axis direction `axis`, wall tangent
/// `tangent`, wall gap `gap` and long-axis length `long_len`.
inline double alignment_score(Vec2 axis, Vec2 tangent, double gap, double long_len) {
  const double theta = std::acos(std::clamp(std::abs(dot(axis, tangent)), 0.0, 1.0));
  const double c = std::cos(2.0 * theta);
  const double t = std::tanh(gap / long_len);
  return c * c * (1.0 - t * t);
}

/// Shortest distance from the item's back or side faces to a wall segment.
inline double back_or_side_gap(const PlacedItem& item, const Segment& wall) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < item.footprint.size(); ++i) {
    const Segment e = item.footprint.edge(i);
    const Vec2 t = e.b - e.a;
    const Vec2 outward = (1.0 / norm(t)) * Vec2{t.y, -t.x};
    if (dot(outward, item.front_world) > 0.5) continue;  // front face
    best = std::min(best, segment_segment_distance(e, wall));
  }
  return best;
}

inline double alignment_reward(std::span<const PlacedItem> placed, const Catalog& catalog, const Room& room) {
  double num = 0.0, den = 0.0;
  for (const auto& p : placed) {
    const FurnitureSpec& f = catalog.at(p.spec_id);
    if (f.alignment_exempt) continue;
    const Vec2 axis = rotate(f.width >= f.depth ? Vec2{1, 0} : Vec2{0, 1}, p.rotation);
    const double long_len = std::max(f.width, f.depth);
    const std::size_t w = room.nearest_wall(p.footprint.centroid());
    const double gap = back_or_side_gap(p, room.boundary.edge(w));
    const double a = p.footprint.area();
    num += a * alignment_score(axis, room.wall_tangent(w), gap, long_len);
    den += a;
  }
  return den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// Composite

inline double composite(const std::array<double, 6>& c, const GuidelineMask& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    if (mask.flags()[i]) s += c[i];
  return s / static_cast<double>(mask.count());
}

/// Evaluates all six components; the composite averages the enabled ones.
/// Disabled components are still reported.
inline RewardBreakdown composite_reward(std::span<const PlacedItem> placed, const Catalog& catalog,
                                        const Room& room, const RoomRaster& raster,
                                        const GuidelineMask& mask = {}) {
  RewardBreakdown b;
  b.r_pair = pair_reward(placed, catalog.pairs, room);
  b.r_access = access_reward(placed, catalog, room);
  b.r_vis = visibility_reward(placed, room);
  b.r_path = pathway_reward(placed, room, raster);
  b.r_balance = balance_reward(placed, room);
  b.r_align = alignment_reward(placed, catalog, room);
  b.r_composite = composite(b.components(), mask);
  return b;
}

inline RewardBreakdown composite_reward(std::span<const PlacedItem> placed, const Catalog& catalog,
                                        const Room& room, double resolution = 0.1,
                                        const GuidelineMask& mask = {}) {
  return composite_reward(placed, catalog, room, RoomRaster(room, resolution), mask);
}

}  // namespace furnish
