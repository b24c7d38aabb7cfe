#pragma once

// Exact 2D primitives for furniture footprints and room boundaries.
//
// Polygons are simple and counterclockwise. Areas of intersection are exact
// for arbitrary simple polygons (fan decomposition into signed triangles,
// each pair clipped with Sutherland-Hodgman); axis-aligned rectangles take a
// box fast path, which covers every footprint and clearance strip produced
// by the catalog.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace furnish {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
/// Counterclockwise perpendicular.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

struct Segment {
  Vec2 a;
  Vec2 b;

  Vec2 midpoint() const { return 0.5 * (a + b); }
  double length() const { return distance(a, b); }
};

inline double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

inline bool segments_cross(const Segment& s, const Segment& t) {
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
  const double d1 = orient(t.a, t.b, s.a);
  const double d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a);
  const double d4 = orient(s.a, s.b, t.b);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_cross(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

/// Counterclockwise rotation by 90 degrees times k.
class Rotation {
 public:
  constexpr Rotation() = default;
  explicit constexpr Rotation(int k) : k_(k) {
    if (k < 0 || k > 3) throw std::out_of_range("rotation index must be in {0,1,2,3}");
  }
  constexpr int index() const { return k_; }
  friend constexpr Rotation operator+(Rotation a, Rotation b) {
    return Rotation((a.k_ + b.k_) % 4);
  }
  friend constexpr bool operator==(Rotation, Rotation) = default;

 private:
  int k_ = 0;
};

constexpr Vec2 rotate(Vec2 p, Rotation r) {
  for (int i = 0; i < r.index(); ++i) p = perp(p);
  return p;
}

struct Box {
  Vec2 lo;
  Vec2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
};

inline double overlap_area(const Box& a, const Box& b) {
  const double w = std::min(a.hi.x, b.hi.x) - std::max(a.lo.x, b.lo.x);
  const double h = std::min(a.hi.y, b.hi.y) - std::max(a.lo.y, b.lo.y);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) {
    if (v_.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  }

  /// Axis-aligned rectangle with the given extents, centered at the origin.
  static Polygon rectangle(double width, double height) {
    if (!(width > 0.0) || !(height > 0.0))
      throw std::invalid_argument("rectangle extents must be positive");
    const double hw = 0.5 * width, hh = 0.5 * height;
    return Polygon({{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}});
  }
  static Polygon from_box(const Box& b) {
    return Polygon({b.lo, {b.hi.x, b.lo.y}, b.hi, {b.lo.x, b.hi.y}});
  }

  const std::vector<Vec2>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  const Vec2& operator[](std::size_t i) const { return v_[i]; }
  Segment edge(std::size_t i) const { return {v_[i], v_[(i + 1) % v_.size()]}; }

  double signed_area() const {
    double s = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) s += cross(v_[i], v_[(i + 1) % v_.size()]);
    return 0.5 * s;
  }
  double area() const { return std::abs(signed_area()); }

  Vec2 centroid() const {
    double a = 0.0, cx = 0.0, cy = 0.0;
    const Vec2 o = v_.front();
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const Vec2 p = v_[i] - o, q = v_[(i + 1) % v_.size()] - o;
      const double c = cross(p, q);
      a += c;
      cx += (p.x + q.x) * c;
      cy += (p.y + q.y) * c;
    }
    return {o.x + cx / (3.0 * a), o.y + cy / (3.0 * a)};
  }

  Box bounds() const {
    Box b{v_.front(), v_.front()};
    for (const Vec2& p : v_) {
      b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
      b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
    }
    return b;
  }

  /// The bounding box, when the polygon is exactly an axis-aligned rectangle.
  std::optional<Box> as_box() const {
    if (v_.size() != 4) return std::nullopt;
    for (std::size_t i = 0; i < 4; ++i) {
      const Segment e = edge(i);
      if (e.a.x != e.b.x && e.a.y != e.b.y) return std::nullopt;
    }
    const Box b = bounds();
    if (!(b.area() > 0.0)) return std::nullopt;
    return b;
  }

  bool is_convex() const {
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = v_[i], b = v_[(i + 1) % n], c = v_[(i + 2) % n];
      if (cross(b - a, c - b) < -1e-12) return false;
    }
    return true;
  }

  Polygon translated(Vec2 d) const {
    Polygon p = *this;
    for (Vec2& q : p.v_) q = q + d;
    return p;
  }

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  std::vector<Vec2> v_;
};

inline Polygon rotate(const Polygon& poly, Rotation r) {
  std::vector<Vec2> out;
  out.reserve(poly.size());
  for (const Vec2& p : poly.vertices()) out.push_back(rotate(p, r));
  return Polygon(std::move(out));
}

/// Rigid transform: rotate about the origin, then translate by `x`.
inline Polygon transform(Vec2 x, Rotation r, const Polygon& poly) {
  return rotate(poly, r).translated(x);
}

inline constexpr double kBoundaryEps = 1e-9;

/// Closed point-in-polygon test; points within kBoundaryEps of an edge count as inside.
inline bool contains_point(const Polygon& poly, Vec2 p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[j], b = poly[i];
    if (point_segment_distance(p, {a, b}) <= kBoundaryEps) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside;
}

namespace detail {

using Tri = std::array<Vec2, 3>;

// Clips a convex CCW polygon against the half-plane left of a->b.
inline void clip_half_plane(std::vector<Vec2>& poly, std::vector<Vec2>& scratch, Vec2 a,
                            Vec2 b) {
  scratch.clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % n];
    const double dp = cross(b - a, p - a), dq = cross(b - a, q - a);
    if (dp >= 0.0) scratch.push_back(p);
    if ((dp >= 0.0) != (dq >= 0.0)) {
      const double t = dp / (dp - dq);
      scratch.push_back(p + t * (q - p));
    }
  }
  poly.swap(scratch);
}

inline double convex_area(const std::vector<Vec2>& v) {
  if (v.size() < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

inline double triangle_overlap(const Tri& s, const Tri& c) {
  std::vector<Vec2> poly(s.begin(), s.end()), scratch;
  poly.reserve(9);
  scratch.reserve(9);
  for (int i = 0; i < 3 && poly.size() >= 3; ++i) clip_half_plane(poly, scratch, c[i], c[(i + 1) % 3]);
  return std::max(0.0, convex_area(poly));
}

// Fan triangles with orientation sign, each stored counterclockwise.
inline std::vector<std::pair<Tri, double>> signed_fan(const Polygon& p) {
  std::vector<std::pair<Tri, double>> out;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    Tri t{p[0], p[i], p[i + 1]};
    const double c = cross(t[1] - t[0], t[2] - t[0]);
    if (c == 0.0) continue;
    if (c < 0.0) std::swap(t[1], t[2]);
    out.emplace_back(t, c > 0.0 ? 1.0 : -1.0);
  }
  return out;
}

}  // namespace detail

/// Area of p ∩ q for simple polygons.
inline double intersection_area(const Polygon& p, const Polygon& q) {
  const Box pb = p.bounds(), qb = q.bounds();
  if (overlap_area(pb, qb) == 0.0) return 0.0;
  const auto pbox = p.as_box(), qbox = q.as_box();
  if (pbox && qbox) return overlap_area(*pbox, *qbox);
  double total = 0.0;
  const auto pf = detail::signed_fan(p), qf = detail::signed_fan(q);
  for (const auto& [ti, si] : pf)
    for (const auto& [tj, sj] : qf) total += si * sj * detail::triangle_overlap(ti, tj);
  return std::clamp(total, 0.0, std::min(p.area(), q.area()));
}

/// Closed containment of `poly` in `region`.
inline bool contains(const Polygon& region, const Polygon& poly) {
  if (const auto rb = region.as_box()) {
    const Box b = poly.bounds();
    return b.lo.x >= rb->lo.x - kBoundaryEps && b.lo.y >= rb->lo.y - kBoundaryEps &&
           b.hi.x <= rb->hi.x + kBoundaryEps && b.hi.y <= rb->hi.y + kBoundaryEps;
  }
  for (const Vec2& v : poly.vertices())
    if (!contains_point(region, v)) return false;
  return intersection_area(region, poly) >= poly.area() - kBoundaryEps;
}

/// Clearance strip swept from the faces of a convex polygon along `dir`,
/// excluding the polygon itself: (poly ⊕ {t·dir | 0 < t ≤ offset}) \ poly.
inline Polygon sweep_strip(const Polygon& poly, Vec2 dir, double offset) {
  if (!(offset > 0.0)) throw std::invalid_argument("sweep offset must be positive");
  if (std::abs(norm(dir) - 1.0) > 1e-9) throw std::invalid_argument("sweep direction must be unit");
  if (!poly.is_convex()) throw std::invalid_argument("sweep_strip requires a convex polygon");
  const std::size_t n = poly.size();
  auto faces = [&](std::size_t i) {
    const Segment e = poly.edge(i);
    const Vec2 outward{e.b.y - e.a.y, -(e.b.x - e.a.x)};
    return dot(outward, dir) > 1e-12;
  };
  // First facing edge whose predecessor does not face dir.
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i)
    if (faces(i) && !faces((i + n - 1) % n)) {
      start = i;
      break;
    }
  if (start == n) throw std::invalid_argument("degenerate polygon for sweep");
  std::vector<Vec2> chain{poly[start]};
  for (std::size_t i = start; faces(i % n); ++i) chain.push_back(poly[(i + 1) % n]);
  const Vec2 shift = offset * dir;
  // Chain runs counterclockwise along the facing side; the strip closes over
  // the shifted chain in reverse.
  std::vector<Vec2> strip(chain.rbegin(), chain.rend());
  for (const Vec2& p : chain) strip.push_back(p + shift);
  Polygon out(std::move(strip));
  if (out.signed_area() < 0.0) {
    auto v = out.vertices();
    std::reverse(v.begin(), v.end());
    out = Polygon(std::move(v));
  }
  return out;
}

}  // namespace furnish
