#pragma once

// SVG floor plans. World y points up; the image is flipped so north is at
// the top. Output is deterministic: fixed element order and number format.

#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "furnish/layout.hpp"
#include "furnish/rewards.hpp"
#include "furnish/scene.hpp"

namespace furnish {

struct RenderOptions {
  bool show_centers = true;  // room center (blue) and layout centroid (red)
  bool show_fronts = true;
  bool show_access = false;  // needs a catalog
  bool show_labels = true;
  double scale = 80.0;   // px per m
  double margin = 20.0;  // px

  void validate() const {
    if (!(scale > 0.0)) throw std::invalid_argument("render scale must be positive");
    if (!(margin >= 0.0)) throw std::invalid_argument("render margin must be non-negative");
  }
};

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

class SvgCanvas {
 public:
  SvgCanvas(const Box& bounds, const RenderOptions& opt) : bb_(bounds), opt_(opt) {}

  double x(double wx) const { return opt_.margin + (wx - bb_.lo.x) * opt_.scale; }
  double y(double wy) const { return opt_.margin + (bb_.hi.y - wy) * opt_.scale; }
  std::string pt(Vec2 p) const { return fmt(x(p.x)) + "," + fmt(y(p.y)); }
  std::string points(const Polygon& poly) const {
    std::string s;
    for (std::size_t i = 0; i < poly.size(); ++i) s += (i ? " " : "") + pt(poly.vertices()[i]);
    return s;
  }
  double width() const { return bb_.width() * opt_.scale + 2.0 * opt_.margin; }
  double height() const { return bb_.height() * opt_.scale + 2.0 * opt_.margin; }

 private:
  Box bb_;
  const RenderOptions& opt_;
};

}  // namespace detail

/// Renders a layout. `catalog` is only consulted when access strips are shown.
inline std::string render_svg(std::span<const PlacedItem> placed, const Room& room, const RenderOptions& opt = {},
                              const Catalog* catalog = nullptr) {
  opt.validate();
  if (opt.show_access && !catalog) throw std::invalid_argument("showing access strips needs the catalog");
  using detail::fmt;
  const detail::SvgCanvas c(room.boundary.bounds(), opt);
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(c.width()) + "\" height=\"" +
       fmt(c.height()) + "\" viewBox=\"0 0 " + fmt(c.width()) + " " + fmt(c.height()) + "\">\n";
  s += "  <rect class=\"background\" x=\"0\" y=\"0\" width=\"" + fmt(c.width()) + "\" height=\"" + fmt(c.height()) +
       "\" fill=\"white\"/>\n";
  s += "  <polygon class=\"room\" points=\"" + c.points(room.boundary) +
       "\" fill=\"none\" stroke=\"black\" stroke-width=\"3\"/>\n";
  for (const auto& d : room.doors)
    s += "  <line class=\"door\" x1=\"" + fmt(c.x(d.a.x)) + "\" y1=\"" + fmt(c.y(d.a.y)) + "\" x2=\"" +
         fmt(c.x(d.b.x)) + "\" y2=\"" + fmt(c.y(d.b.y)) + "\" stroke=\"green\" stroke-width=\"6\"/>\n";

  if (opt.show_access)
    for (const auto& p : placed)
      for (const auto& strip : access_strips(p, catalog->at(p.spec_id)))
        s += "  <polygon class=\"access\" points=\"" + c.points(strip) +
             "\" fill=\"orange\" fill-opacity=\"0.25\" stroke=\"orange\" stroke-dasharray=\"4 3\"/>\n";

  for (const auto& p : placed) {
    const Box b = p.footprint.bounds();
    s += "  <rect class=\"item\" data-id=\"" + xml_escape(p.spec_id) + "\" x=\"" + fmt(c.x(b.lo.x)) + "\" y=\"" +
         fmt(c.y(b.hi.y)) + "\" width=\"" + fmt(b.width() * opt.scale) + "\" height=\"" +
         fmt(b.height() * opt.scale) + "\" fill=\"#bdbdbd\" stroke=\"#424242\" stroke-width=\"1.5\"/>\n";
  }
  if (opt.show_fronts) {
    for (const auto& p : placed) {
      const Box b = p.footprint.bounds();
      const double reach = 0.45 * std::min(b.width(), b.height());
      const Vec2 tip = p.position + reach * p.front_world;
      const Vec2 side = 0.12 * reach * perp(p.front_world);
      const Vec2 back = tip - 0.3 * reach * p.front_world;
      s += "  <path class=\"front\" d=\"M " + c.pt(p.position) + " L " + c.pt(tip) + " M " + c.pt(back + side) +
           " L " + c.pt(tip) + " L " + c.pt(back - side) + "\" fill=\"none\" stroke=\"#212121\" stroke-width=\"2\"/>\n";
    }
  }
  if (opt.show_labels)
    for (const auto& p : placed)
      s += "  <text class=\"label\" x=\"" + fmt(c.x(p.position.x)) + "\" y=\"" + fmt(c.y(p.position.y) - 6.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + xml_escape(p.spec_id) +
           "</text>\n";
  if (opt.show_centers) {
    const Vec2 o = room.center();
    s += "  <circle class=\"room-center\" cx=\"" + fmt(c.x(o.x)) + "\" cy=\"" + fmt(c.y(o.y)) +
         "\" r=\"5\" fill=\"blue\"/>\n";
    if (!placed.empty()) {
      const Vec2 m = spatial_moments(placed).mean;
      s += "  <circle class=\"layout-centroid\" cx=\"" + fmt(c.x(m.x)) + "\" cy=\"" + fmt(c.y(m.y)) +
           "\" r=\"5\" fill=\"red\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace furnish
