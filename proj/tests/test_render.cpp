#include <gtest/gtest.h>

#include <regex>

#include "furnish/render.hpp"

using namespace furnish;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

// Minimal structural check: every opened element closes in order, attributes are quoted.
bool well_formed(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const auto end = s.find('>', i);
    if (end == std::string::npos) return false;
    const std::string tag = s.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?') continue;
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find(' ')));
    }
  }
  return stack.empty();
}

std::vector<PlacedItem> two_items() {
  const Catalog c = default_catalog();
  return {place(c.at("desk"), {1.0, 1.0}, Rotation(0)), place(c.at("chair"), {1.0, 1.8}, Rotation(2))};
}

}  // namespace

TEST(Render, EmptyLayoutHasRoomAndDoorsOnly) {
  const Room room = room_preset(RoomShape::u_shape);
  const std::string svg = render_svg(std::span<const PlacedItem>{}, room);
  EXPECT_TRUE(well_formed(svg));
  EXPECT_EQ(count(svg, "class=\"room\""), 1u);
  EXPECT_EQ(count(svg, "class=\"door\""), room.doors.size());
  EXPECT_EQ(count(svg, "class=\"item\""), 0u);
  EXPECT_EQ(count(svg, "class=\"front\""), 0u);
  EXPECT_EQ(count(svg, "class=\"layout-centroid\""), 0u);
  EXPECT_EQ(count(svg, "class=\"room-center\""), 1u);
}

TEST(Render, OneItemOneArrow) {
  const Catalog c = default_catalog();
  const std::vector<PlacedItem> one{place(c.at("bed"), {2.5, 2.5}, Rotation(1))};
  const std::string svg = render_svg(one, room_preset(RoomShape::square));
  EXPECT_EQ(count(svg, "class=\"item\""), 1u);
  EXPECT_EQ(count(svg, "class=\"front\""), 1u);
  EXPECT_TRUE(well_formed(svg));
}

TEST(Render, EachItemYieldsOneShape) {
  const Room room = room_preset(RoomShape::rectangle);
  const auto placed = two_items();
  RenderOptions opt;
  opt.show_fronts = false;
  const std::string svg = render_svg(placed, room, opt);
  EXPECT_EQ(count(svg, "class=\"item\""), 2u);
  EXPECT_EQ(count(svg, "class=\"front\""), 0u);
  EXPECT_EQ(count(svg, "class=\"layout-centroid\""), 1u);
}

TEST(Render, ByteIdenticalOnRepeat) {
  const Room room = room_preset(RoomShape::l_shape);
  const auto placed = two_items();
  const Catalog c = default_catalog();
  RenderOptions opt;
  opt.show_access = true;
  EXPECT_EQ(render_svg(placed, room, opt, &c), render_svg(placed, room, opt, &c));
}

TEST(Render, AccessStripsNeedCatalog) {
  const Room room = room_preset(RoomShape::square);
  const auto placed = two_items();
  RenderOptions opt;
  opt.show_access = true;
  EXPECT_THROW(render_svg(placed, room, opt), std::invalid_argument);
  const Catalog c = default_catalog();
  std::size_t strips = 0;
  for (const auto& p : placed) strips += access_strips(p, c.at(p.spec_id)).size();
  EXPECT_EQ(count(render_svg(placed, room, opt, &c), "class=\"access\""), strips);
}

TEST(Render, YAxisPointsUp) {
  const Room room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  RenderOptions opt;
  opt.scale = 10;
  opt.margin = 0;
  const std::string svg = render_svg(std::span<const PlacedItem>{}, room, opt);
  // the south door sits at world y = 0, which is the bottom of a 100 px image
  EXPECT_NE(svg.find("y1=\"100.00\""), std::string::npos);
  EXPECT_NE(svg.find("width=\"100.00\" height=\"100.00\""), std::string::npos);
}

TEST(Render, ItemRectMatchesFootprintBounds) {
  const Room room = make_room(RoomShape::square, 10, 10, {{'s', 5.0, 0.9}});
  const Catalog c = default_catalog();
  const std::vector<PlacedItem> one{place(c.at("desk"), {3.0, 7.0}, Rotation(1))};
  RenderOptions opt;
  opt.scale = 10;
  opt.margin = 5;
  const std::string svg = render_svg(one, room, opt);
  const Box b = one[0].footprint.bounds();
  char want[160];
  std::snprintf(want, sizeof want, "x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"", 5 + b.lo.x * 10,
                5 + (10 - b.hi.y) * 10, b.width() * 10, b.height() * 10);
  EXPECT_NE(svg.find(want), std::string::npos) << want;
}

TEST(Render, LabelsAreEscaped) {
  EXPECT_EQ(xml_escape("a<b & \"c\"'>"), "a&lt;b &amp; &quot;c&quot;&apos;&gt;");
  Catalog c;
  FurnitureSpec s;
  s.id = "lamp<&>";
  s.width = s.depth = 0.4;
  c.items = {s};
  const std::vector<PlacedItem> one{place(c.at("lamp<&>"), {2, 2}, Rotation(0))};
  const std::string svg = render_svg(one, room_preset(RoomShape::square));
  EXPECT_TRUE(well_formed(svg));
  EXPECT_EQ(svg.find("lamp<"), std::string::npos);
  EXPECT_NE(svg.find("lamp&lt;&amp;&gt;"), std::string::npos);
}

TEST(Render, OptionsToggleOverlays) {
  const auto placed = two_items();
  RenderOptions opt;
  opt.show_centers = false;
  opt.show_labels = false;
  const std::string svg = render_svg(placed, room_preset(RoomShape::square), opt);
  EXPECT_EQ(count(svg, "<circle"), 0u);
  EXPECT_EQ(count(svg, "<text"), 0u);
  opt.scale = 0;
  EXPECT_THROW(render_svg(placed, room_preset(RoomShape::square), opt), std::invalid_argument);
}

TEST(Render, NoNegativeZeroInOutput) {
  const Room room = room_preset(RoomShape::square);
  const std::string svg = render_svg(two_items(), room);
  EXPECT_EQ(svg.find("-0.00"), std::string::npos);
  EXPECT_TRUE(std::regex_search(svg, std::regex("fill=\"green\"|stroke=\"green\"")));
}
