#pragma once

#include <algorithm>
#include <array>

#include "gestalt/hierarchy.hpp"
#include "gestalt/image.hpp"

namespace gestalt {

inline constexpr Rgb kTextColor{255, 0, 0};
inline constexpr Rgb kNonTextColor{0, 200, 0};
inline constexpr Rgb kBlockColor{255, 105, 180};

// Subgroup colours, cycled by subgroup index within the image; pink is reserved for blocks.
inline constexpr std::array<Rgb, 6> kSubgroupPalette{
    {{0, 120, 255}, {255, 170, 0}, {140, 0, 200}, {0, 180, 180}, {120, 80, 0}, {90, 90, 90}}};

namespace detail {

inline void outline(RgbImage& img, const BBox& b, Rgb c, int thickness) {
  for (int t = 0; t < thickness; ++t) {
    const int l = b.left() + t, r = b.right() - 1 - t, top = b.top() + t, btm = b.bottom() - 1 - t;
    if (l > r || top > btm) break;
    for (int x = l; x <= r; ++x) {
      img.at(x, top) = c;
      img.at(x, btm) = c;
    }
    for (int y = top; y <= btm; ++y) {
      img.at(l, y) = c;
      img.at(r, y) = c;
    }
  }
}

inline BBox inflate(const BBox& b, int d, const BBox& bounds) {
  return {std::max(bounds.left(), b.left() - d), std::max(bounds.top(), b.top() - d),
          std::min(bounds.right(), b.right() + d), std::min(bounds.bottom(), b.bottom() + d)};
}

inline void check_bounds(const Node& n, const BBox& bounds) {
  if (!contains(bounds, n.bbox)) throw BoundsError("overlay: node outside the image");
  for (const auto& c : n.children) check_bounds(c, bounds);
}

inline void draw_widgets(RgbImage& img, const Node& n, int thickness) {
  if (n.kind == NodeKind::Text) {
    outline(img, n.bbox, kTextColor, thickness);
  } else if (n.kind == NodeKind::NonText || n.kind == NodeKind::Container) {
    outline(img, n.bbox, kNonTextColor, thickness);
  }
  for (const auto& c : n.children) draw_widgets(img, c, thickness);
}

}  // namespace detail

// Text red, non-text green, every subgroup hull in its own palette colour and
// every block hull pink.
inline RgbImage render_overlay(const RgbImage& image, const Hierarchy& h) {
  for (const auto& n : h.roots) detail::check_bounds(n, image.bounds());
  RgbImage out = image;
  const int thickness = std::max(1, image.width() / 720);
  for (const auto& n : h.roots) detail::draw_widgets(out, n, thickness);
  std::size_t subgroup = 0;
  for (const auto& n : h.roots) {
    if (n.kind != NodeKind::Block) continue;
    for (const auto& g : n.children) {
      if (g.kind != NodeKind::Group) continue;
      const Rgb c = kSubgroupPalette[subgroup++ % kSubgroupPalette.size()];
      detail::outline(out, detail::inflate(g.bbox, 2 * thickness, image.bounds()), c, thickness);
    }
    detail::outline(out, detail::inflate(n.bbox, 4 * thickness, image.bounds()), kBlockColor, thickness);
  }
  return out;
}

}  // namespace gestalt
