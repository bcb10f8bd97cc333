#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gestalt/geometry.hpp"
#include "gestalt/hierarchy.hpp"
#include "gestalt/image.hpp"
#include "gestalt/ocr.hpp"

namespace gestalt {

enum class LayoutKind { List, Grid, Cards, Tabs, Mixed };

inline const char* to_string(LayoutKind k) {
  switch (k) {
    case LayoutKind::List: return "list";
    case LayoutKind::Grid: return "grid";
    case LayoutKind::Cards: return "cards";
    case LayoutKind::Tabs: return "tabs";
    case LayoutKind::Mixed: return "mixed";
  }
  return "?";
}

inline LayoutKind layout_kind_from_string(const std::string& s) {
  for (auto k : {LayoutKind::List, LayoutKind::Grid, LayoutKind::Cards, LayoutKind::Tabs, LayoutKind::Mixed}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown layout kind '" + s + "'");
}

// Sizes are in pixels at a 1440-wide reference and scale with `width`.
struct SynthSpec {
  std::uint64_t seed = 1;
  LayoutKind kind = LayoutKind::List;
  int items = 0;    // 0 = drawn from the seed; grids: total tiles
  int columns = 0;  // grid only; 0 = drawn from the seed
  int width = 1440;
  int height = 2560;
  int icon_min = 80;
  int icon_max = 112;
  int gap_min = 24;  // vertical gap between list items / cards
  int gap_max = 40;
  bool occlusion = false;     // list: last icon left out of the pixels
  bool plant_errors = false;  // cards: one icon below min area, one icon also reported by OCR

  void validate() const {
    if (width < 360 || height < 640) throw std::invalid_argument("synth: canvas must be at least 360x640");
    if (items < 0 || columns < 0) throw std::invalid_argument("synth: counts must be >= 0");
    if (icon_min < 16 || icon_max < icon_min) throw std::invalid_argument("synth: bad icon size range");
    if (gap_min < 8 || gap_max < gap_min) throw std::invalid_argument("synth: bad gap range");
  }
};

struct PlantedErrors {
  std::optional<BBox> missing;  // rendered below the minimum widget area
  std::optional<BBox> flipped;  // non-text widget duplicated as an OCR text entry
};

struct SynthGui {
  RgbImage image;
  std::vector<TextBox> ocr;
  std::vector<Widget> widgets;  // rendered widgets, containers with children
  Hierarchy truth;
  PlantedErrors planted;
};

namespace detail {

class SynthCanvas {
 public:
  explicit SynthCanvas(const SynthSpec& spec)
      : spec_(spec), rng_(spec.seed), scale_(spec.width / 1440.0), image_(spec.width, spec.height, Rgb{255, 255, 255}) {}

  // Uniform integer in [lo, hi]; modulo keeps the stream identical on every platform.
  int uniform(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool chance(int percent) { return uniform(0, 99) < percent; }

  int px(double v) const { return std::max(1, static_cast<int>(std::lround(v * scale_))); }
  int ref_height() const { return static_cast<int>(spec_.height / scale_); }

  Rgb color() {
    static constexpr std::array<Rgb, 8> kPalette{{{33, 150, 243}, {229, 57, 53}, {67, 160, 71}, {251, 140, 0},
                                                  {142, 36, 170}, {0, 137, 123}, {84, 110, 122}, {109, 76, 65}}};
    return kPalette[static_cast<std::size_t>(uniform(0, 7))];
  }

  void fill(const BBox& b, Rgb c) {
    for (int y = b.top(); y < b.bottom(); ++y) {
      for (int x = b.left(); x < b.right(); ++x) image_.at(x, y) = c;
    }
  }

  Widget& icon(int x, int y, int w, int h) {
    const BBox b{px(x), px(y), px(x) + px(w), px(y) + px(h)};
    fill(b, color());
    widgets_.push_back(make_nontext(next_id_++, b));
    return widgets_.back();
  }

  // Hollow frame: a rectangular wireframe of 2px (scaled) stroke.
  Widget& frame(int x, int y, int w, int h) {
    const BBox b{px(x), px(y), px(x) + px(w), px(y) + px(h)};
    const int t = px(2);
    const Rgb c{158, 158, 158};
    fill({b.left(), b.top(), b.right(), b.top() + t}, c);
    fill({b.left(), b.bottom() - t, b.right(), b.bottom()}, c);
    fill({b.left(), b.top(), b.left() + t, b.bottom()}, c);
    fill({b.right() - t, b.top(), b.right(), b.bottom()}, c);
    widgets_.push_back(make_nontext(next_id_++, b));
    widgets_.back().is_container = true;
    return widgets_.back();
  }

  // One text line drawn as thin glyph bars, reported to OCR word by word.
  // `chars` counts letters and single spaces; each glyph cell is `cell` wide.
  Widget& text(int x, int y, int line_h, int cell, int chars) {
    std::vector<int> words;
    int left = chars;
    while (left > 0) {
      int w = std::min(left, uniform(3, 8));
      if (left - w == 1) w = left;  // no dangling space
      words.push_back(w);
      left -= w + 1;
    }
    const int top = px(y), bottom = px(y) + px(line_h);
    const int cw = px(cell);
    const int bar = std::max(1, cw / 4);
    const Rgb ink{48, 48, 48};
    int cx = px(x);
    std::string content;
    BBox line;
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
      std::string word;
      const int start = cx;
      for (int k = 0; k < words[wi]; ++k) {
        word += static_cast<char>('a' + uniform(0, 25));
        const int glyph_h = std::max(1, (bottom - top) * uniform(55, 100) / 100);
        const int gx = cx + cw / 4;
        fill({gx, bottom - glyph_h, gx + bar, bottom}, ink);
        if (chance(40)) fill({gx + 2 * bar, bottom - glyph_h / 2, gx + 3 * bar, bottom}, ink);
        cx += cw;
      }
      const BBox wb{start, top, cx, bottom};
      ocr_.push_back({wb, word, 0.99});
      line = wi == 0 ? wb : hull(line, wb);
      if (wi) content += ' ';
      content += word;
      cx += cw;  // space
    }
    widgets_.push_back(make_text(next_id_++, line, content));
    return widgets_.back();
  }

  const SynthSpec& spec() const { return spec_; }
  std::vector<Widget>& widgets() { return widgets_; }
  std::vector<TextBox>& ocr() { return ocr_; }
  RgbImage& image() { return image_; }
  WidgetId next_id() const { return next_id_; }

 private:
  SynthSpec spec_;
  std::mt19937_64 rng_;
  double scale_;
  RgbImage image_;
  std::vector<Widget> widgets_;
  std::vector<TextBox> ocr_;
  WidgetId next_id_ = 0;
};

inline Node leaf_of(const Widget& w) { return leaf_node(w); }

inline Node group_of(std::vector<Node> children) {
  sort_reading_order(children);
  Node g{NodeKind::Group, hull_of(children, [](const Node& n) { return n.bbox; }), std::nullopt, "", std::move(children)};
  return g;
}

inline Node block_of(std::vector<Node> groups) {
  sort_reading_order(groups);
  Node b{NodeKind::Block, hull_of(groups, [](const Node& n) { return n.bbox; }), std::nullopt, "", std::move(groups)};
  return b;
}

constexpr int kMargin = 48;

inline Node render_list(SynthCanvas& c, int top, int count) {
  const auto& spec = c.spec();
  const int icon = c.uniform(spec.icon_min, spec.icon_max);
  const int gap = c.uniform(spec.gap_min, spec.gap_max);
  const bool subtitle = c.chance(75);
  const int item_h = std::max(icon, subtitle ? 110 : 60) + 16;
  const int text_x = kMargin + icon + 32;
  std::vector<Node> groups;
  for (int i = 0; i < count; ++i) {
    const int y = top + i * (item_h + gap);
    std::vector<Node> members;
    const bool occluded = spec.occlusion && i == count - 1;
    if (!occluded) members.push_back(leaf_of(c.icon(kMargin, y + (item_h - icon) / 2, icon, icon)));
    const int title_y = y + (item_h - (subtitle ? 84 : 32)) / 2;
    members.push_back(leaf_of(c.text(text_x, title_y, 32, 16, c.uniform(8, 24))));
    if (subtitle) members.push_back(leaf_of(c.text(text_x, title_y + 58, 26, 13, c.uniform(12, 40))));
    groups.push_back(group_of(std::move(members)));
  }
  return block_of(std::move(groups));
}

inline int list_capacity(SynthCanvas& c, int top) {
  const auto& spec = c.spec();
  return std::max(2, (c.ref_height() - top - kMargin) / (std::max(spec.icon_max, 110) + 16 + spec.gap_max));
}

inline Node render_tabs(SynthCanvas& c, int top, int count) {
  const int cell = (1440 - 2 * kMargin) / count;
  const int icon = 56;
  std::vector<Node> groups;
  for (int i = 0; i < count; ++i) {
    const int cx = kMargin + i * cell + cell / 2;
    std::vector<Node> members;
    members.push_back(leaf_of(c.icon(cx - icon / 2, top + 16, icon, icon)));
    const int chars = c.uniform(4, 10);
    members.push_back(leaf_of(c.text(cx - chars * 13 / 2, top + 16 + icon + 12, 26, 13, chars)));
    groups.push_back(group_of(std::move(members)));
  }
  return block_of(std::move(groups));
}

}  // namespace detail

// Renders one synthetic GUI with its ground truth. Identical specs give
// identical pixels, OCR fixtures and hierarchies.
inline SynthGui synthesize(const SynthSpec& spec) {
  spec.validate();
  detail::SynthCanvas c(spec);
  using detail::kMargin;
  SynthGui gui;
  std::vector<Node> roots;

  switch (spec.kind) {
    case LayoutKind::List: {
      const int cap = detail::list_capacity(c, 96);
      const int n = spec.items > 0 ? spec.items : c.uniform(std::min(4, cap), std::min(8, cap));
      roots.push_back(detail::render_list(c, 96, n));
      break;
    }
    case LayoutKind::Tabs: {
      const int n = spec.items > 0 ? spec.items : c.uniform(3, 5);
      roots.push_back(detail::render_tabs(c, 96, n));
      break;
    }
    case LayoutKind::Grid: {
      const int cols = spec.columns > 0 ? spec.columns : c.uniform(2, 3);
      const int gutter = 32;
      const int tile_w = (1440 - 2 * kMargin - (cols - 1) * gutter) / cols;
      int image_h = tile_w * 3 / 4;
      const int extra = 12 + 28 + 44;
      const int max_rows = std::max(1, (c.ref_height() - 96 - kMargin) / (image_h + extra));
      int rows = spec.items > 0 ? std::max(1, spec.items / cols) : c.uniform(std::min(2, max_rows), std::min(4, max_rows));
      if (rows > max_rows) image_h = std::max(48, (c.ref_height() - 96 - kMargin) / rows - extra);
      const int caption_chars = std::max(3, tile_w * c.uniform(50, 85) / 100 / 14);
      std::vector<Node> groups;
      for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < cols; ++k) {
          const int x = kMargin + k * (tile_w + gutter);
          const int y = 96 + r * (image_h + extra);
          std::vector<Node> members;
          members.push_back(detail::leaf_of(c.icon(x, y, tile_w, image_h)));
          members.push_back(detail::leaf_of(c.text(x, y + image_h + 12, 28, 14, caption_chars)));
          groups.push_back(detail::group_of(std::move(members)));
        }
      }
      roots.push_back(detail::block_of(std::move(groups)));
      break;
    }
    case LayoutKind::Cards: {
      const int card_h = 208;
      const int gap = c.uniform(spec.gap_min, spec.gap_max);
      const int cap = std::max(2, (c.ref_height() - 96 - kMargin) / (card_h + gap));
      int n = spec.items > 0 ? spec.items : c.uniform(std::min(3, cap), std::min(6, cap));
      if (spec.plant_errors) n = std::max(n, 4);
      int missing = -1, flipped = -1;
      if (spec.plant_errors) {
        missing = c.uniform(0, n - 1);
        flipped = (missing + c.uniform(1, n - 1)) % n;
      }
      const int thumb = 144, icon = 48;
      std::vector<Node> groups;
      for (int i = 0; i < n; ++i) {
        const int y = 96 + i * (card_h + gap);
        const WidgetId frame_id = c.frame(kMargin, y, 1440 - 2 * kMargin, card_h).id;
        std::vector<WidgetId> kid_ids;
        kid_ids.push_back(c.icon(kMargin + 32, y + 32, thumb, thumb).id);
        const int tx = kMargin + 32 + thumb + 32;
        kid_ids.push_back(c.text(tx, y + 40, 32, 16, c.uniform(8, 20)).id);
        kid_ids.push_back(c.text(tx, y + 98, 26, 13, c.uniform(12, 36)).id);
        const int ix = 1440 - kMargin - 32 - icon;
        if (i == missing) {
          const int tiny = 18;
          const Widget& w = c.icon(ix + (icon - tiny) / 2, y + 32 + (icon - tiny) / 2, tiny, tiny);
          kid_ids.push_back(w.id);
          gui.planted.missing = w.bbox;
        } else {
          const Widget& w = c.icon(ix, y + 32, icon, icon);
          kid_ids.push_back(w.id);
          if (i == flipped) {
            c.ocr().push_back({w.bbox, "o", 0.42});
            gui.planted.flipped = w.bbox;
          }
        }
        Node container{NodeKind::Container, BBox{}, frame_id, "", {}};
        for (auto& w : c.widgets()) {
          if (w.id == frame_id) {
            w.children = kid_ids;
            container.bbox = w.bbox;
          }
        }
        for (WidgetId id : kid_ids) {
          for (const auto& w : c.widgets()) {
            if (w.id == id) container.children.push_back(detail::leaf_of(w));
          }
        }
        sort_reading_order(container.children);
        groups.push_back(detail::group_of({std::move(container)}));
      }
      roots.push_back(detail::block_of(std::move(groups)));
      break;
    }
    case LayoutKind::Mixed: {
      roots.push_back(detail::leaf_of(c.icon(32, 40, 48, 48)));
      roots.push_back(detail::leaf_of(c.text(112, 48, 32, 16, c.uniform(6, 16))));
      roots.push_back(detail::render_tabs(c, 160, c.uniform(3, 4)));
      const int cap = detail::list_capacity(c, 360);
      const int n = spec.items > 0 ? std::min(spec.items, cap) : c.uniform(std::min(3, cap), std::min(6, cap));
      roots.push_back(detail::render_list(c, 360, n));
      break;
    }
  }

  for (const auto& w : c.widgets()) {
    if (!contains(c.image().bounds(), w.bbox)) {
      throw std::invalid_argument("synth: layout does not fit the canvas; increase the height or reduce items");
    }
  }
  sort_reading_order(roots);
  gui.truth.roots = std::move(roots);
  gui.image = std::move(c.image());
  gui.ocr = std::move(c.ocr());
  gui.widgets = std::move(c.widgets());
  return gui;
}

}  // namespace gestalt
