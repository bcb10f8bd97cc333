#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gestalt {

using WidgetId = int;

enum class Axis { Horizontal, Vertical };

// Pixel box with exclusive right/bottom edges.
class BBox {
 public:
  BBox() = default;
  BBox(int left, int top, int right, int bottom)
      : left_(left), top_(top), right_(right), bottom_(bottom) {
    if (left < 0 || top < 0) {
      throw std::invalid_argument("BBox: negative coordinate");
    }
    if (left >= right || top >= bottom) {
      throw std::invalid_argument("BBox: degenerate box (" + std::to_string(left) + "," +
                                  std::to_string(top) + "," + std::to_string(right) + "," +
                                  std::to_string(bottom) + ")");
    }
  }

  int left() const { return left_; }
  int top() const { return top_; }
  int right() const { return right_; }
  int bottom() const { return bottom_; }
  int width() const { return right_ - left_; }
  int height() const { return bottom_ - top_; }
  std::int64_t area() const { return std::int64_t{width()} * height(); }
  double center_x() const { return 0.5 * (left_ + right_); }
  double center_y() const { return 0.5 * (top_ + bottom_); }

  BBox translated(int dx, int dy) const {
    return {left_ + dx, top_ + dy, right_ + dx, bottom_ + dy};
  }

  friend bool operator==(const BBox&, const BBox&) = default;

 private:
  // A default-constructed box is the unit pixel at the origin, so it is valid.
  int left_ = 0;
  int top_ = 0;
  int right_ = 1;
  int bottom_ = 1;
};

inline BBox hull(const BBox& a, const BBox& b) {
  return {std::min(a.left(), b.left()), std::min(a.top(), b.top()),
          std::max(a.right(), b.right()), std::max(a.bottom(), b.bottom())};
}

inline std::optional<BBox> intersection(const BBox& a, const BBox& b) {
  const int l = std::max(a.left(), b.left());
  const int t = std::max(a.top(), b.top());
  const int r = std::min(a.right(), b.right());
  const int btm = std::min(a.bottom(), b.bottom());
  if (l >= r || t >= btm) return std::nullopt;
  return BBox{l, t, r, btm};
}

inline double iou(const BBox& a, const BBox& b) {
  const auto inter = intersection(a, b);
  if (!inter) return 0.0;
  const auto i = inter->area();
  return static_cast<double>(i) / static_cast<double>(a.area() + b.area() - i);
}

// Every edge of `inner` lies inside `outer`, with `tolerance` pixels of outward slack.
inline bool contains(const BBox& outer, const BBox& inner, int tolerance = 0) {
  return inner.left() >= outer.left() - tolerance && inner.top() >= outer.top() - tolerance &&
         inner.right() <= outer.right() + tolerance &&
         inner.bottom() <= outer.bottom() + tolerance;
}

// Edge-to-edge distance along one axis; 0 when the projections overlap or touch.
inline int axis_gap(const BBox& a, const BBox& b, Axis axis) {
  if (axis == Axis::Horizontal) {
    return std::max({0, b.left() - a.right(), a.left() - b.right()});
  }
  return std::max({0, b.top() - a.bottom(), a.top() - b.bottom()});
}

// Length of the shared projection on one axis (0 when disjoint).
inline int axis_overlap(const BBox& a, const BBox& b, Axis axis) {
  if (axis == Axis::Horizontal) {
    return std::max(0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  }
  return std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
}

enum class WidgetClass { Text, NonText };

inline const char* to_string(WidgetClass c) { return c == WidgetClass::Text ? "text" : "nontext"; }

struct Widget {
  WidgetId id = 0;
  BBox bbox;
  WidgetClass cls = WidgetClass::NonText;
  std::optional<std::string> text;  // set iff cls == Text
  bool is_container = false;
  std::vector<WidgetId> children;

  double center_x() const { return bbox.center_x(); }
  double center_y() const { return bbox.center_y(); }
  int top() const { return bbox.top(); }
  int left() const { return bbox.left(); }
  std::int64_t area() const { return bbox.area(); }

  friend bool operator==(const Widget&, const Widget&) = default;
};

inline Widget make_text(WidgetId id, BBox box, std::string content) {
  return Widget{id, box, WidgetClass::Text, std::move(content), false, {}};
}

inline Widget make_nontext(WidgetId id, BBox box) {
  return Widget{id, box, WidgetClass::NonText, std::nullopt, false, {}};
}

// Flip a widget's class while keeping the text/no-text invariant.
inline void set_class(Widget& w, WidgetClass c) {
  w.cls = c;
  if (c == WidgetClass::NonText) {
    w.text.reset();
  } else if (!w.text) {
    w.text = std::string{};
  }
}

// Tight hull of a non-empty set of boxes.
template <typename Range, typename Proj>
BBox hull_of(const Range& items, Proj proj) {
  auto it = std::begin(items);
  BBox h = proj(*it);
  for (++it; it != std::end(items); ++it) h = hull(h, proj(*it));
  return h;
}

// Reading order: boxes are grouped into lines (a box joins the current line when
// its vertical center falls inside the line leader's vertical span) and each line
// is read left to right. Returns the permutation of indices.
inline std::vector<std::size_t> reading_order(const std::vector<BBox>& boxes) {
  std::vector<std::size_t> idx(boxes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& ba = boxes[a];
    const auto& bb = boxes[b];
    if (ba.top() != bb.top()) return ba.top() < bb.top();
    return ba.left() < bb.left();
  });
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    const BBox& lead = boxes[idx[i]];
    std::size_t j = i + 1;
    while (j < idx.size()) {
      const double cy = boxes[idx[j]].center_y();
      if (cy >= lead.top() && cy < lead.bottom()) {
        ++j;
      } else {
        break;
      }
    }
    std::vector<std::size_t> line(idx.begin() + static_cast<std::ptrdiff_t>(i),
                                  idx.begin() + static_cast<std::ptrdiff_t>(j));
    std::stable_sort(line.begin(), line.end(), [&](std::size_t a, std::size_t b) {
      const auto& ba = boxes[a];
      const auto& bb = boxes[b];
      if (ba.left() != bb.left()) return ba.left() < bb.left();
      return ba.top() < bb.top();
    });
    out.insert(out.end(), line.begin(), line.end());
    i = j;
  }
  return out;
}

}  // namespace gestalt
