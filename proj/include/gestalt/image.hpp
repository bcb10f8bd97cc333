#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gestalt/geometry.hpp"

namespace gestalt {

class BoundsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major pixel grid.
template <typename Pixel>
class Raster {
 public:
  using pixel_type = Pixel;

  Raster() = default;
  Raster(int width, int height, Pixel fill = Pixel{})
      : width_(width), height_(height) {
    if (width < 1 || height < 1) throw std::invalid_argument("Raster: empty dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Raster(int width, int height, std::vector<Pixel> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) throw std::invalid_argument("Raster: empty dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw std::invalid_argument("Raster: pixel count does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  BBox bounds() const { return {0, 0, width_, height_}; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  Pixel& at(int x, int y) { return data_[index(x, y)]; }
  const Pixel& at(int x, int y) const { return data_[index(x, y)]; }

  std::span<Pixel> pixels() { return data_; }
  std::span<const Pixel> pixels() const { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Pixel> data_;
};

using RgbImage = Raster<Rgb>;
using GrayImage = Raster<std::uint8_t>;

// 1 = foreground, 0 = background.
class BinaryMap : public Raster<std::uint8_t> {
 public:
  using Raster::Raster;
  bool foreground(int x, int y) const { return at(x, y) != 0; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(pixels().begin(), pixels().end(), std::uint8_t{1}));
  }
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

// A connected foreground region. `pixels` are in raster order.
struct Region {
  int label = 0;
  std::vector<Point> pixels;
  BBox bbox;
};

inline std::uint8_t luma(Rgb p) {
  return static_cast<std::uint8_t>((299 * p.r + 587 * p.g + 114 * p.b + 500) / 1000);
}

inline GrayImage to_grayscale(const RgbImage& image) {
  GrayImage out(image.width(), image.height());
  auto src = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = luma(src[i]);
  return out;
}

template <typename Pixel>
Raster<Pixel> crop(const Raster<Pixel>& image, const BBox& box) {
  if (!contains(image.bounds(), box)) {
    throw BoundsError("crop: region (" + std::to_string(box.left()) + "," +
                      std::to_string(box.top()) + "," + std::to_string(box.right()) + "," +
                      std::to_string(box.bottom()) + ") exceeds " + std::to_string(image.width()) +
                      "x" + std::to_string(image.height()) + " image");
  }
  Raster<Pixel> out(box.width(), box.height());
  for (int y = 0; y < box.height(); ++y) {
    for (int x = 0; x < box.width(); ++x) out.at(x, y) = image.at(box.left() + x, box.top() + y);
  }
  return out;
}

// Most frequent intensity; ties go to the brighter value.
inline std::uint8_t background_intensity(const GrayImage& gray) {
  std::array<std::size_t, 256> hist{};
  for (auto v : gray.pixels()) ++hist[v];
  int best = 255;
  for (int v = 255; v >= 0; --v) {
    if (hist[static_cast<std::size_t>(v)] > hist[static_cast<std::size_t>(best)]) best = v;
  }
  return static_cast<std::uint8_t>(best);
}

namespace detail {

// Labels 4-connected background pixels that cannot reach the image border and
// promotes those whose mean intensity departs from the background by more than
// `threshold`. Background-coloured holes (frame interiors) stay open.
inline void close_solid_holes(const GrayImage& gray, BinaryMap& map, int bg, int threshold) {
  const int w = map.width();
  const int h = map.height();
  std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  std::vector<int> stack;
  std::vector<int> members;
  auto idx = [w](int x, int y) { return y * w + x; };
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const int s = idx(sx, sy);
      if (map.pixels()[static_cast<std::size_t>(s)] || label[static_cast<std::size_t>(s)] >= 0) {
        continue;
      }
      bool touches_border = false;
      long long deviation = 0;
      members.clear();
      stack.assign(1, s);
      label[static_cast<std::size_t>(s)] = 1;
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        members.push_back(p);
        const int x = p % w;
        const int y = p / w;
        deviation += std::abs(static_cast<int>(gray.pixels()[static_cast<std::size_t>(p)]) - bg);
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) touches_border = true;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
          const int q = idx(nx[k], ny[k]);
          if (map.pixels()[static_cast<std::size_t>(q)] || label[static_cast<std::size_t>(q)] >= 0) {
            continue;
          }
          label[static_cast<std::size_t>(q)] = 1;
          stack.push_back(q);
        }
      }
      if (touches_border) continue;
      const double mean = static_cast<double>(deviation) / static_cast<double>(members.size());
      if (mean > threshold) {
        for (int p : members) map.pixels()[static_cast<std::size_t>(p)] = 1;
      }
    }
  }
}

}  // namespace detail

// Forward-difference gradient map. Each right/bottom neighbour pair whose intensity
// difference exceeds `threshold` marks the pixel of the pair that stands out more
// from the background intensity, so edges land on the widget side and a solid
// widget's bbox is exact. Enclosed non-background holes are then filled.
inline BinaryMap gradient_binarize(const GrayImage& gray, int threshold) {
  if (threshold < 0) throw std::invalid_argument("gradient_binarize: negative threshold");
  const int w = gray.width();
  const int h = gray.height();
  BinaryMap map(w, h, 0);
  const int bg = background_intensity(gray);
  auto mark = [&](int x0, int y0, int x1, int y1) {
    const int a = gray.at(x0, y0);
    const int b = gray.at(x1, y1);
    if (std::abs(a - b) <= threshold) return;
    if (std::abs(b - bg) > std::abs(a - bg)) {
      map.at(x1, y1) = 1;
    } else {
      map.at(x0, y0) = 1;
    }
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) mark(x, y, x + 1, y);
      if (y + 1 < h) mark(x, y, x, y + 1);
    }
  }
  detail::close_solid_holes(gray, map, bg, threshold);
  return map;
}

// 8-connected labeling. Regions are ordered by bbox origin (top, then left).
inline std::vector<Region> connected_components(const BinaryMap& map) {
  const int w = map.width();
  const int h = map.height();
  std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  std::vector<Region> regions;
  std::vector<Point> stack;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const auto s = static_cast<std::size_t>(sy) * static_cast<std::size_t>(w) +
                     static_cast<std::size_t>(sx);
      if (!map.foreground(sx, sy) || label[s] >= 0) continue;
      const int id = static_cast<int>(regions.size());
      Region region;
      region.label = id;
      int l = sx, t = sy, r = sx, b = sy;
      label[s] = id;
      stack.assign(1, Point{sx, sy});
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        region.pixels.push_back(p);
        l = std::min(l, p.x);
        r = std::max(r, p.x);
        t = std::min(t, p.y);
        b = std::max(b, p.y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto q = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) +
                           static_cast<std::size_t>(nx);
            if (!map.foreground(nx, ny) || label[q] >= 0) continue;
            label[q] = id;
            stack.push_back({nx, ny});
          }
        }
      }
      std::sort(region.pixels.begin(), region.pixels.end(),
                [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      region.bbox = BBox{l, t, r + 1, b + 1};
      regions.push_back(std::move(region));
    }
  }
  std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    if (a.bbox.top() != b.bbox.top()) return a.bbox.top() < b.bbox.top();
    return a.bbox.left() < b.bbox.left();
  });
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].label = static_cast<int>(i);
  return regions;
}

namespace detail {

// Region membership over its bbox.
class RegionMask {
 public:
  explicit RegionMask(const Region& region)
      : box_(region.bbox),
        bits_(static_cast<std::size_t>(box_.width()) * static_cast<std::size_t>(box_.height()), 0) {
    for (const Point& p : region.pixels) bits_[offset(p.x, p.y)] = 1;
  }
  bool test(int x, int y) const {
    if (x < box_.left() || y < box_.top() || x >= box_.right() || y >= box_.bottom()) return false;
    return bits_[offset(x, y)] != 0;
  }

 private:
  std::size_t offset(int x, int y) const {
    return static_cast<std::size_t>(y - box_.top()) * static_cast<std::size_t>(box_.width()) +
           static_cast<std::size_t>(x - box_.left());
  }
  BBox box_;
  std::vector<std::uint8_t> bits_;
};

// Moore neighbourhood, clockwise in image coordinates starting at west.
inline constexpr std::array<Point, 8> kMoore{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                              {1, 0},  {1, 1},   {0, 1},  {-1, 1}}};

inline int moore_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kMoore[static_cast<std::size_t>(i)].x == dx && kMoore[static_cast<std::size_t>(i)].y == dy) {
      return i;
    }
  }
  return 0;
}

}  // namespace detail

// Moore-neighbour tracing of the outer boundary with Jacob's stopping rule. The
// closing return to the start pixel is implied, not repeated.
inline std::vector<Point> trace_boundary(const Region& region) {
  if (region.pixels.empty()) throw std::invalid_argument("trace_boundary: empty region");
  const detail::RegionMask mask(region);
  const Point start = region.pixels.front();
  std::vector<Point> trace{start};
  Point cur = start;
  int back = 0;  // direction from cur to its backtrack pixel; west of start is background
  int first_move = -1;
  const std::size_t limit = 4 * region.pixels.size() + 8;
  while (trace.size() <= limit) {
    int move = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      const Point n{cur.x + detail::kMoore[static_cast<std::size_t>(d)].x,
                    cur.y + detail::kMoore[static_cast<std::size_t>(d)].y};
      if (mask.test(n.x, n.y)) {
        move = d;
        break;
      }
    }
    if (move < 0) break;  // isolated pixel
    if (cur == start && move == first_move) break;
    if (first_move < 0) first_move = move;
    const Point step = detail::kMoore[static_cast<std::size_t>(move)];
    const Point prev = detail::kMoore[static_cast<std::size_t>((move + 7) % 8)];
    const Point next{cur.x + step.x, cur.y + step.y};
    back = detail::moore_index(prev.x - step.x, prev.y - step.y);
    cur = next;
    trace.push_back(cur);
  }
  if (trace.size() > 1 && trace.back() == start) trace.pop_back();
  return trace;
}

struct RectangleTolerance {
  int straightness = 3;        // px deviation from a fitted side line
  double coverage = 0.8;       // fraction of the trace on the four sides
  double min_side_span = 0.75; // each side run must span this fraction of its bbox edge
};

// Four straight, mutually perpendicular sides. The trace is split into runs that
// hug one bbox edge; each run is trimmed until every point is within the
// straightness tolerance of its mean line.
inline bool is_rectangle(std::span<const Point> boundary, const RectangleTolerance& tol = {}) {
  if (boundary.size() < 4) return false;
  int min_x = boundary[0].x, max_x = min_x, min_y = boundary[0].y, max_y = min_y;
  for (const Point& p : boundary) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int width = max_x - min_x + 1;
  const int height = max_y - min_y + 1;
  if (width < 3 || height < 3) return false;
  const int band = 2 * tol.straightness;

  // 0 top, 1 right, 2 bottom, 3 left, -1 none. Corner ties go to the horizontal side.
  std::vector<int> side(boundary.size(), -1);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const Point p = boundary[i];
    const std::array<int, 4> dist{p.y - min_y, max_x - p.x, max_y - p.y, p.x - min_x};
    int best = -1;
    for (int s : {0, 2, 1, 3}) {
      if (dist[static_cast<std::size_t>(s)] > band) continue;
      if (best < 0 || dist[static_cast<std::size_t>(s)] < dist[static_cast<std::size_t>(best)]) best = s;
    }
    side[i] = best;
  }

  struct Run {
    int side;
    std::vector<Point> points;
  };
  std::vector<Run> runs;
  const std::size_t n = boundary.size();
  // Start at a side change so no run wraps around the array end.
  std::size_t start = 0;
  while (start < n && side[start] == side[(start + n - 1) % n]) ++start;
  if (start == n) return false;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (start + k) % n;
    if (runs.empty() || runs.back().side != side[i]) runs.push_back({side[i], {}});
    runs.back().points.push_back(boundary[i]);
  }

  auto coord = [](int s, Point p) { return (s == 0 || s == 2) ? p.y : p.x; };
  auto along = [](int s, Point p) { return (s == 0 || s == 2) ? p.x : p.y; };
  std::array<const Run*, 4> best{};
  std::array<std::vector<Point>, 4> trimmed;
  for (const Run& run : runs) {
    if (run.side < 0) continue;
    std::vector<Point> pts = run.points;
    std::size_t lo = 0, hi = pts.size();
    while (hi - lo > 1) {
      double mean = 0;
      for (std::size_t i = lo; i < hi; ++i) mean += coord(run.side, pts[i]);
      mean /= static_cast<double>(hi - lo);
      const double dlo = std::abs(coord(run.side, pts[lo]) - mean);
      const double dhi = std::abs(coord(run.side, pts[hi - 1]) - mean);
      if (std::max(dlo, dhi) <= tol.straightness) break;
      if (dlo >= dhi) {
        ++lo;
      } else {
        --hi;
      }
    }
    std::vector<Point> kept(pts.begin() + static_cast<std::ptrdiff_t>(lo),
                            pts.begin() + static_cast<std::ptrdiff_t>(hi));
    auto s = static_cast<std::size_t>(run.side);
    if (!best[s] || kept.size() > trimmed[s].size()) {
      best[s] = &run;
      trimmed[s] = std::move(kept);
    }
  }
  for (const Run* r : best) {
    if (!r) return false;
  }
  // The four dominant runs must appear in cyclic side order (either direction).
  std::vector<int> order;
  for (const Run& run : runs) {
    if (run.side >= 0 && &run == best[static_cast<std::size_t>(run.side)]) order.push_back(run.side);
  }
  bool cyclic = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int a = order[i];
    const int b = order[(i + 1) % order.size()];
    if ((a - b + 4) % 2 == 0) cyclic = false;  // neighbours must alternate horizontal/vertical
  }
  if (!cyclic) return false;

  std::size_t covered = 0;
  for (int s = 0; s < 4; ++s) {
    const auto& pts = trimmed[static_cast<std::size_t>(s)];
    covered += pts.size();
    int lo = along(s, pts.front()), hi = lo;
    for (const Point& p : pts) {
      lo = std::min(lo, along(s, p));
      hi = std::max(hi, along(s, p));
    }
    const int edge = (s == 0 || s == 2) ? width : height;
    if (static_cast<double>(hi - lo + 1) < tol.min_side_span * edge) return false;
  }
  return static_cast<double>(covered) >= tol.coverage * static_cast<double>(n);
}

// Stroke width of a frame-like region, measured inward from each side at
// several scan lines; the median measurement is returned.
inline int measure_stroke(const Region& region) {
  const detail::RegionMask mask(region);
  const BBox& b = region.bbox;
  std::vector<int> runs;
  for (double f : {0.25, 0.5, 0.75}) {
    const int y = b.top() + static_cast<int>(f * (b.height() - 1));
    const int x = b.left() + static_cast<int>(f * (b.width() - 1));
    int k = 0;
    while (b.left() + k < b.right() && mask.test(b.left() + k, y)) ++k;
    runs.push_back(k);
    k = 0;
    while (b.right() - 1 - k >= b.left() && mask.test(b.right() - 1 - k, y)) ++k;
    runs.push_back(k);
    k = 0;
    while (b.top() + k < b.bottom() && mask.test(x, b.top() + k)) ++k;
    runs.push_back(k);
    k = 0;
    while (b.bottom() - 1 - k >= b.top() && mask.test(x, b.bottom() - 1 - k)) ++k;
    runs.push_back(k);
  }
  std::sort(runs.begin(), runs.end());
  return std::max(1, runs[runs.size() / 2]);
}

// A hollow frame: inside the bbox (minus a band of the measured stroke width), at
// most `hollow_tol` of the foreground pixels belong to the region itself.
inline bool is_wireframe(const Region& region, const BinaryMap& map, double hollow_tol = 0.15) {
  const BBox& b = region.bbox;
  if (!contains(map.bounds(), b)) throw BoundsError("is_wireframe: region outside map");
  const int stroke = measure_stroke(region);
  const int l = b.left() + stroke, t = b.top() + stroke;
  const int r = b.right() - stroke, btm = b.bottom() - stroke;
  if (l >= r || t >= btm) return false;
  std::size_t own = 0;
  for (const Point& p : region.pixels) {
    if (p.x >= l && p.x < r && p.y >= t && p.y < btm) ++own;
  }
  std::size_t fg = 0;
  for (int y = t; y < btm; ++y) {
    for (int x = l; x < r; ++x) fg += map.foreground(x, y) ? 1 : 0;
  }
  if (fg == 0) return true;
  return static_cast<double>(own) / static_cast<double>(fg) <= hollow_tol;
}

}  // namespace gestalt
