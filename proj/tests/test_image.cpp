#include <gtest/gtest.h>

#include <cstdio>
#include <random>

#include <jpeglib.h>

#include "gestalt/image.hpp"
#include "gestalt/image_io.hpp"
#include "oracles.hpp"

using namespace gestalt;

namespace {

RgbImage canvas(int w, int h) { return RgbImage(w, h, Rgb{255, 255, 255}); }

void fill(RgbImage& img, const BBox& b, Rgb c) {
  for (int y = b.top(); y < b.bottom(); ++y) {
    for (int x = b.left(); x < b.right(); ++x) img.at(x, y) = c;
  }
}

void frame(RgbImage& img, const BBox& b, int stroke, Rgb c) {
  fill(img, {b.left(), b.top(), b.right(), b.top() + stroke}, c);
  fill(img, {b.left(), b.bottom() - stroke, b.right(), b.bottom()}, c);
  fill(img, {b.left(), b.top(), b.left() + stroke, b.bottom()}, c);
  fill(img, {b.right() - stroke, b.top(), b.right(), b.bottom()}, c);
}

Region region_of(const std::vector<Point>& pts) {
  Region r;
  r.pixels = pts;
  std::sort(r.pixels.begin(), r.pixels.end(), [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  int l = pts[0].x, t = pts[0].y, rr = l, bb = t;
  for (auto p : pts) {
    l = std::min(l, p.x);
    t = std::min(t, p.y);
    rr = std::max(rr, p.x);
    bb = std::max(bb, p.y);
  }
  r.bbox = BBox{l, t, rr + 1, bb + 1};
  return r;
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& img) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* out = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &out, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 100, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(reinterpret_cast<const JSAMPLE*>(&img.at(0, static_cast<int>(cinfo.next_scanline))));
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> bytes(out, out + size);
  jpeg_destroy_compress(&cinfo);
  std::free(out);
  return bytes;
}

}  // namespace

TEST(Raster, RejectsEmptyAndMismatched) {
  EXPECT_THROW(RgbImage(0, 5), std::invalid_argument);
  EXPECT_THROW(GrayImage(2, 2, std::vector<std::uint8_t>(3)), std::invalid_argument);
}

TEST(Raster, CropChecksBounds) {
  auto img = canvas(10, 10);
  img.at(3, 4) = Rgb{1, 2, 3};
  const auto c = crop(img, BBox{2, 3, 6, 7});
  EXPECT_EQ(c.width(), 4);
  EXPECT_EQ(c.at(1, 1), (Rgb{1, 2, 3}));
  EXPECT_THROW(crop(img, BBox{5, 5, 11, 8}), BoundsError);
}

TEST(Grayscale, LumaWeights) {
  EXPECT_EQ(luma({255, 255, 255}), 255);
  EXPECT_EQ(luma({0, 0, 0}), 0);
  EXPECT_EQ(luma({255, 0, 0}), 76);
  EXPECT_EQ(luma({0, 255, 0}), 150);
  EXPECT_EQ(luma({0, 0, 255}), 29);
}

TEST(Binarize, BlankImageHasNoForeground) {
  const auto map = gradient_binarize(to_grayscale(canvas(40, 30)), 4);
  EXPECT_EQ(map.count(), 0u);
  EXPECT_TRUE(connected_components(map).empty());
}

TEST(Binarize, SolidRectangleIsPixelExact) {
  auto img = canvas(100, 80);
  const BBox box{20, 15, 60, 45};
  fill(img, box, Rgb{40, 90, 160});
  const auto regions = connected_components(gradient_binarize(to_grayscale(img), 4));
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].bbox, box);
  EXPECT_EQ(regions[0].pixels.size(), static_cast<std::size_t>(box.area()));
}

TEST(Binarize, BelowThresholdContrastIsIgnored) {
  auto img = canvas(50, 50);
  fill(img, {10, 10, 30, 30}, Rgb{252, 252, 252});
  EXPECT_EQ(gradient_binarize(to_grayscale(img), 4).count(), 0u);
}

TEST(Binarize, HollowFrameKeepsItsInterior) {
  auto img = canvas(120, 100);
  const BBox box{10, 10, 110, 90};
  frame(img, box, 2, Rgb{150, 150, 150});
  const auto map = gradient_binarize(to_grayscale(img), 4);
  EXPECT_FALSE(map.foreground(60, 50));
  const auto regions = connected_components(map);
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].bbox, box);
  EXPECT_TRUE(is_wireframe(regions[0], map));
  EXPECT_EQ(measure_stroke(regions[0]), 2);
}

TEST(ConnectedComponents, MatchesFloodFillOracle) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
    const double density = 0.2 + 0.4 * (rng() % 100) / 100.0;
    BinaryMap map(w, h, 0);
    std::vector<std::uint8_t> grid(static_cast<std::size_t>(w * h));
    for (int i = 0; i < w * h; ++i) {
      grid[static_cast<std::size_t>(i)] = (rng() % 1000) < density * 1000 ? 1 : 0;
      map.pixels()[static_cast<std::size_t>(i)] = grid[static_cast<std::size_t>(i)];
    }
    std::vector<int> got(grid.size(), -1);
    for (const auto& r : connected_components(map)) {
      for (auto p : r.pixels) got[static_cast<std::size_t>(p.y * w + p.x)] = r.label;
    }
    EXPECT_TRUE(oracle::same_partition(got, oracle::flood_labels(grid, w, h)));
  }
}

TEST(ConnectedComponents, DiagonalPixelsJoin) {
  BinaryMap map(3, 3, 0);
  map.at(0, 0) = map.at(1, 1) = map.at(2, 2) = 1;
  const auto regions = connected_components(map);
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].bbox, BBox(0, 0, 3, 3));
}

TEST(TraceBoundary, SquareOutline) {
  std::vector<Point> pts;
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) pts.push_back({x + 2, y + 3});
  }
  const auto trace = trace_boundary(region_of(pts));
  // The 16 perimeter pixels of a 5x5 square, each once.
  EXPECT_EQ(trace.size(), 16u);
  std::set<Point> unique(trace.begin(), trace.end());
  EXPECT_EQ(unique.size(), 16u);
  for (auto p : trace) {
    EXPECT_TRUE(p.x == 2 || p.x == 6 || p.y == 3 || p.y == 7);
  }
}

TEST(TraceBoundary, SinglePixel) {
  const auto trace = trace_boundary(region_of({{4, 4}}));
  EXPECT_EQ(trace, (std::vector<Point>{{4, 4}}));
}

TEST(IsRectangle, AcceptsRectanglesRejectsOtherShapes) {
  std::vector<Point> rect;
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) rect.push_back({x, y});
  }
  EXPECT_TRUE(is_rectangle(trace_boundary(region_of(rect))));

  std::vector<Point> ell;
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 30; ++x) {
      if (x < 8 || y >= 22) ell.push_back({x, y});
    }
  }
  EXPECT_FALSE(is_rectangle(trace_boundary(region_of(ell))));

  std::vector<Point> disc;
  for (int y = -15; y <= 15; ++y) {
    for (int x = -15; x <= 15; ++x) {
      if (x * x + y * y <= 225) disc.push_back({x + 16, y + 16});
    }
  }
  EXPECT_FALSE(is_rectangle(trace_boundary(region_of(disc))));
}

TEST(IsWireframe, SolidRegionIsNotHollow) {
  auto img = canvas(60, 60);
  fill(img, {10, 10, 50, 50}, Rgb{0, 0, 0});
  const auto map = gradient_binarize(to_grayscale(img), 4);
  const auto regions = connected_components(map);
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_FALSE(is_wireframe(regions[0], map));
}

TEST(ImageIo, PngRoundTrip) {
  auto img = canvas(17, 9);
  fill(img, {3, 2, 9, 7}, Rgb{12, 200, 99});
  const auto decoded = decode_image(encode_png(img));
  EXPECT_EQ(decoded, img);
}

TEST(ImageIo, JpegDecodes) {
  auto img = canvas(32, 24);
  fill(img, {8, 8, 24, 16}, Rgb{0, 0, 0});
  const auto decoded = decode_image(encode_jpeg(img));
  ASSERT_EQ(decoded.width(), 32);
  ASSERT_EQ(decoded.height(), 24);
  EXPECT_LT(decoded.at(16, 12).r, 30);
  EXPECT_GT(decoded.at(1, 1).r, 225);
}

TEST(ImageIo, GarbageAndMissingFilesFail) {
  EXPECT_THROW(decode_image({1, 2, 3, 4, 5, 6, 7, 8}), DecodeError);
  EXPECT_THROW(load_image("/nonexistent/definitely.png"), std::exception);
}
