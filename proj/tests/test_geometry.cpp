#include <gtest/gtest.h>

#include <random>

#include "gestalt/geometry.hpp"
#include "gestalt/metrics.hpp"

using namespace gestalt;

TEST(BBox, RejectsDegenerateAndNegative) {
  EXPECT_THROW(BBox(5, 5, 5, 10), std::invalid_argument);
  EXPECT_THROW(BBox(5, 5, 10, 4), std::invalid_argument);
  EXPECT_THROW(BBox(-1, 0, 3, 3), std::invalid_argument);
}

TEST(BBox, ExclusiveEdges) {
  const BBox b{10, 20, 30, 60};
  EXPECT_EQ(b.width(), 20);
  EXPECT_EQ(b.height(), 40);
  EXPECT_EQ(b.area(), 800);
  EXPECT_DOUBLE_EQ(b.center_x(), 20.0);
  EXPECT_DOUBLE_EQ(b.center_y(), 40.0);
}

TEST(BBox, IouKnownValues) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
  // 5x10 overlap of two 10x10 boxes: 50 / 150.
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 50.0 / 150.0);
}

TEST(BBox, IouProperties) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pos(0, 50), len(1, 30);
  for (int i = 0; i < 500; ++i) {
    const int l1 = pos(rng), t1 = pos(rng), l2 = pos(rng), t2 = pos(rng);
    const BBox a{l1, t1, l1 + len(rng), t1 + len(rng)};
    const BBox b{l2, t2, l2 + len(rng), t2 + len(rng)};
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    // Pixel-count oracle.
    int inter = 0;
    for (int y = 0; y < 90; ++y) {
      for (int x = 0; x < 90; ++x) {
        const bool in_a = x >= a.left() && x < a.right() && y >= a.top() && y < a.bottom();
        const bool in_b = x >= b.left() && x < b.right() && y >= b.top() && y < b.bottom();
        inter += in_a && in_b;
      }
    }
    const double expected = static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
    EXPECT_NEAR(v, expected, 1e-12);
  }
}

TEST(BBox, HullIntersectionContains) {
  const BBox a{0, 0, 10, 10}, b{20, 5, 30, 8};
  EXPECT_EQ(hull(a, b), BBox(0, 0, 30, 10));
  EXPECT_FALSE(intersection(a, b).has_value());
  EXPECT_EQ(*intersection(a, BBox(5, 5, 15, 15)), BBox(5, 5, 10, 10));
  EXPECT_TRUE(contains(a, BBox(2, 2, 8, 8)));
  EXPECT_FALSE(contains(a, BBox(2, 2, 11, 8)));
  EXPECT_TRUE(contains(a, BBox(2, 2, 11, 8), 1));
}

TEST(BBox, AxisGapAndOverlap) {
  const BBox a{0, 0, 10, 10}, b{15, 4, 25, 20};
  EXPECT_EQ(axis_gap(a, b, Axis::Horizontal), 5);
  EXPECT_EQ(axis_gap(b, a, Axis::Horizontal), 5);
  EXPECT_EQ(axis_gap(a, b, Axis::Vertical), 0);
  EXPECT_EQ(axis_overlap(a, b, Axis::Vertical), 6);
  EXPECT_EQ(axis_overlap(a, b, Axis::Horizontal), 0);
}

TEST(Widget, SetClassKeepsTextInvariant) {
  auto w = make_text(1, {0, 0, 5, 5}, "abc");
  set_class(w, WidgetClass::NonText);
  EXPECT_FALSE(w.text.has_value());
  set_class(w, WidgetClass::Text);
  ASSERT_TRUE(w.text.has_value());
  EXPECT_EQ(*w.text, "");
}

TEST(ReadingOrder, TopThenLeft) {
  const std::vector<BBox> boxes{{50, 0, 60, 10}, {0, 40, 10, 50}, {0, 0, 10, 10}};
  EXPECT_EQ(reading_order(boxes), (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Metrics, PrecisionRecallF1) {
  const auto s = metrics(6, 2, 4);
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.6);
  EXPECT_NEAR(s.f1, 2 * 0.75 * 0.6 / 1.35, 1e-12);
  const auto z = metrics(0, 0, 0);
  EXPECT_DOUBLE_EQ(z.f1, 0.0);
}
