#include <gtest/gtest.h>

#include "gestalt/detection.hpp"
#include "gestalt/pipeline.hpp"

using namespace gestalt;

namespace {

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

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kBlue{30, 60, 200};
constexpr Rgb kGrey{150, 150, 150};

}  // namespace

TEST(DetectorConfig, ValidatesAndScales) {
  DetectorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.scaled_min_area(720), 100.0);
  EXPECT_EQ(cfg.scaled_px(3, 720), 2);
  EXPECT_EQ(cfg.scaled_px(1, 100), 1);
  cfg.min_widget_area = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.coverage_tol = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(DetectNonText, FindsSolidWidgetsPixelExact) {
  RgbImage img(1440, 800, kWhite);
  const std::vector<BBox> boxes{{100, 100, 200, 180}, {400, 120, 480, 200}, {100, 400, 300, 460}};
  for (const auto& b : boxes) fill(img, b, kBlue);
  const auto det = detect_nontext(img, {});
  ASSERT_EQ(det.widgets.size(), 3u);
  std::vector<BBox> found;
  for (const auto& w : det.widgets) {
    EXPECT_EQ(w.cls, WidgetClass::NonText);
    found.push_back(w.bbox);
  }
  for (const auto& b : boxes) EXPECT_NE(std::find(found.begin(), found.end(), b), found.end());
}

TEST(DetectNonText, AreaFilterAndRelaxation) {
  RgbImage img(1440, 400, kWhite);
  fill(img, {50, 50, 65, 65}, kBlue);    // 225 px, below 400
  fill(img, {200, 50, 240, 90}, kBlue);  // 1600 px
  EXPECT_EQ(detect_nontext(img, {}).widgets.size(), 1u);
  EXPECT_EQ(detect_nontext(img, {}, 0.5).widgets.size(), 2u);
}

TEST(DetectNonText, ThresholdsScaleWithWidth) {
  // 12x12 = 144 px: above the 100 px minimum at 720 wide, below 400 at 1440.
  RgbImage small(720, 400, kWhite);
  fill(small, {50, 50, 62, 62}, kBlue);
  EXPECT_EQ(detect_nontext(small, {}).widgets.size(), 1u);
  EXPECT_EQ(detect_nontext(small, {}, 1.0, 1440).widgets.size(), 0u);
}

TEST(DetectNonText, BlankImage) {
  RgbImage img(360, 640, kWhite);
  EXPECT_TRUE(detect_nontext(img, {}).widgets.empty());
}

TEST(RecognizeContainers, FrameWithChildren) {
  RgbImage img(1440, 800, kWhite);
  const BBox card{100, 100, 700, 400};
  frame(img, card, 2, kGrey);
  fill(img, {130, 130, 250, 250}, kBlue);
  std::vector<Widget> texts{make_text(100, {280, 140, 500, 170}, "title")};
  auto det = detect_nontext(img, {});
  recognize_containers(det, {}, texts);
  const auto it = std::find_if(det.widgets.begin(), det.widgets.end(), [&](const Widget& w) { return w.bbox == card; });
  ASSERT_NE(it, det.widgets.end());
  EXPECT_TRUE(it->is_container);
  ASSERT_EQ(it->children.size(), 2u);
  EXPECT_EQ(it->children.back(), 100);
}

TEST(RecognizeContainers, EmptyFrameAndSolidBlockAreNotContainers) {
  RgbImage img(1440, 800, kWhite);
  frame(img, {100, 100, 400, 300}, 2, kGrey);
  fill(img, {600, 100, 900, 300}, kBlue);
  auto det = detect_nontext(img, {});
  recognize_containers(det, {});
  for (const auto& w : det.widgets) EXPECT_FALSE(w.is_container);
}

TEST(RecognizeContainers, NestedContainersTakeImmediateChildren) {
  RgbImage img(1440, 900, kWhite);
  frame(img, {50, 50, 900, 800}, 2, kGrey);
  frame(img, {100, 100, 600, 500}, 2, kGrey);
  fill(img, {150, 150, 300, 300}, kBlue);
  auto det = detect_nontext(img, {});
  recognize_containers(det, {});
  int containers = 0;
  for (const auto& w : det.widgets) {
    if (!w.is_container) continue;
    ++containers;
    EXPECT_EQ(w.children.size(), 1u);
  }
  EXPECT_EQ(containers, 2);
}

TEST(MergeWidgets, TextExplainsOverlappingNonText) {
  std::vector<Widget> texts{make_text(10, {100, 100, 300, 130}, "hello")};
  std::vector<Widget> nontexts{make_nontext(0, {102, 104, 180, 126}), make_nontext(1, {500, 100, 600, 200})};
  const auto merged = merge_widgets(texts, nontexts, {}, 1440);
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged[0].id, 1);
  EXPECT_EQ(merged[1].id, 10);
}

TEST(MergeWidgets, SuppressesDuplicateNonText) {
  std::vector<Widget> nontexts{make_nontext(0, {100, 100, 200, 200}), make_nontext(1, {100, 100, 201, 200})};
  const auto merged = merge_widgets({}, nontexts, {}, 1440);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].id, 1);
}

TEST(MergeWidgets, RejectsDuplicateIds) {
  EXPECT_THROW(merge_widgets({make_text(0, {0, 0, 5, 5}, "a")}, {make_nontext(0, {9, 9, 20, 20})}, {}, 1440),
               std::invalid_argument);
}

TEST(EvaluateDetection, OneToOneAboveThreshold) {
  const std::vector<Widget> gt{make_nontext(0, {0, 0, 100, 100}), make_text(1, {200, 0, 300, 20}, "x")};
  const std::vector<Widget> pred{make_nontext(5, {0, 0, 100, 101}), make_nontext(6, {0, 0, 100, 100}),
                                 make_nontext(7, {200, 0, 300, 20})};
  const auto s = evaluate_detection(pred, gt);
  EXPECT_EQ(s.tp, 1u);
  EXPECT_EQ(s.fp, 2u);
  EXPECT_EQ(s.fn, 1u);
}

TEST(InferContainers, EnclosureDefinesChildren) {
  std::vector<Widget> ws{make_nontext(0, {0, 0, 500, 500}), make_nontext(1, {10, 10, 200, 200}),
                         make_nontext(2, {20, 20, 60, 60}), make_text(3, {250, 10, 400, 40}, "t")};
  infer_containers(ws);
  EXPECT_TRUE(ws[0].is_container);
  EXPECT_EQ(ws[0].children, (std::vector<WidgetId>{1, 3}));
  EXPECT_TRUE(ws[1].is_container);
  EXPECT_EQ(ws[1].children, (std::vector<WidgetId>{2}));
  EXPECT_FALSE(ws[2].is_container);
}

TEST(DetectWidgets, CombinesPixelsAndOcr) {
  RgbImage img(1440, 600, kWhite);
  fill(img, {100, 100, 200, 200}, kBlue);
  const std::vector<TextBox> ocr{{{240, 120, 400, 150}, "label", 0.95}, {{1400, 10, 1500, 40}, "clip", {}}};
  const auto widgets = detect_widgets(img, ocr, {});
  ASSERT_EQ(widgets.size(), 3u);
  EXPECT_EQ(widgets[0].cls, WidgetClass::NonText);
  // Text ids follow reading order; the off-canvas box is clipped.
  EXPECT_EQ(widgets[1].bbox, BBox(1400, 10, 1440, 40));
  EXPECT_EQ(*widgets[2].text, "label");
}
