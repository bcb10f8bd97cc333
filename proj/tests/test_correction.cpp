#include <gtest/gtest.h>

#include "gestalt/correction.hpp"
#include "gestalt/pipeline.hpp"
#include "gestalt/synth.hpp"

using namespace gestalt;

namespace {

void fill(RgbImage& img, const BBox& b, Rgb c) {
  for (int y = b.top(); y < b.bottom(); ++y) {
    for (int x = b.left(); x < b.right(); ++x) img.at(x, y) = c;
  }
}

// One list block of `n` (icon, title) items, 140 px apart.
Block list_block(std::vector<Widget>& ws, int n) {
  Block b;
  for (int i = 0; i < n; ++i) {
    const WidgetId icon = 2 * i, text = 2 * i + 1;
    ws.push_back(make_nontext(icon, {100, 100 + 140 * i, 196, 196 + 140 * i}));
    ws.push_back(make_text(text, {230, 130 + 140 * i, 700, 166 + 140 * i}, "title"));
    b.subgroups.push_back({icon, text});
  }
  return b;
}

}  // namespace

TEST(AlignToTemplate, RecoversTranslation) {
  std::vector<Widget> ws{make_nontext(0, {100, 100, 196, 196}), make_text(1, {230, 130, 700, 166}, "a"),
                         make_nontext(2, {100, 240, 196, 336}), make_text(3, {230, 270, 640, 306}, "b")};
  const auto a = align_to_template({2, 3}, {0, 1}, ws, 12);
  EXPECT_EQ(a.matched, 2);
  EXPECT_DOUBLE_EQ(a.dx, 0.0);
  EXPECT_DOUBLE_EQ(a.dy, 140.0);
  EXPECT_EQ(a.slot_of, (std::vector<int>{0, 1}));
}

TEST(AlignToTemplate, PartialSubgroup) {
  std::vector<Widget> ws{make_nontext(0, {100, 100, 196, 196}), make_text(1, {230, 130, 700, 166}, "a"),
                         make_text(3, {230, 270, 640, 306}, "b")};
  const auto a = align_to_template({3}, {0, 1}, ws, 12);
  EXPECT_EQ(a.matched, 1);
  EXPECT_EQ(a.slot_of, (std::vector<int>{1}));
  EXPECT_DOUBLE_EQ(a.dy, 140.0);
}

TEST(CorrectMisclassified, MinorityClassFlips) {
  std::vector<Widget> ws;
  std::vector<Block> blocks{list_block(ws, 5)};
  set_class(ws[4], WidgetClass::Text);  // icon of item 2 reported as text
  CorrectionReport report;
  correct_misclassified(blocks, ws, {}, 1440, report);
  EXPECT_EQ(ws[4].cls, WidgetClass::NonText);
  EXPECT_EQ(ws[4].bbox, BBox(100, 380, 196, 476));
  EXPECT_EQ(report.reclassified, (std::vector<WidgetId>{4}));
}

TEST(CorrectMisclassified, NoMajorityNoChange) {
  std::vector<Widget> ws;
  std::vector<Block> blocks{list_block(ws, 2)};
  set_class(ws[0], WidgetClass::Text);
  CorrectionReport report;
  correct_misclassified(blocks, ws, {}, 1440, report);
  EXPECT_TRUE(report.reclassified.empty());
}

TEST(CorrectMissed, AdoptsLooseWidgetWithoutImage) {
  std::vector<Widget> ws;
  Block b = list_block(ws, 4);
  b.subgroups[2] = {5};  // icon 4 was not grouped
  std::vector<Block> blocks{b};
  CorrectionReport report;
  correct_missed(blocks, ws, nullptr, {}, {}, 1440, report);
  EXPECT_EQ(blocks[0].subgroups[2].size(), 2u);
  EXPECT_EQ(ws.size(), 8u);
}

TEST(CorrectMissed, RedetectsSmallWidgetFromPixels) {
  RgbImage img(1440, 1000, Rgb{255, 255, 255});
  std::vector<Widget> ws;
  Block b = list_block(ws, 5);
  for (const auto& w : ws) {
    if (w.cls == WidgetClass::NonText && w.id != 4) fill(img, w.bbox, Rgb{33, 150, 243});
  }
  const BBox tiny{139, 419, 157, 437};  // 18x18, under the 400 px minimum
  fill(img, tiny, Rgb{229, 57, 53});
  ws.erase(ws.begin() + 4);
  b.subgroups[2] = {5};
  std::vector<Block> blocks{b};
  CorrectionReport report;
  correct_missed(blocks, ws, &img, {}, {}, 1440, report);
  ASSERT_EQ(report.recovered.size(), 1u);
  const auto it = std::find_if(ws.begin(), ws.end(), [&](const Widget& w) { return w.id == report.recovered[0]; });
  ASSERT_NE(it, ws.end());
  EXPECT_EQ(it->bbox, tiny);
  EXPECT_EQ(blocks[0].subgroups[2].size(), 2u);
  EXPECT_GT(report.recovered[0], 9);
}

TEST(CorrectMissed, CompleteBlocksUntouched) {
  std::vector<Widget> ws;
  std::vector<Block> blocks{list_block(ws, 4)};
  const auto before = blocks[0].subgroups;
  CorrectionReport report;
  correct_missed(blocks, ws, nullptr, {}, {}, 1440, report);
  EXPECT_EQ(blocks[0].subgroups, before);
  EXPECT_TRUE(report.recovered.empty());
}

TEST(Corrections, PlantedCardErrorsAreRepaired) {
  SynthSpec spec;
  spec.seed = 77;
  spec.kind = LayoutKind::Cards;
  spec.plant_errors = true;
  spec.width = 720;
  spec.height = 1280;
  const auto gui = synthesize(spec);
  ASSERT_TRUE(gui.planted.missing && gui.planted.flipped);
  PipelineConfig cfg;
  const auto res = group_widgets(detect_widgets(gui.image, gui.ocr, cfg), spec.width, cfg, &gui.image);
  bool recovered = false, fixed = false;
  for (const auto& w : res.widgets) {
    if (iou(w.bbox, *gui.planted.missing) > 0.9) recovered = true;
    if (iou(w.bbox, *gui.planted.flipped) > 0.9 && w.cls == WidgetClass::NonText) fixed = true;
  }
  EXPECT_TRUE(recovered);
  EXPECT_TRUE(fixed);
  EXPECT_FALSE(res.corrections.recovered.empty());
  EXPECT_FALSE(res.corrections.reclassified.empty());
}
