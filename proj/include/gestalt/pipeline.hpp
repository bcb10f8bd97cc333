#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "gestalt/correction.hpp"
#include "gestalt/detection.hpp"
#include "gestalt/grouping.hpp"
#include "gestalt/hierarchy.hpp"
#include "gestalt/image.hpp"
#include "gestalt/ocr.hpp"

namespace gestalt {

struct PipelineConfig {
  DetectorConfig detector;
  GroupingConfig grouping;
  LineMergeConfig lines;

  void validate() const {
    detector.validate();
    grouping.validate();
  }
};

// Non-text detection, OCR ingestion, container recognition and merging.
inline std::vector<Widget> detect_widgets(const RgbImage& image, const std::vector<TextBox>& ocr,
                                          const PipelineConfig& cfg) {
  auto det = detect_nontext(image, cfg.detector);
  std::vector<TextBox> clipped;
  for (const auto& box : ocr) {
    if (auto inside = intersection(box.bbox, image.bounds())) clipped.push_back({*inside, box.content, box.confidence});
  }
  auto texts = ingest_text(clipped, static_cast<WidgetId>(det.widgets.size()), cfg.lines);
  recognize_containers(det, cfg.detector, texts);
  return merge_widgets(std::move(texts), std::move(det.widgets), cfg.detector, image.width());
}

struct GroupingResult {
  std::vector<Widget> widgets;
  std::vector<Block> blocks;
  Hierarchy hierarchy;
  CorrectionReport corrections;
};

namespace detail {

inline void leaf_descendants(const WidgetIndex& index, WidgetId id, std::vector<WidgetId>& out) {
  for (WidgetId c : index[id].children) {
    if (!index.has(c)) continue;
    if (index[c].is_container) {
      leaf_descendants(index, c, out);
    } else {
      out.push_back(c);
    }
  }
}

inline std::vector<Group> positional_groups(const std::vector<Cluster>& clusters, bool frames) {
  std::vector<Group> out;
  for (const auto& c : clusters) {
    out.push_back({orientation_of(c.attribute), c.widget_class, c.member_ids, frames});
  }
  return out;
}

}  // namespace detail

// Gestalt grouping of a widget set: containers claim what they enclose,
// the remaining widgets are clustered, conflicts resolved and proximate groups
// paired into blocks, then one pass of continuity corrections. `image` may be
// null (widgets from metadata), in which case missed widgets are only adopted
// from loose detections, never re-detected.
inline GroupingResult group_widgets(std::vector<Widget> widgets, int image_width, const PipelineConfig& cfg,
                                    const RgbImage* image = nullptr) {
  cfg.grouping.validate();
  std::set<WidgetId> claimed;
  for (const auto& w : widgets) {
    if (w.is_container) claimed.insert(w.children.begin(), w.children.end());
  }
  std::vector<Widget> free_nontext, free_text, top_containers;
  for (const auto& w : widgets) {
    if (claimed.count(w.id)) continue;
    if (w.is_container) {
      top_containers.push_back(w);
    } else if (w.cls == WidgetClass::NonText) {
      free_nontext.push_back(w);
    } else {
      free_text.push_back(w);
    }
  }

  const auto& gc = cfg.grouping;
  const double eps = gc.eps_position * gc.scale(image_width);
  std::vector<Group> candidates;
  const auto nt = cluster_nontext(free_nontext, gc, image_width);
  for (const auto* set : {&nt.columns, &nt.rows}) {
    for (auto& g : detail::positional_groups(*set, false)) candidates.push_back(std::move(g));
  }
  const auto tx = cluster_text(free_text, gc, image_width);
  for (const auto* set : {&tx.columns, &tx.rows}) {
    for (auto& g : detail::positional_groups(*set, false)) candidates.push_back(std::move(g));
  }
  for (auto attr : {Attribute::CenterX, Attribute::CenterY}) {
    for (auto& g : detail::positional_groups(
             detail::run_attribute(top_containers, attr, eps, gc.min_pts, WidgetClass::NonText), true)) {
      candidates.push_back(std::move(g));
    }
  }

  std::vector<Group> groups;
  for (const auto& g : candidates) {
    for (auto& part : split_by_rhythm(g, widgets, gc, image_width)) groups.push_back(std::move(part));
  }
  groups = resolve_conflicts(std::move(groups), widgets, gc.conflict_tie);

  GroupingResult out;
  out.blocks = pair_groups(groups, widgets, gc, image_width);
  {
    const detail::WidgetIndex index(widgets);
    for (auto& b : out.blocks) {
      if (b.source != BlockSource::Container) continue;
      b.frames.clear();
      for (auto& sg : b.subgroups) {
        const WidgetId frame = sg.front();
        b.frames.push_back(frame);
        std::vector<WidgetId> leaves;
        detail::leaf_descendants(index, frame, leaves);
        std::vector<BBox> boxes;
        for (WidgetId id : leaves) boxes.push_back(index[id].bbox);
        sg.clear();
        for (std::size_t k : reading_order(boxes)) sg.push_back(leaves[k]);
      }
    }
  }

  correct_missed(out.blocks, widgets, image, cfg.detector, gc, image_width, out.corrections);
  correct_misclassified(out.blocks, widgets, gc, image_width, out.corrections);
  out.hierarchy = build_hierarchy(widgets, out.blocks);
  out.widgets = std::move(widgets);
  return out;
}

}  // namespace gestalt
