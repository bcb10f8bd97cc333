#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "gestalt/geometry.hpp"
#include "gestalt/image.hpp"
#include "gestalt/metrics.hpp"

namespace gestalt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pixel thresholds are expressed at `reference_width` and scaled by
// image_width / reference_width (areas by its square).
struct DetectorConfig {
  double min_widget_area = 400;
  double max_widget_area_ratio = 0.9;
  int gradient_threshold = 4;
  int straightness_tol = 3;
  double coverage_tol = 0.8;
  double hollow_tol = 0.15;
  int container_tolerance = 2;
  double text_iou = 0.2;
  double reference_width = 1440;

  void validate() const {
    if (!(min_widget_area > 0)) throw ConfigError("detector.min_widget_area must be > 0");
    if (!(max_widget_area_ratio > 0 && max_widget_area_ratio <= 1)) {
      throw ConfigError("detector.max_widget_area_ratio must be in (0, 1]");
    }
    if (gradient_threshold < 0) throw ConfigError("detector.gradient_threshold must be >= 0");
    if (straightness_tol < 0) throw ConfigError("detector.straightness_tol must be >= 0");
    if (!(coverage_tol > 0 && coverage_tol <= 1)) throw ConfigError("detector.coverage_tol must be in (0, 1]");
    if (!(hollow_tol >= 0 && hollow_tol <= 1)) throw ConfigError("detector.hollow_tol must be in [0, 1]");
    if (container_tolerance < 0) throw ConfigError("detector.container_tolerance must be >= 0");
    if (!(reference_width > 0)) throw ConfigError("detector.reference_width must be > 0");
  }

  double scale(int image_width) const { return image_width / reference_width; }
  double scaled_min_area(int image_width) const {
    const double s = scale(image_width);
    return min_widget_area * s * s;
  }
  int scaled_px(int px, int image_width) const {
    return std::max(1, static_cast<int>(std::lround(px * scale(image_width))));
  }
};

struct NonTextDetection {
  std::vector<Widget> widgets;  // class NonText, ids 0..n-1
  std::vector<Region> regions;  // regions[i] backs widgets[i]
  BinaryMap map;
};

// grayscale -> gradient map -> 8-connected regions -> area filter.
// `scale_width` is the width thresholds are scaled against; crops pass the
// width of the screenshot they come from.
inline NonTextDetection detect_nontext(const RgbImage& image, const DetectorConfig& cfg,
                                       double min_area_factor = 1.0, int scale_width = 0) {
  cfg.validate();
  NonTextDetection out;
  out.map = gradient_binarize(to_grayscale(image), cfg.gradient_threshold);
  const double min_area = cfg.scaled_min_area(scale_width > 0 ? scale_width : image.width()) * min_area_factor;
  const double max_area = cfg.max_widget_area_ratio * static_cast<double>(image.bounds().area());
  WidgetId next = 0;
  for (auto& region : connected_components(out.map)) {
    const auto area = static_cast<double>(region.bbox.area());
    if (area < min_area || area > max_area) continue;
    out.widgets.push_back(make_nontext(next++, region.bbox));
    out.regions.push_back(std::move(region));
  }
  return out;
}

// Marks rectangular wireframes that enclose at least one other widget. Children
// are immediate: every enclosed widget belongs to its smallest enclosing
// container. `others` (usually OCR text) may be children but never containers.
inline void recognize_containers(NonTextDetection& det, const DetectorConfig& cfg,
                                 std::span<Widget> others = {}) {
  const int width = det.map.width();
  const int tol = cfg.scaled_px(cfg.container_tolerance, width);
  RectangleTolerance rect{cfg.scaled_px(cfg.straightness_tol, width), cfg.coverage_tol};

  std::vector<Widget*> all;
  for (auto& w : det.widgets) all.push_back(&w);
  for (auto& w : others) all.push_back(&w);

  auto encloses = [&](const Widget& outer, const Widget& inner) {
    return &outer != &inner && inner.area() < outer.area() && contains(outer.bbox, inner.bbox, tol);
  };

  std::vector<Widget*> containers;
  for (std::size_t i = 0; i < det.widgets.size(); ++i) {
    Widget& w = det.widgets[i];
    w.is_container = false;
    w.children.clear();
    const bool encloses_any =
        std::any_of(all.begin(), all.end(), [&](const Widget* o) { return encloses(w, *o); });
    if (!encloses_any) continue;
    const auto trace = trace_boundary(det.regions[i]);
    if (!is_rectangle(trace, rect)) continue;
    if (!is_wireframe(det.regions[i], det.map, cfg.hollow_tol)) continue;
    w.is_container = true;
    containers.push_back(&w);
  }
  for (Widget* child : all) {
    Widget* parent = nullptr;
    for (Widget* c : containers) {
      if (!encloses(*c, *child)) continue;
      if (!parent || c->area() < parent->area()) parent = c;
    }
    if (parent) parent->children.push_back(child->id);
  }
  for (Widget* c : containers) std::sort(c->children.begin(), c->children.end());
}

// Removes NonText widgets that OCR text explains (IoU above cfg.text_iou or
// containment within a text box), then suppresses NonText duplicates (IoU > 0.9).
// Containers and their children are exempt from the text rule unless the child
// coincides with a text box (IoU > 0.9), i.e. it is the same object seen twice.
inline std::vector<Widget> merge_widgets(std::vector<Widget> texts, std::vector<Widget> nontexts,
                                         const DetectorConfig& cfg, int image_width) {
  std::set<WidgetId> ids;
  for (const auto* list : {&texts, &nontexts}) {
    for (const auto& w : *list) {
      if (!ids.insert(w.id).second) throw std::invalid_argument("merge_widgets: duplicate widget id");
    }
  }
  const int tol = cfg.scaled_px(cfg.container_tolerance, image_width);
  std::set<WidgetId> in_container;
  for (const auto& w : nontexts) {
    if (w.is_container) in_container.insert(w.children.begin(), w.children.end());
  }

  std::set<WidgetId> removed;
  for (const auto& w : nontexts) {
    const bool exempt = w.is_container || in_container.count(w.id);
    for (const auto& t : texts) {
      const double overlap = iou(w.bbox, t.bbox);
      if (exempt) {
        if (!w.is_container && overlap > 0.9) removed.insert(w.id);
      } else if (overlap > cfg.text_iou || contains(t.bbox, w.bbox, tol)) {
        removed.insert(w.id);
      }
      if (removed.count(w.id)) break;
    }
  }
  // Duplicate suppression: containers first, then larger area, then lower id.
  std::vector<const Widget*> order;
  for (const auto& w : nontexts) {
    if (!removed.count(w.id)) order.push_back(&w);
  }
  std::stable_sort(order.begin(), order.end(), [](const Widget* a, const Widget* b) {
    if (a->is_container != b->is_container) return a->is_container;
    if (a->area() != b->area()) return a->area() > b->area();
    return a->id < b->id;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (removed.count(order[i]->id)) continue;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (!removed.count(order[j]->id) && iou(order[i]->bbox, order[j]->bbox) > 0.9) {
        removed.insert(order[j]->id);
      }
    }
  }

  std::vector<Widget> out;
  for (auto& w : nontexts) {
    if (removed.count(w.id)) continue;
    std::erase_if(w.children, [&](WidgetId c) { return removed.count(c) > 0; });
    if (w.is_container && w.children.empty()) w.is_container = false;
    out.push_back(std::move(w));
  }
  for (auto& t : texts) out.push_back(std::move(t));
  std::sort(out.begin(), out.end(), [](const Widget& a, const Widget& b) { return a.id < b.id; });
  return out;
}

struct DetectionScore {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  Scores scores;
};

// Greedy one-to-one matching in descending IoU; a same-class pair with IoU above
// the threshold is a true positive.
inline DetectionScore evaluate_detection(std::span<const Widget> predicted,
                                         std::span<const Widget> ground_truth,
                                         double iou_threshold = 0.9) {
  struct Candidate {
    double iou;
    std::size_t p, g;
  };
  std::vector<Candidate> cands;
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (predicted[p].cls != ground_truth[g].cls) continue;
      const double v = iou(predicted[p].bbox, ground_truth[g].bbox);
      if (v > iou_threshold) cands.push_back({v, p, g});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.iou > b.iou; });
  std::vector<bool> used_p(predicted.size()), used_g(ground_truth.size());
  DetectionScore s;
  for (const auto& c : cands) {
    if (used_p[c.p] || used_g[c.g]) continue;
    used_p[c.p] = used_g[c.g] = true;
    ++s.tp;
  }
  s.fp = predicted.size() - s.tp;
  s.fn = ground_truth.size() - s.tp;
  s.scores = metrics(s.tp, s.fp, s.fn);
  return s;
}

// Containment-only connectedness for widgets without pixels (metadata mode):
// a NonText widget enclosing other widgets becomes a container of the ones it
// encloses most tightly.
inline void infer_containers(std::vector<Widget>& widgets, int tolerance = 2) {
  for (auto& w : widgets) {
    w.is_container = false;
    w.children.clear();
  }
  for (auto& child : widgets) {
    Widget* parent = nullptr;
    for (auto& c : widgets) {
      if (&c == &child || c.cls != WidgetClass::NonText) continue;
      if (!(child.area() < c.area() && contains(c.bbox, child.bbox, tolerance))) continue;
      if (!parent || c.area() < parent->area()) parent = &c;
    }
    if (parent) {
      parent->is_container = true;
      parent->children.push_back(child.id);
    }
  }
  for (auto& w : widgets) std::sort(w.children.begin(), w.children.end());
}

}  // namespace gestalt
