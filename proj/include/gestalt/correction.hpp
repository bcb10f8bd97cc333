#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gestalt/detection.hpp"
#include "gestalt/geometry.hpp"
#include "gestalt/grouping.hpp"
#include "gestalt/image.hpp"

namespace gestalt {

struct CorrectionReport {
  std::vector<WidgetId> recovered;
  std::vector<WidgetId> reclassified;
  std::vector<std::string> log;
};

// Correspondence of one subgroup onto a template subgroup: a translation and,
// per member, the template slot it fills (-1 when none).
struct SlotAlignment {
  double dx = 0;
  double dy = 0;
  std::vector<int> slot_of;
  int matched = 0;
};

namespace detail {

inline SlotAlignment match_with_offset(const std::vector<WidgetId>& members, const std::vector<WidgetId>& tmpl,
                                       const WidgetIndex& index, double dx, double dy, double tol,
                                       double* size_cost) {
  SlotAlignment a{dx, dy, std::vector<int>(members.size(), -1), 0};
  std::vector<bool> taken(tmpl.size());
  double cost = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const BBox& b = index[members[i]].bbox;
    int best = -1;
    double best_d = 0;
    for (std::size_t j = 0; j < tmpl.size(); ++j) {
      if (taken[j]) continue;
      const BBox& t = index[tmpl[j]].bbox;
      // Either the top-left corners or the centres must line up.
      const double ex = std::abs(b.left() - dx - t.left());
      const double ey = std::abs(b.top() - dy - t.top());
      const double cx = std::abs(b.center_x() - dx - t.center_x());
      const double cy = std::abs(b.center_y() - dy - t.center_y());
      const bool corner = ex <= tol && ey <= tol;
      const bool centre = cx <= tol && cy <= tol;
      if (!corner && !centre) continue;
      const double d = std::min(corner ? ex + ey : cx + cy, centre ? cx + cy : ex + ey) +
                       std::abs(b.width() - t.width()) + std::abs(b.height() - t.height());
      if (best < 0 || d < best_d) {
        best = static_cast<int>(j);
        best_d = d;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      a.slot_of[i] = best;
      ++a.matched;
      cost += best_d;
    }
  }
  if (size_cost) *size_cost = cost;
  return a;
}

}  // namespace detail

// Tries every member/template pairing as a translation hypothesis, keeps the one
// matching most members (then the lowest position + size mismatch), and refines
// the translation to the mean offset of the matched members.
inline SlotAlignment align_to_template(const std::vector<WidgetId>& members, const std::vector<WidgetId>& tmpl,
                                       std::span<const Widget> widgets, double tol) {
  const detail::WidgetIndex index(widgets);
  std::optional<SlotAlignment> best;
  double best_cost = 0;
  for (WidgetId m : members) {
    for (WidgetId t : tmpl) {
      const double dx = index[m].bbox.left() - index[t].bbox.left();
      const double dy = index[m].bbox.top() - index[t].bbox.top();
      double cost = 0;
      auto a = detail::match_with_offset(members, tmpl, index, dx, dy, tol, &cost);
      if (!best || a.matched > best->matched || (a.matched == best->matched && cost < best_cost)) {
        best = std::move(a);
        best_cost = cost;
      }
    }
  }
  if (!best) return {0, 0, std::vector<int>(members.size(), -1), 0};
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (best->slot_of[i] < 0) continue;
    const BBox& b = index[members[i]].bbox;
    const BBox& t = index[tmpl[static_cast<std::size_t>(best->slot_of[i])]].bbox;
    sx += b.left() - t.left();
    sy += b.top() - t.top();
  }
  best->dx = sx / best->matched;
  best->dy = sy / best->matched;
  return *best;
}

namespace detail {

// Most common subgroup size (ties go to the larger size).
inline std::size_t modal_size(const Block& block) {
  std::map<std::size_t, int> freq;
  for (const auto& sg : block.subgroups) ++freq[sg.size()];
  std::size_t mode = 0;
  int best = 0;
  for (auto [size, n] : freq) {
    if (n >= best) {
      best = n;
      mode = size;
    }
  }
  return mode;
}

inline Widget* find_widget(std::vector<Widget>& widgets, WidgetId id) {
  for (auto& w : widgets) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

// The modal-size subgroup that lines up with the most members of the others.
inline std::optional<std::size_t> template_index(const Block& block, std::span<const Widget> widgets, double tol) {
  const std::size_t mode = modal_size(block);
  std::optional<std::size_t> best;
  int best_score = -1;
  for (std::size_t k = 0; k < block.subgroups.size(); ++k) {
    if (block.subgroups[k].size() != mode || mode == 0) continue;
    int score = 0;
    for (std::size_t o = 0; o < block.subgroups.size(); ++o) {
      if (o != k) score += align_to_template(block.subgroups[o], block.subgroups[k], widgets, tol).matched;
    }
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

}  // namespace detail

// For every subgroup smaller than its block's modal size, predicts where each
// absent slot should be (mean template-frame box of the complete subgroups,
// moved by this subgroup's offset). A loose widget centred there is adopted;
// otherwise the region is cropped from `image` and re-detected with the
// minimum area relaxed by relax_factor. Never removes widgets.
inline void correct_missed(std::vector<Block>& blocks, std::vector<Widget>& widgets, const RgbImage* image,
                           const DetectorConfig& detector, const GroupingConfig& grouping, int image_width,
                           CorrectionReport& report) {
  const double tol = grouping.eps_position * grouping.scale(image_width);
  std::set<WidgetId> placed;
  for (const auto& b : blocks) {
    for (const auto& sg : b.subgroups) placed.insert(sg.begin(), sg.end());
  }
  for (const auto& w : widgets) {
    if (w.is_container) {
      placed.insert(w.id);
      placed.insert(w.children.begin(), w.children.end());
    }
  }

  for (auto& block : blocks) {
    const auto t_idx = detail::template_index(block, widgets, tol);
    if (!t_idx) continue;
    const std::size_t mode = block.subgroups[*t_idx].size();
    const std::vector<WidgetId> tmpl = block.subgroups[*t_idx];

    // Mean template-frame box and class votes of every slot over complete subgroups.
    std::vector<std::array<double, 4>> slot_sum(mode, {0, 0, 0, 0});
    std::vector<int> slot_n(mode, 0), slot_nontext(mode, 0);
    for (const auto& sg : block.subgroups) {
      if (sg.size() != mode) continue;
      const auto a = align_to_template(sg, tmpl, widgets, tol);
      const detail::WidgetIndex index(widgets);
      for (std::size_t i = 0; i < sg.size(); ++i) {
        const int s = a.slot_of[i];
        if (s < 0) continue;
        const BBox& b = index[sg[i]].bbox;
        auto& acc = slot_sum[static_cast<std::size_t>(s)];
        acc[0] += b.left() - a.dx;
        acc[1] += b.top() - a.dy;
        acc[2] += b.right() - a.dx;
        acc[3] += b.bottom() - a.dy;
        ++slot_n[static_cast<std::size_t>(s)];
        if (index[sg[i]].cls == WidgetClass::NonText) ++slot_nontext[static_cast<std::size_t>(s)];
      }
    }

    for (std::size_t k = 0; k < block.subgroups.size(); ++k) {
      auto& sg = block.subgroups[k];
      if (sg.empty() || sg.size() >= mode) continue;
      const auto a = align_to_template(sg, tmpl, widgets, tol);
      if (a.matched == 0) continue;
      std::vector<bool> filled(mode);
      for (int s : a.slot_of) {
        if (s >= 0) filled[static_cast<std::size_t>(s)] = true;
      }
      for (std::size_t s = 0; s < mode; ++s) {
        if (filled[s] || slot_n[s] == 0) continue;
        const auto& acc = slot_sum[s];
        const double n = slot_n[s];
        const long l = std::lround(acc[0] / n + a.dx), t = std::lround(acc[1] / n + a.dy);
        const long r = std::lround(acc[2] / n + a.dx), btm = std::lround(acc[3] / n + a.dy);
        if (l < 0 || t < 0 || r > image_width || (image && btm > image->height()) || l >= r || t >= btm) {
          report.log.push_back("block " + std::to_string(block.id) + ": expected slot outside the image, skipped");
          continue;
        }
        const BBox expected{static_cast<int>(l), static_cast<int>(t), static_cast<int>(r), static_cast<int>(btm)};
        auto inside = [&](const BBox& b) {
          return b.center_x() >= expected.left() && b.center_x() < expected.right() &&
                 b.center_y() >= expected.top() && b.center_y() < expected.bottom();
        };

        std::optional<WidgetId> found;
        double best_iou = -1;
        for (const auto& w : widgets) {
          if (placed.count(w.id) || !inside(w.bbox)) continue;
          const double v = iou(w.bbox, expected);
          if (v > best_iou) {
            best_iou = v;
            found = w.id;
          }
        }
        if (!found && image && slot_nontext[s] > 0) {
          const int margin = std::max(expected.width(), expected.height()) / 2;
          const BBox area{std::max(0, expected.left() - margin), std::max(0, expected.top() - margin),
                          std::min(image->width(), expected.right() + margin),
                          std::min(image->height(), expected.bottom() + margin)};
          const auto det = detect_nontext(crop(*image, area), detector, grouping.relax_factor, image_width);
          std::optional<BBox> hit;
          for (const auto& w : det.widgets) {
            const BBox b = w.bbox.translated(area.left(), area.top());
            if (!inside(b)) continue;
            const double v = iou(b, expected);
            if (v > best_iou) {
              best_iou = v;
              hit = b;
            }
          }
          if (hit) {
            WidgetId next = 0;
            for (const auto& w : widgets) next = std::max(next, w.id + 1);
            widgets.push_back(make_nontext(next, *hit));
            found = next;
            report.recovered.push_back(next);
            report.log.push_back("block " + std::to_string(block.id) + ": recovered widget " + std::to_string(next));
          }
        }
        if (!found) continue;
        placed.insert(*found);
        sg.push_back(*found);
        if (block.source == BlockSource::Container && k < block.frames.size()) {
          if (Widget* frame = detail::find_widget(widgets, block.frames[k])) {
            frame->children.push_back(*found);
            std::sort(frame->children.begin(), frame->children.end());
          }
        }
      }
    }
  }
}

// Majority vote per slot: when more than half of a slot's widgets share a
// class, the others are switched to it. Bounding boxes never change.
inline void correct_misclassified(std::vector<Block>& blocks, std::vector<Widget>& widgets,
                                  const GroupingConfig& grouping, int image_width, CorrectionReport& report) {
  const double tol = grouping.eps_position * grouping.scale(image_width);
  for (const auto& block : blocks) {
    const auto t_idx = detail::template_index(block, widgets, tol);
    if (!t_idx) continue;
    const std::vector<WidgetId> tmpl = block.subgroups[*t_idx];
    std::vector<std::vector<WidgetId>> slots(tmpl.size());
    for (const auto& sg : block.subgroups) {
      const auto a = align_to_template(sg, tmpl, widgets, tol);
      for (std::size_t i = 0; i < sg.size(); ++i) {
        if (a.slot_of[i] >= 0) slots[static_cast<std::size_t>(a.slot_of[i])].push_back(sg[i]);
      }
    }
    for (const auto& slot : slots) {
      std::size_t text = 0;
      for (WidgetId id : slot) text += detail::find_widget(widgets, id)->cls == WidgetClass::Text;
      const std::size_t nontext = slot.size() - text;
      std::optional<WidgetClass> majority;
      if (2 * text > slot.size()) majority = WidgetClass::Text;
      if (2 * nontext > slot.size()) majority = WidgetClass::NonText;
      if (!majority) continue;
      for (WidgetId id : slot) {
        Widget* w = detail::find_widget(widgets, id);
        if (w->cls == *majority || w->is_container) continue;
        set_class(*w, *majority);
        report.reclassified.push_back(id);
        report.log.push_back("widget " + std::to_string(id) + " reclassified as " + to_string(*majority));
      }
    }
  }
}

}  // namespace gestalt
