#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gestalt/dbscan.hpp"
#include "gestalt/detection.hpp"
#include "gestalt/geometry.hpp"

namespace gestalt {

enum class Orientation { Vertical, Horizontal };

inline const char* to_string(Orientation o) { return o == Orientation::Vertical ? "vertical" : "horizontal"; }

enum class Attribute { CenterX, CenterY, Top, Left, Area };

struct GroupingConfig {
  double eps_position = 12;   // px, DBSCAN eps for centers and justified edges
  double eps_area_sqrt = 15;  // px, DBSCAN eps on sqrt(area)
  int min_pts = 2;
  int max_count_diff = 4;
  std::optional<double> proximity_gap_max;  // px; unset = factor * median widget height
  double proximity_gap_factor = 1.5;
  double relax_factor = 0.5;  // min-area multiplier when re-detecting missed widgets
  double split_factor = 1.5;  // rhythm break: pitch > split_factor * min pitch + eps
  double conflict_tie = 0.05; // conflict scores closer than this count as equal
  double reference_width = 1440;

  void validate() const {
    if (!(eps_position > 0) || !(eps_area_sqrt > 0)) throw ConfigError("grouping eps values must be > 0");
    if (min_pts < 1) throw ConfigError("grouping.min_pts must be >= 1");
    if (max_count_diff < 1) throw ConfigError("grouping.max_count_diff must be >= 1");
    if (proximity_gap_max && !(*proximity_gap_max >= 0)) {
      throw ConfigError("grouping.proximity_gap_max must be >= 0");
    }
    if (!(proximity_gap_factor > 0)) throw ConfigError("grouping.proximity_gap_factor must be > 0");
    if (!(relax_factor > 0)) throw ConfigError("grouping.relax_factor must be > 0");
    if (!(split_factor >= 1)) throw ConfigError("grouping.split_factor must be >= 1");
    if (!(conflict_tie >= 0)) throw ConfigError("grouping.conflict_tie must be >= 0");
    if (!(reference_width > 0)) throw ConfigError("grouping.reference_width must be > 0");
  }
  double scale(int image_width) const { return image_width / reference_width; }
};

struct Cluster {
  Attribute attribute;
  std::vector<WidgetId> member_ids;
  WidgetClass widget_class;
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

// A positional group: members aligned along one axis.
struct Group {
  Orientation orientation;
  WidgetClass cls;
  std::vector<WidgetId> members;
  bool frames = false;  // members are containers
  friend bool operator==(const Group&, const Group&) = default;
};

enum class BlockSource { Container, PairedClusters };

struct Block {
  int id = 0;
  Orientation orientation = Orientation::Vertical;
  std::vector<std::vector<WidgetId>> subgroups;
  BlockSource source = BlockSource::PairedClusters;
  std::vector<WidgetId> frames;  // container per subgroup when source == Container
};

namespace detail {

class WidgetIndex {
 public:
  explicit WidgetIndex(std::span<const Widget> widgets) : widgets_(widgets) {
    for (std::size_t i = 0; i < widgets.size(); ++i) pos_.emplace(widgets[i].id, i);
  }
  const Widget& operator[](WidgetId id) const {
    auto it = pos_.find(id);
    if (it == pos_.end()) throw std::out_of_range("unknown widget id " + std::to_string(id));
    return widgets_[it->second];
  }
  bool has(WidgetId id) const { return pos_.count(id) > 0; }

 private:
  std::span<const Widget> widgets_;
  std::unordered_map<WidgetId, std::size_t> pos_;
};

inline std::vector<Cluster> run_attribute(std::span<const Widget> widgets, Attribute attr, double eps,
                                          int min_pts, WidgetClass cls) {
  std::vector<std::pair<WidgetId, double>> values;
  for (const auto& w : widgets) {
    double v = 0;
    switch (attr) {
      case Attribute::CenterX: v = w.center_x(); break;
      case Attribute::CenterY: v = w.center_y(); break;
      case Attribute::Top: v = w.top(); break;
      case Attribute::Left: v = w.left(); break;
      case Attribute::Area: v = std::sqrt(static_cast<double>(w.area())); break;
    }
    values.emplace_back(w.id, v);
  }
  std::vector<Cluster> out;
  for (auto& members : dbscan_1d(std::move(values), eps, min_pts).clusters) {
    if (members.size() >= 2) out.push_back({attr, std::move(members), cls});
  }
  return out;
}

inline Axis axis_of(Orientation o) { return o == Orientation::Vertical ? Axis::Vertical : Axis::Horizontal; }
inline Axis across(Orientation o) { return o == Orientation::Vertical ? Axis::Horizontal : Axis::Vertical; }

inline double center_along(const BBox& b, Orientation o) {
  return o == Orientation::Vertical ? b.center_y() : b.center_x();
}

inline std::vector<WidgetId> sorted_along(std::vector<WidgetId> ids, const WidgetIndex& index,
                                          Orientation o) {
  std::stable_sort(ids.begin(), ids.end(), [&](WidgetId a, WidgetId b) {
    const double ca = center_along(index[a].bbox, o);
    const double cb = center_along(index[b].bbox, o);
    return ca != cb ? ca < cb : a < b;
  });
  return ids;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

struct NonTextClusters {
  std::vector<Cluster> columns;  // shared center_x
  std::vector<Cluster> rows;     // shared center_y
  std::vector<Cluster> areas;    // similar sqrt(area)
};

struct TextClusters {
  std::vector<Cluster> columns;  // shared left edge
  std::vector<Cluster> rows;     // shared top edge
};

inline NonTextClusters cluster_nontext(std::span<const Widget> widgets, const GroupingConfig& cfg,
                                       int image_width) {
  for (const auto& w : widgets) {
    if (w.cls != WidgetClass::NonText || w.is_container) {
      throw std::invalid_argument("cluster_nontext: expects plain non-text widgets");
    }
  }
  const double s = cfg.scale(image_width);
  return {detail::run_attribute(widgets, Attribute::CenterX, cfg.eps_position * s, cfg.min_pts, WidgetClass::NonText),
          detail::run_attribute(widgets, Attribute::CenterY, cfg.eps_position * s, cfg.min_pts, WidgetClass::NonText),
          detail::run_attribute(widgets, Attribute::Area, cfg.eps_area_sqrt * s, cfg.min_pts, WidgetClass::NonText)};
}

inline TextClusters cluster_text(std::span<const Widget> widgets, const GroupingConfig& cfg, int image_width) {
  for (const auto& w : widgets) {
    if (w.cls != WidgetClass::Text) throw std::invalid_argument("cluster_text: expects text widgets");
  }
  const double s = cfg.scale(image_width);
  return {detail::run_attribute(widgets, Attribute::Left, cfg.eps_position * s, cfg.min_pts, WidgetClass::Text),
          detail::run_attribute(widgets, Attribute::Top, cfg.eps_position * s, cfg.min_pts, WidgetClass::Text)};
}

inline Orientation orientation_of(Attribute a) {
  return (a == Attribute::CenterX || a == Attribute::Left) ? Orientation::Vertical : Orientation::Horizontal;
}

// Breaks an aligned cluster where its rhythm breaks. Members are ordered along
// the group axis; a pitch (center-to-center step) larger than
// split_factor * smallest pitch + eps starts a new run. Runs of one member are
// dropped. When the remaining runs all have the same length k and there are at
// least k of them, they are interleaved items (e.g. title/subtitle pairs) and
// are regrouped into k groups by position within the run.
inline std::vector<Group> split_by_rhythm(const Group& group, std::span<const Widget> widgets,
                                          const GroupingConfig& cfg, int image_width) {
  const detail::WidgetIndex index(widgets);
  const auto ids = detail::sorted_along(group.members, index, group.orientation);
  if (ids.size() < 3) return ids.size() >= 2 ? std::vector<Group>{{group.orientation, group.cls, ids, group.frames}}
                                             : std::vector<Group>{};
  std::vector<double> pitch;
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    pitch.push_back(detail::center_along(index[ids[i + 1]].bbox, group.orientation) -
                    detail::center_along(index[ids[i]].bbox, group.orientation));
  }
  const double limit = cfg.split_factor * *std::min_element(pitch.begin(), pitch.end()) +
                       cfg.eps_position * cfg.scale(image_width);
  std::vector<std::vector<WidgetId>> runs{{ids[0]}};
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    if (pitch[i] > limit) runs.emplace_back();
    runs.back().push_back(ids[i + 1]);
  }
  std::erase_if(runs, [](const auto& r) { return r.size() < 2; });
  std::vector<Group> out;
  if (runs.empty()) return out;
  const std::size_t k = runs.front().size();
  const bool interleaved = runs.size() >= 2 && k <= runs.size() &&
                           std::all_of(runs.begin(), runs.end(), [&](const auto& r) { return r.size() == k; });
  if (interleaved) {
    for (std::size_t j = 0; j < k; ++j) {
      Group g{group.orientation, group.cls, {}, group.frames};
      for (const auto& r : runs) g.members.push_back(r[j]);
      out.push_back(std::move(g));
    }
    return out;
  }
  for (auto& r : runs) out.push_back({group.orientation, group.cls, std::move(r), group.frames});
  return out;
}

struct ConflictScore {
  double area = 0;
  double spacing = 0;
  double total() const { return area + spacing; }
};

// Fit of widget `w` to group `g` judged against the other members: relative
// area difference, plus how far w's gap to its nearest member departs from the
// typical nearest-member gap of the others (measured along the group axis).
inline ConflictScore conflict_score(const Widget& w, const Group& g, std::span<const Widget> widgets) {
  const detail::WidgetIndex index(widgets);
  std::vector<WidgetId> others;
  for (WidgetId id : g.members) {
    if (id != w.id) others.push_back(id);
  }
  if (others.empty()) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  ConflictScore s;
  double mean_area = 0;
  for (WidgetId id : others) mean_area += static_cast<double>(index[id].area());
  mean_area /= static_cast<double>(others.size());
  s.area = std::abs(static_cast<double>(w.area()) - mean_area) / mean_area;

  const Axis axis = detail::axis_of(g.orientation);
  auto nearest_gap = [&](const BBox& b, WidgetId self) {
    int best = std::numeric_limits<int>::max();
    for (WidgetId id : g.members) {
      if (id != self) best = std::min(best, axis_gap(b, index[id].bbox, axis));
    }
    return best;
  };
  double mean_gap = 0;
  for (WidgetId id : others) mean_gap += nearest_gap(index[id].bbox, id);
  mean_gap /= static_cast<double>(others.size());
  s.spacing = std::abs(nearest_gap(w.bbox, w.id) - mean_gap) / (mean_gap + 1);
  return s;
}

// Leaves every widget in at most one group. A widget claimed by several groups
// stays in the one with the lowest area + spacing score (ties: lower spacing
// score, then the vertical group). Scores within `tie` of each other are equal,
// so one-pixel rounding does not decide. Groups below two members dissolve.
inline std::vector<Group> resolve_conflicts(std::vector<Group> groups, std::span<const Widget> widgets,
                                            double tie = 1e-9) {
  const double kTie = tie;
  const detail::WidgetIndex index(widgets);
  std::vector<bool> alive(groups.size(), true);
  auto dissolve_small = [&] {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (alive[g] && groups[g].members.size() < 2) alive[g] = false;
    }
  };
  dissolve_small();
  std::set<WidgetId> ids;
  for (const auto& g : groups) ids.insert(g.members.begin(), g.members.end());
  for (WidgetId id : ids) {
    std::vector<std::size_t> owners;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (alive[g] && std::find(groups[g].members.begin(), groups[g].members.end(), id) != groups[g].members.end()) {
        owners.push_back(g);
      }
    }
    if (owners.size() < 2) continue;
    const Widget& w = index[id];
    std::size_t best = owners.front();
    ConflictScore best_score = conflict_score(w, groups[best], widgets);
    for (std::size_t k = 1; k < owners.size(); ++k) {
      const std::size_t g = owners[k];
      const ConflictScore sc = conflict_score(w, groups[g], widgets);
      bool better = false;
      if (sc.total() < best_score.total() - kTie) {
        better = true;
      } else if (std::abs(sc.total() - best_score.total()) <= kTie) {
        if (sc.spacing < best_score.spacing - kTie) {
          better = true;
        } else if (std::abs(sc.spacing - best_score.spacing) <= kTie &&
                   groups[g].orientation == Orientation::Vertical &&
                   groups[best].orientation == Orientation::Horizontal) {
          better = true;
        }
      }
      if (better) {
        best = g;
        best_score = sc;
      }
    }
    for (std::size_t g : owners) {
      if (g != best) std::erase(groups[g].members, id);
    }
    dissolve_small();
  }
  std::vector<Group> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (alive[g]) out.push_back(std::move(groups[g]));
  }
  return out;
}

// Pairs subgroups of two blocks: globally nearest subgroup hulls first, each
// subgroup used at most once. Nearness is the edge-to-edge distance between the
// hulls (centre distance breaks ties), so left-aligned items of different
// widths still pair with their own neighbours. Returns (index in a, index in b)
// pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> pair_subgroups(
    const std::vector<std::vector<WidgetId>>& a, const std::vector<std::vector<WidgetId>>& b,
    std::span<const Widget> widgets) {
  const detail::WidgetIndex index(widgets);
  auto hull_of_ids = [&](const std::vector<WidgetId>& ids) {
    return hull_of(ids, [&](WidgetId id) { return index[id].bbox; });
  };
  struct Candidate {
    double gap, dist;
    std::size_t i, j;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const BBox ha = hull_of_ids(a[i]);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const BBox hb = hull_of_ids(b[j]);
      cands.push_back({std::hypot(axis_gap(ha, hb, Axis::Horizontal), axis_gap(ha, hb, Axis::Vertical)),
                       std::hypot(ha.center_x() - hb.center_x(), ha.center_y() - hb.center_y()), i, j});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.gap != y.gap) return x.gap < y.gap;
    if (x.dist != y.dist) return x.dist < y.dist;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  std::vector<bool> used_a(a.size()), used_b(b.size());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : cands) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    pairs.emplace_back(c.i, c.j);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

struct MergeEvent {
  int lanes_a = 0;
  int lanes_b = 0;
  bool concatenated = false;
};

namespace detail {

struct Unit {
  int id = 0;
  Orientation orientation = Orientation::Vertical;
  bool frames = false;
  std::vector<std::vector<WidgetId>> subgroups;
  int lanes = 0;  // items along the orientation axis
  BBox hull;
  std::set<WidgetClass> classes;
};

inline void refresh(Unit& u, const WidgetIndex& index) {
  std::vector<WidgetId> all;
  for (const auto& sg : u.subgroups) all.insert(all.end(), sg.begin(), sg.end());
  u.hull = hull_of(all, [&](WidgetId id) { return index[id].bbox; });
  u.classes.clear();
  for (WidgetId id : all) u.classes.insert(index[id].cls);
}

// Per-subgroup class multiset when all subgroups share one; empty otherwise.
inline std::vector<WidgetClass> signature(const Unit& u, const WidgetIndex& index) {
  std::vector<WidgetClass> first;
  for (std::size_t k = 0; k < u.subgroups.size(); ++k) {
    std::vector<WidgetClass> sig;
    for (WidgetId id : u.subgroups[k]) sig.push_back(index[id].cls);
    std::sort(sig.begin(), sig.end());
    if (k == 0) {
      first = sig;
    } else if (sig != first) {
      return {};
    }
  }
  return first;
}

inline double mean_sqrt_area(const Unit& u, const WidgetIndex& index) {
  double sum = 0;
  int n = 0;
  for (const auto& sg : u.subgroups) {
    for (WidgetId id : sg) {
      sum += std::sqrt(static_cast<double>(index[id].area()));
      ++n;
    }
  }
  return n ? sum / n : 0;
}

}  // namespace detail

// Proximity pairing. Two units (groups or partial blocks) merge when they share
// an orientation, sit next to each other across that orientation with no other
// unit in between, are within the proximity gap, and their item counts differ
// by less than max_count_diff. Same-class pairs go first; the closest pair is
// merged each round until nothing changes. Units that are parallel copies (same
// per-item composition and size, disjoint hulls) are concatenated into one
// block of more items; otherwise items are paired into richer subgroups.
inline std::vector<Block> pair_groups(const std::vector<Group>& groups, std::span<const Widget> widgets,
                                      const GroupingConfig& cfg, int image_width,
                                      std::vector<MergeEvent>* log = nullptr) {
  const detail::WidgetIndex index(widgets);
  const double s = cfg.scale(image_width);
  std::vector<detail::Unit> units;
  int next_id = 0;
  for (const auto& g : groups) {
    detail::Unit u;
    u.id = next_id++;
    u.orientation = g.orientation;
    u.frames = g.frames;
    for (WidgetId id : g.members) u.subgroups.push_back({id});
    u.lanes = static_cast<int>(g.members.size());
    detail::refresh(u, index);
    units.push_back(std::move(u));
  }

  auto parallel_copies = [&](const detail::Unit& a, const detail::Unit& b, int gap) {
    const auto sig = detail::signature(a, index);
    return gap > 0 && !sig.empty() && sig == detail::signature(b, index) &&
           std::abs(detail::mean_sqrt_area(a, index) - detail::mean_sqrt_area(b, index)) <= cfg.eps_area_sqrt * s;
  };

  auto gap_between = [&](const detail::Unit& a, const detail::Unit& b) -> std::optional<int> {
    if (a.orientation != b.orientation || a.frames != b.frames) return std::nullopt;
    if (std::abs(a.lanes - b.lanes) >= cfg.max_count_diff) return std::nullopt;
    const Axis along = detail::axis_of(a.orientation);
    const Axis across = detail::across(a.orientation);
    const auto extent = [&](const BBox& h) { return along == Axis::Vertical ? h.height() : h.width(); };
    const int overlap = axis_overlap(a.hull, b.hull, along);
    if (overlap < 0.5 * std::min(extent(a.hull), extent(b.hull))) return std::nullopt;
    const int gap = axis_gap(a.hull, b.hull, across);
    double limit = 0;
    if (cfg.proximity_gap_max) {
      limit = *cfg.proximity_gap_max * s;
    } else {
      std::vector<double> heights;
      for (const auto* u : {&a, &b}) {
        for (const auto& sg : u->subgroups) {
          for (WidgetId id : sg) heights.push_back(index[id].bbox.height());
        }
      }
      limit = cfg.proximity_gap_factor * detail::median(heights);
    }
    if (gap > limit) return std::nullopt;
    // Containers only extend; they are never fused into one item.
    if (a.frames && !parallel_copies(a, b, gap)) return std::nullopt;
    if (gap > 0) {
      // The corridor between the two hulls must be free of other units.
      int l, t, r, btm;
      if (across == Axis::Horizontal) {
        l = std::min(a.hull.right(), b.hull.right());
        r = std::max(a.hull.left(), b.hull.left());
        t = std::max(a.hull.top(), b.hull.top());
        btm = std::min(a.hull.bottom(), b.hull.bottom());
      } else {
        t = std::min(a.hull.bottom(), b.hull.bottom());
        btm = std::max(a.hull.top(), b.hull.top());
        l = std::max(a.hull.left(), b.hull.left());
        r = std::min(a.hull.right(), b.hull.right());
      }
      if (l < r && t < btm) {
        const BBox corridor{l, t, r, btm};
        for (const auto& c : units) {
          if (c.id == a.id || c.id == b.id) continue;
          if (intersection(c.hull, corridor)) return std::nullopt;
        }
      }
    }
    return gap;
  };

  for (;;) {
    struct Best {
      std::size_t a, b;
      int gap;
    };
    std::optional<Best> best;
    for (int phase = 0; phase < 2 && !best; ++phase) {
      for (std::size_t i = 0; i < units.size(); ++i) {
        for (std::size_t j = i + 1; j < units.size(); ++j) {
          const auto& a = units[i];
          const auto& b = units[j];
          if (phase == 0 && !(a.classes.size() == 1 && a.classes == b.classes)) continue;
          const auto gap = gap_between(a, b);
          if (!gap) continue;
          if (!best || *gap < best->gap) best = Best{i, j, *gap};
        }
      }
    }
    if (!best) break;
    detail::Unit& a = units[best->a];
    detail::Unit& b = units[best->b];
    const bool parallel = parallel_copies(a, b, best->gap);
    if (log) log->push_back({a.lanes, b.lanes, parallel});
    detail::Unit merged;
    merged.id = next_id++;
    merged.orientation = a.orientation;
    merged.frames = a.frames;
    merged.lanes = std::max(a.lanes, b.lanes);
    if (parallel) {
      merged.subgroups = a.subgroups;
      merged.subgroups.insert(merged.subgroups.end(), b.subgroups.begin(), b.subgroups.end());
    } else {
      const bool a_small = a.subgroups.size() <= b.subgroups.size();
      const auto& small = a_small ? a.subgroups : b.subgroups;
      const auto& large = a_small ? b.subgroups : a.subgroups;
      const auto pairs = pair_subgroups(small, large, widgets);
      std::vector<bool> used_small(small.size());
      merged.subgroups = large;
      for (auto [i, j] : pairs) {
        merged.subgroups[j].insert(merged.subgroups[j].end(), small[i].begin(), small[i].end());
        used_small[i] = true;
      }
      for (std::size_t i = 0; i < small.size(); ++i) {
        if (!used_small[i]) merged.subgroups.push_back(small[i]);
      }
    }
    detail::refresh(merged, index);
    const std::size_t hi = std::max(best->a, best->b), lo = std::min(best->a, best->b);
    units.erase(units.begin() + static_cast<std::ptrdiff_t>(hi));
    units.erase(units.begin() + static_cast<std::ptrdiff_t>(lo));
    units.push_back(std::move(merged));
  }

  std::vector<Block> blocks;
  for (auto& u : units) {
    Block blk;
    blk.orientation = u.orientation;
    blk.source = u.frames ? BlockSource::Container : BlockSource::PairedClusters;
    for (auto& sg : u.subgroups) {
      std::vector<BBox> boxes;
      for (WidgetId id : sg) boxes.push_back(index[id].bbox);
      std::vector<WidgetId> ordered;
      for (std::size_t k : reading_order(boxes)) ordered.push_back(sg[k]);
      blk.subgroups.push_back(std::move(ordered));
    }
    std::vector<BBox> hulls;
    for (const auto& sg : blk.subgroups) hulls.push_back(hull_of(sg, [&](WidgetId id) { return index[id].bbox; }));
    std::vector<std::vector<WidgetId>> ordered;
    for (std::size_t k : reading_order(hulls)) ordered.push_back(std::move(blk.subgroups[k]));
    blk.subgroups = std::move(ordered);
    blocks.push_back(std::move(blk));
  }
  std::vector<BBox> block_hulls;
  for (const auto& b : blocks) {
    std::vector<WidgetId> all;
    for (const auto& sg : b.subgroups) all.insert(all.end(), sg.begin(), sg.end());
    block_hulls.push_back(hull_of(all, [&](WidgetId id) { return index[id].bbox; }));
  }
  std::vector<Block> out;
  for (std::size_t k : reading_order(block_hulls)) {
    out.push_back(std::move(blocks[k]));
    out.back().id = static_cast<int>(out.size()) - 1;
  }
  return out;
}

}  // namespace gestalt
