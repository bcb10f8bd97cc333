#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gestalt/geometry.hpp"
#include "gestalt/grouping.hpp"

namespace gestalt {

enum class NodeKind { Block, Group, Container, Text, NonText };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Block: return "block";
    case NodeKind::Group: return "group";
    case NodeKind::Container: return "container";
    case NodeKind::Text: return "text";
    case NodeKind::NonText: return "nontext";
  }
  return "?";
}

struct Node {
  NodeKind kind = NodeKind::NonText;
  BBox bbox;
  std::optional<WidgetId> id;
  std::string content;  // text leaves only
  std::vector<Node> children;

  bool is_leaf() const { return kind == NodeKind::Text || kind == NodeKind::NonText; }
  friend bool operator==(const Node&, const Node&) = default;
};

struct Hierarchy {
  std::vector<Node> roots;
  friend bool operator==(const Hierarchy&, const Hierarchy&) = default;
};

inline Node leaf_node(const Widget& w) {
  return {w.cls == WidgetClass::Text ? NodeKind::Text : NodeKind::NonText, w.bbox, w.id, w.text.value_or(""), {}};
}

inline void sort_reading_order(std::vector<Node>& nodes) {
  std::vector<BBox> boxes;
  for (const auto& n : nodes) boxes.push_back(n.bbox);
  std::vector<Node> out;
  for (std::size_t i : reading_order(boxes)) out.push_back(std::move(nodes[i]));
  nodes = std::move(out);
}

namespace detail {

inline Node container_node(const Widget& c, const std::map<WidgetId, const Widget*>& by_id,
                           std::set<WidgetId>& emitted) {
  Node n{NodeKind::Container, c.bbox, c.id, "", {}};
  emitted.insert(c.id);
  for (WidgetId id : c.children) {
    auto it = by_id.find(id);
    if (it == by_id.end() || emitted.count(id)) continue;
    const Widget& child = *it->second;
    if (child.is_container) {
      n.children.push_back(container_node(child, by_id, emitted));
    } else {
      emitted.insert(id);
      n.children.push_back(leaf_node(child));
    }
  }
  sort_reading_order(n.children);
  return n;
}

inline BBox hull_of_nodes(const std::vector<Node>& nodes) {
  return hull_of(nodes, [](const Node& n) { return n.bbox; });
}

}  // namespace detail

// Root children: standalone top-level containers, blocks and loose widgets, in
// reading order. A widget owned by a container is dropped from any block it
// was also grouped into.
inline Hierarchy build_hierarchy(std::span<const Widget> widgets, const std::vector<Block>& blocks) {
  std::map<WidgetId, const Widget*> by_id;
  for (const auto& w : widgets) {
    if (!by_id.emplace(w.id, &w).second) throw std::invalid_argument("build_hierarchy: duplicate widget id");
  }
  std::set<WidgetId> claimed;  // anything below a container
  for (const auto& w : widgets) {
    if (w.is_container) claimed.insert(w.children.begin(), w.children.end());
  }

  Hierarchy h;
  std::set<WidgetId> emitted;
  for (const auto& block : blocks) {
    Node bn{NodeKind::Block, BBox{}, std::nullopt, "", {}};
    for (std::size_t k = 0; k < block.subgroups.size(); ++k) {
      Node gn{NodeKind::Group, BBox{}, std::nullopt, "", {}};
      if (block.source == BlockSource::Container && k < block.frames.size()) {
        auto it = by_id.find(block.frames[k]);
        if (it != by_id.end() && !emitted.count(it->first) && it->second->is_container) {
          gn.children.push_back(detail::container_node(*it->second, by_id, emitted));
        }
      }
      for (WidgetId id : block.subgroups[k]) {
        auto it = by_id.find(id);
        if (it == by_id.end() || emitted.count(id)) continue;
        if (block.source == BlockSource::PairedClusters && claimed.count(id)) continue;
        if (it->second->is_container) {
          if (claimed.count(id)) continue;
          gn.children.push_back(detail::container_node(*it->second, by_id, emitted));
        } else {
          emitted.insert(id);
          gn.children.push_back(leaf_node(*it->second));
        }
      }
      if (gn.children.empty()) continue;
      sort_reading_order(gn.children);
      gn.bbox = detail::hull_of_nodes(gn.children);
      bn.children.push_back(std::move(gn));
    }
    if (bn.children.empty()) continue;
    sort_reading_order(bn.children);
    bn.bbox = detail::hull_of_nodes(bn.children);
    h.roots.push_back(std::move(bn));
  }
  for (const auto& w : widgets) {
    if (emitted.count(w.id) || claimed.count(w.id)) continue;
    if (w.is_container) {
      h.roots.push_back(detail::container_node(w, by_id, emitted));
    } else {
      emitted.insert(w.id);
      h.roots.push_back(leaf_node(w));
    }
  }
  // Children of containers that were themselves never reached (cyclic or
  // dangling child lists) still surface as loose leaves.
  for (const auto& w : widgets) {
    if (emitted.count(w.id)) continue;
    emitted.insert(w.id);
    h.roots.push_back(leaf_node(w));
  }
  sort_reading_order(h.roots);
  return h;
}

// ---- token serialization ----

using TokenSeq = std::vector<char>;  // alphabet: ( ) [ ] t n

namespace detail {

inline void emit_leaves(const Node& n, TokenSeq& out) {
  if (n.kind == NodeKind::Text) {
    out.push_back('t');
  } else if (n.kind == NodeKind::NonText) {
    out.push_back('n');
  } else {
    for (const auto& c : n.children) emit_leaves(c, out);
  }
}

inline void emit_block(const Node& n, TokenSeq& out) {
  out.push_back('(');
  if (n.kind == NodeKind::Container) {
    out.push_back('[');
    emit_leaves(n, out);
    out.push_back(']');
  } else {
    for (const auto& c : n.children) {
      if (c.is_leaf()) {
        emit_leaves(c, out);
        continue;
      }
      out.push_back('[');
      emit_leaves(c, out);
      out.push_back(']');
    }
  }
  out.push_back(')');
}

}  // namespace detail

// Depth-first: a block is "( [..] [..] )", a top-level container is a block of
// one group, containers inside groups contribute only their leaves.
inline TokenSeq serialize(const Hierarchy& h) {
  TokenSeq out;
  for (const auto& n : h.roots) {
    if (n.is_leaf()) {
      detail::emit_leaves(n, out);
    } else if (n.kind == NodeKind::Group) {
      out.push_back('[');
      detail::emit_leaves(n, out);
      out.push_back(']');
    } else {
      detail::emit_block(n, out);
    }
  }
  return out;
}

// Token subsequence of every evaluated block (top-level blocks and containers).
inline std::vector<TokenSeq> block_sequences(const Hierarchy& h) {
  std::vector<TokenSeq> out;
  for (const auto& n : h.roots) {
    if (n.kind == NodeKind::Block || n.kind == NodeKind::Container) {
      out.emplace_back();
      detail::emit_block(n, out.back());
    }
  }
  return out;
}

inline std::string to_string(const TokenSeq& tokens) {
  std::string s;
  for (char c : tokens) {
    if (!s.empty()) s += ' ';
    s += c;
  }
  return s;
}

inline TokenSeq parse_tokens(const std::string& s) {
  TokenSeq out;
  for (char c : s) {
    if (c == ' ') continue;
    if (std::string_view("()[]tn").find(c) == std::string_view::npos) {
      throw std::invalid_argument(std::string("unknown token '") + c + "'");
    }
    out.push_back(c);
  }
  return out;
}

inline bool balanced(const TokenSeq& tokens) {
  std::vector<char> stack;
  for (char c : tokens) {
    if (c == '(' || c == '[') {
      stack.push_back(c);
    } else if (c == ')' || c == ']') {
      const char open = c == ')' ? '(' : '[';
      if (stack.empty() || stack.back() != open) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

inline std::size_t leaf_count(const Node& n) {
  if (n.is_leaf()) return 1;
  std::size_t k = n.kind == NodeKind::Container ? 1 : 0;
  for (const auto& c : n.children) k += leaf_count(c);
  return k;
}

// Ids of every widget represented in the tree (leaves and containers).
inline void collect_ids(const Node& n, std::vector<WidgetId>& out) {
  if (n.id && (n.is_leaf() || n.kind == NodeKind::Container)) out.push_back(*n.id);
  for (const auto& c : n.children) collect_ids(c, out);
}

inline std::vector<WidgetId> collect_ids(const Hierarchy& h) {
  std::vector<WidgetId> out;
  for (const auto& n : h.roots) collect_ids(n, out);
  return out;
}

// ---- JSON ----

inline nlohmann::json bbox_to_json(const BBox& b) { return {b.left(), b.top(), b.right(), b.bottom()}; }

inline BBox bbox_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("bbox must be [left, top, right, bottom]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

inline nlohmann::json to_json(const Node& n) {
  nlohmann::json j{{"type", to_string(n.kind)}, {"bbox", bbox_to_json(n.bbox)}};
  if (n.id) j["id"] = *n.id;
  if (n.kind == NodeKind::Text) j["content"] = n.content;
  if (!n.is_leaf()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : n.children) j["children"].push_back(to_json(c));
  }
  return j;
}

inline nlohmann::json to_json(const Hierarchy& h) {
  nlohmann::json children = nlohmann::json::array();
  for (const auto& n : h.roots) children.push_back(to_json(n));
  return {{"type", "root"}, {"children", std::move(children)}};
}

inline NodeKind node_kind_from_string(const std::string& s) {
  if (s == "block") return NodeKind::Block;
  if (s == "group") return NodeKind::Group;
  if (s == "container") return NodeKind::Container;
  if (s == "text") return NodeKind::Text;
  if (s == "nontext") return NodeKind::NonText;
  throw std::invalid_argument("unknown node type '" + s + "'");
}

inline Node node_from_json(const nlohmann::json& j) {
  Node n;
  n.kind = node_kind_from_string(j.at("type").get<std::string>());
  if (j.contains("id") && !j["id"].is_null()) n.id = j["id"].get<WidgetId>();
  if (j.contains("content") && !j["content"].is_null()) n.content = j["content"].get<std::string>();
  if (j.contains("children")) {
    if (n.is_leaf() && !j["children"].empty()) throw std::invalid_argument("leaf node with children");
    for (const auto& c : j["children"]) n.children.push_back(node_from_json(c));
  }
  if (j.contains("bbox") && !j["bbox"].is_null()) {
    n.bbox = bbox_from_json(j["bbox"]);
  } else if (n.is_leaf() || n.kind == NodeKind::Container) {
    throw std::invalid_argument(std::string(to_string(n.kind)) + " node without bbox");
  } else if (!n.children.empty()) {
    n.bbox = detail::hull_of_nodes(n.children);
  } else {
    throw std::invalid_argument("empty group node without bbox");
  }
  return n;
}

// Accepts {"type": "root", "children": [...]} or a bare array of nodes.
inline Hierarchy hierarchy_from_json(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_array() ? j : j.at("children");
  Hierarchy h;
  for (const auto& c : list) h.roots.push_back(node_from_json(c));
  return h;
}

// Widgets file: [{"bbox": [...], "class": "text"|"nontext", "content"?, "id"?}].
inline nlohmann::json widgets_to_json(std::span<const Widget> widgets) {
  auto doc = nlohmann::json::array();
  for (const auto& w : widgets) {
    nlohmann::json j{{"id", w.id}, {"bbox", bbox_to_json(w.bbox)}, {"class", to_string(w.cls)}};
    if (w.text) j["content"] = *w.text;
    doc.push_back(std::move(j));
  }
  return doc;
}

inline std::vector<Widget> widgets_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw std::invalid_argument("widgets document must be a JSON array");
  std::vector<Widget> out;
  std::set<WidgetId> ids;
  WidgetId next = 0;
  for (const auto& j : doc) {
    if (j.contains("id")) next = std::max(next, j["id"].get<WidgetId>() + 1);
  }
  for (const auto& j : doc) {
    const WidgetId id = j.contains("id") ? j["id"].get<WidgetId>() : next++;
    if (!ids.insert(id).second) throw std::invalid_argument("duplicate widget id " + std::to_string(id));
    const auto cls = j.at("class").get<std::string>();
    const BBox box = bbox_from_json(j.at("bbox"));
    if (cls == "text") {
      out.push_back(make_text(id, box, j.value("content", std::string{})));
    } else if (cls == "nontext") {
      out.push_back(make_nontext(id, box));
    } else {
      throw std::invalid_argument("widget class must be text or nontext, got '" + cls + "'");
    }
  }
  return out;
}

}  // namespace gestalt
