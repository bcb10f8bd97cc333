#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gestalt/geometry.hpp"

namespace gestalt {

class OcrError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TextBox {
  BBox bbox;
  std::string content;
  std::optional<double> confidence;
  friend bool operator==(const TextBox&, const TextBox&) = default;
};

// Record schema: [{"bbox": [l, t, r, b], "content": "...", "confidence": 0.9}, ...]
inline std::vector<TextBox> parse_ocr_records(const nlohmann::json& doc) {
  if (!doc.is_array()) throw OcrError("OCR document must be a JSON array");
  std::vector<TextBox> boxes;
  for (const auto& rec : doc) {
    const auto& b = rec.at("bbox");
    if (!b.is_array() || b.size() != 4) throw OcrError("OCR record bbox must have 4 numbers");
    TextBox box{BBox{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()},
                rec.at("content").get<std::string>(), std::nullopt};
    if (rec.contains("confidence") && !rec["confidence"].is_null()) {
      box.confidence = rec["confidence"].get<double>();
    }
    if (box.content.empty()) throw OcrError("OCR record with empty content");
    boxes.push_back(std::move(box));
  }
  return boxes;
}

inline nlohmann::json ocr_records_to_json(const std::vector<TextBox>& boxes) {
  auto doc = nlohmann::json::array();
  for (const auto& b : boxes) {
    nlohmann::json rec{{"bbox", {b.bbox.left(), b.bbox.top(), b.bbox.right(), b.bbox.bottom()}},
                       {"content", b.content}};
    if (b.confidence) rec["confidence"] = *b.confidence;
    doc.push_back(std::move(rec));
  }
  return doc;
}

// Source of recognised text for one screenshot.
class OcrProvider {
 public:
  virtual ~OcrProvider() = default;
  virtual std::vector<TextBox> recognize(const std::filesystem::path& image_path) = 0;
};

class FileOcrProvider : public OcrProvider {
 public:
  explicit FileOcrProvider(std::filesystem::path fixture) : fixture_(std::move(fixture)) {}

  std::vector<TextBox> recognize(const std::filesystem::path&) override {
    std::ifstream in(fixture_);
    if (!in) throw OcrError("cannot read OCR fixture " + fixture_.string());
    try {
      return parse_ocr_records(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw OcrError(fixture_.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw OcrError(fixture_.string() + ": " + e.what());
    }
  }

 private:
  std::filesystem::path fixture_;
};

namespace detail {

inline std::size_t utf8_length(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace detail

struct LineMergeConfig {
  double min_vertical_overlap = 0.5;  // of the shorter box
  double max_gap_chars = 1.5;         // in median character widths
};

// Word boxes that sit on one baseline and are closer than the gap limit are
// joined into line widgets. Widget ids start at `first_id`, in reading order.
inline std::vector<Widget> ingest_text(const std::vector<TextBox>& boxes, WidgetId first_id,
                                       const LineMergeConfig& cfg = {}) {
  if (boxes.empty()) return {};
  std::vector<double> char_widths;
  for (const auto& b : boxes) {
    char_widths.push_back(static_cast<double>(b.bbox.width()) /
                          static_cast<double>(std::max<std::size_t>(1, detail::utf8_length(b.content))));
  }
  std::nth_element(char_widths.begin(), char_widths.begin() + static_cast<std::ptrdiff_t>(char_widths.size() / 2),
                   char_widths.end());
  const double max_gap = cfg.max_gap_chars * char_widths[char_widths.size() / 2];

  std::vector<std::size_t> parent(boxes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const BBox& a = boxes[i].bbox;
      const BBox& b = boxes[j].bbox;
      const int shorter = std::min(a.height(), b.height());
      if (axis_overlap(a, b, Axis::Vertical) < cfg.min_vertical_overlap * shorter) continue;
      if (axis_gap(a, b, Axis::Horizontal) > max_gap) continue;
      parent[find(i)] = find(j);
    }
  }

  std::vector<std::vector<std::size_t>> lines;
  std::vector<long> slot(boxes.size(), -1);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(lines.size());
      lines.emplace_back();
    }
    lines[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  std::vector<BBox> line_boxes;
  std::vector<std::string> line_text;
  for (auto& line : lines) {
    std::sort(line.begin(), line.end(), [&](std::size_t a, std::size_t b) {
      return boxes[a].bbox.left() != boxes[b].bbox.left() ? boxes[a].bbox.left() < boxes[b].bbox.left()
                                                          : a < b;
    });
    BBox h = boxes[line.front()].bbox;
    std::string text;
    for (std::size_t k = 0; k < line.size(); ++k) {
      h = hull(h, boxes[line[k]].bbox);
      if (k) text += ' ';
      text += boxes[line[k]].content;
    }
    line_boxes.push_back(h);
    line_text.push_back(std::move(text));
  }
  std::vector<Widget> out;
  WidgetId next = first_id;
  for (std::size_t i : reading_order(line_boxes)) {
    out.push_back(make_text(next++, line_boxes[i], line_text[i]));
  }
  return out;
}

inline std::vector<Widget> ingest_text(OcrProvider& provider, const std::filesystem::path& image_path,
                                       WidgetId first_id, const LineMergeConfig& cfg = {}) {
  return ingest_text(provider.recognize(image_path), first_id, cfg);
}

}  // namespace gestalt
