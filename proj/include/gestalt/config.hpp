#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "gestalt/pipeline.hpp"

namespace gestalt {

struct OcrSpec {
  std::string mode = "file";  // file | http
  std::string path;           // fixture file or directory; empty = <stem>.ocr.json beside the image
  std::string url;
  double timeout_seconds = 10.0;
  int retries = 2;
};

struct RunConfig {
  PipelineConfig pipeline;
  OcrSpec ocr;
  std::string out = ".";
  bool overlay = false;
  std::vector<int> thresholds{0, 1, 2, 3, 4};
  int jobs = 1;

  void validate() const {
    try {
      pipeline.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (ocr.mode != "file" && ocr.mode != "http") throw ConfigError("ocr.mode must be \"file\" or \"http\"");
    if (ocr.mode == "http" && ocr.url.empty()) throw ConfigError("ocr.url is required when ocr.mode is \"http\"");
    if (!(ocr.timeout_seconds > 0)) throw ConfigError("ocr.timeout_seconds must be > 0");
    if (ocr.retries < 0) throw ConfigError("ocr.retries must be >= 0");
    if (thresholds.empty()) throw ConfigError("thresholds must not be empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (thresholds[i] < 0) throw ConfigError("thresholds must be >= 0");
      if (i && thresholds[i] <= thresholds[i - 1]) throw ConfigError("thresholds must be strictly ascending");
    }
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  const auto& d = c.pipeline.detector;
  const auto& g = c.pipeline.grouping;
  const auto& l = c.pipeline.lines;
  return {
      {"detector",
       {{"min_widget_area", d.min_widget_area},
        {"max_widget_area_ratio", d.max_widget_area_ratio},
        {"gradient_threshold", d.gradient_threshold},
        {"straightness_tol", d.straightness_tol},
        {"coverage_tol", d.coverage_tol},
        {"hollow_tol", d.hollow_tol},
        {"container_tolerance", d.container_tolerance},
        {"text_iou", d.text_iou},
        {"reference_width", d.reference_width}}},
      {"grouping",
       {{"eps_position", g.eps_position},
        {"eps_area_sqrt", g.eps_area_sqrt},
        {"min_pts", g.min_pts},
        {"max_count_diff", g.max_count_diff},
        {"proximity_gap_max", g.proximity_gap_max ? nlohmann::json(*g.proximity_gap_max) : nlohmann::json()},
        {"proximity_gap_factor", g.proximity_gap_factor},
        {"relax_factor", g.relax_factor},
        {"split_factor", g.split_factor},
        {"conflict_tie", g.conflict_tie},
        {"reference_width", g.reference_width}}},
      {"lines", {{"min_vertical_overlap", l.min_vertical_overlap}, {"max_gap_chars", l.max_gap_chars}}},
      {"ocr",
       {{"mode", c.ocr.mode},
        {"path", c.ocr.path},
        {"url", c.ocr.url},
        {"timeout_seconds", c.ocr.timeout_seconds},
        {"retries", c.ocr.retries}}},
      {"out", c.out},
      {"overlay", c.overlay},
      {"thresholds", c.thresholds},
      {"jobs", c.jobs},
  };
}

namespace detail {

// Every key of `doc` must exist in `schema`, recursively.
inline void check_keys(const nlohmann::json& doc, const nlohmann::json& schema, const std::string& prefix) {
  if (!doc.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + " must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    if (schema[it.key()].is_object()) check_keys(it.value(), schema[it.key()], key);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* section, const char* key, T& out) {
  const auto& v = section ? j.at(section).at(key) : j.at(key);
  try {
    out = v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + (section ? std::string(section) + "." : "") + key +
                      "' has the wrong type: " + v.dump());
  }
}

}  // namespace detail

// Defaults overlaid with `doc`; unknown keys and wrong types are ConfigErrors.
inline RunConfig config_from_json(const nlohmann::json& doc) {
  RunConfig c;
  auto full = to_json(c);
  detail::check_keys(doc, full, "");
  full.merge_patch(doc);
  // merge_patch treats null as deletion; restore the only nullable key.
  if (!full["grouping"].contains("proximity_gap_max")) full["grouping"]["proximity_gap_max"] = nullptr;
  auto& d = c.pipeline.detector;
  detail::read(full, "detector", "min_widget_area", d.min_widget_area);
  detail::read(full, "detector", "max_widget_area_ratio", d.max_widget_area_ratio);
  detail::read(full, "detector", "gradient_threshold", d.gradient_threshold);
  detail::read(full, "detector", "straightness_tol", d.straightness_tol);
  detail::read(full, "detector", "coverage_tol", d.coverage_tol);
  detail::read(full, "detector", "hollow_tol", d.hollow_tol);
  detail::read(full, "detector", "container_tolerance", d.container_tolerance);
  detail::read(full, "detector", "text_iou", d.text_iou);
  detail::read(full, "detector", "reference_width", d.reference_width);
  auto& g = c.pipeline.grouping;
  detail::read(full, "grouping", "eps_position", g.eps_position);
  detail::read(full, "grouping", "eps_area_sqrt", g.eps_area_sqrt);
  detail::read(full, "grouping", "min_pts", g.min_pts);
  detail::read(full, "grouping", "max_count_diff", g.max_count_diff);
  if (const auto& v = full["grouping"]["proximity_gap_max"]; v.is_null()) {
    g.proximity_gap_max.reset();
  } else {
    double gap = 0;
    detail::read(full, "grouping", "proximity_gap_max", gap);
    g.proximity_gap_max = gap;
  }
  detail::read(full, "grouping", "proximity_gap_factor", g.proximity_gap_factor);
  detail::read(full, "grouping", "relax_factor", g.relax_factor);
  detail::read(full, "grouping", "split_factor", g.split_factor);
  detail::read(full, "grouping", "conflict_tie", g.conflict_tie);
  detail::read(full, "grouping", "reference_width", g.reference_width);
  detail::read(full, "lines", "min_vertical_overlap", c.pipeline.lines.min_vertical_overlap);
  detail::read(full, "lines", "max_gap_chars", c.pipeline.lines.max_gap_chars);
  detail::read(full, "ocr", "mode", c.ocr.mode);
  detail::read(full, "ocr", "path", c.ocr.path);
  detail::read(full, "ocr", "url", c.ocr.url);
  detail::read(full, "ocr", "timeout_seconds", c.ocr.timeout_seconds);
  detail::read(full, "ocr", "retries", c.ocr.retries);
  detail::read(full, nullptr, "out", c.out);
  detail::read(full, nullptr, "overlay", c.overlay);
  detail::read(full, nullptr, "thresholds", c.thresholds);
  detail::read(full, nullptr, "jobs", c.jobs);
  c.validate();
  return c;
}

// Dotted names of every leaf key ("detector.min_widget_area", "jobs", ...).
inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  const auto flat = to_json(RunConfig{}).flatten();
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    std::string dotted = it.key().substr(1);
    std::replace(dotted.begin(), dotted.end(), '/', '.');
    // Array elements flatten to "thresholds/0"; the array itself is the key.
    if (const auto pos = dotted.find_first_of("0123456789"); pos != std::string::npos && dotted[pos - 1] == '.') {
      dotted.erase(pos - 1);
    }
    if (std::find(keys.begin(), keys.end(), dotted) == keys.end()) keys.push_back(dotted);
  }
  return keys;
}

// Sets one dotted key in a config document. String-valued keys take the text
// verbatim; other values are read as JSON (numbers, booleans, null, arrays).
inline void set_config_value(nlohmann::json& doc, const std::string& dotted, const std::string& value) {
  std::string pointer = "/" + dotted;
  std::replace(pointer.begin(), pointer.end(), '.', '/');
  const auto defaults = to_json(RunConfig{});
  const nlohmann::json::json_pointer ptr(pointer);
  nlohmann::json parsed;
  if (defaults.contains(ptr) && defaults[ptr].is_string()) {
    parsed = value;
  } else {
    parsed = nlohmann::json::parse(value, nullptr, false);
    if (parsed.is_discarded()) throw ConfigError("cannot parse value '" + value + "' for " + dotted);
  }
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = std::move(parsed);
      return;
    }
    if (!node->contains(part)) (*node)[part] = nlohmann::json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace gestalt
