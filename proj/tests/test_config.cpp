#include <gtest/gtest.h>

#include "gestalt/config.hpp"

using namespace gestalt;

TEST(Config, DefaultsRoundTrip) {
  const RunConfig defaults;
  const auto c = config_from_json(to_json(defaults));
  EXPECT_EQ(to_json(c), to_json(defaults));
  EXPECT_FALSE(c.pipeline.grouping.proximity_gap_max.has_value());
}

TEST(Config, PartialDocumentOverridesDefaults) {
  const auto c = config_from_json(nlohmann::json::parse(
      R"({"detector":{"min_widget_area":250},"grouping":{"proximity_gap_max":40},"thresholds":[1,3]})"));
  EXPECT_DOUBLE_EQ(c.pipeline.detector.min_widget_area, 250);
  EXPECT_EQ(c.pipeline.detector.gradient_threshold, 4);
  EXPECT_EQ(c.pipeline.grouping.proximity_gap_max, 40.0);
  EXPECT_EQ(c.thresholds, (std::vector<int>{1, 3}));
}

TEST(Config, RejectsUnknownKeysWrongTypesAndBadValues) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"detector":{"min_area":3}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"colour":1})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"jobs":"many"})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"thresholds":[2,1]})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"grouping":{"min_pts":0}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"ocr":{"mode":"http"}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"ocr":{"mode":"cloud"}})")), ConfigError);
}

TEST(Config, DottedKeysCoverEveryLeaf) {
  const auto keys = config_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "detector.min_widget_area"), keys.end());
  EXPECT_NE(std::find(keys.begin(), keys.end(), "grouping.proximity_gap_max"), keys.end());
  EXPECT_NE(std::find(keys.begin(), keys.end(), "thresholds"), keys.end());
  EXPECT_EQ(std::count(keys.begin(), keys.end(), "thresholds"), 1);
  auto doc = nlohmann::json::object();
  for (const auto& k : keys) {
    if (k.find('.') == std::string::npos) continue;
    const auto ptr = nlohmann::json::json_pointer("/" + std::string(k).replace(k.find('.'), 1, "/"));
    set_config_value(doc, k, to_json(RunConfig{})[ptr].is_string() ? to_json(RunConfig{})[ptr].get<std::string>()
                                                                   : to_json(RunConfig{})[ptr].dump());
  }
  EXPECT_EQ(to_json(config_from_json(doc)), to_json(RunConfig{}));
}

TEST(Config, SetValueParsesByKeyType) {
  auto doc = nlohmann::json::object();
  set_config_value(doc, "detector.gradient_threshold", "7");
  set_config_value(doc, "ocr.path", "123");
  set_config_value(doc, "grouping.proximity_gap_max", "null");
  EXPECT_EQ(doc["detector"]["gradient_threshold"], 7);
  EXPECT_EQ(doc["ocr"]["path"], "123");
  const auto c = config_from_json(doc);
  EXPECT_EQ(c.pipeline.detector.gradient_threshold, 7);
  EXPECT_THROW(set_config_value(doc, "detector.gradient_threshold", "seven"), ConfigError);
}
