#include <gtest/gtest.h>

#include <random>

#include "gestalt/hierarchy.hpp"
#include "gestalt/pipeline.hpp"

using namespace gestalt;

namespace {

std::vector<Widget> card_widgets() {
  Widget card = make_nontext(0, {100, 100, 700, 400});
  card.is_container = true;
  card.children = {1, 2};
  return {card, make_nontext(1, {120, 120, 220, 220}), make_text(2, {240, 130, 600, 160}, "Title"),
          make_text(3, {100, 500, 300, 530}, "Loose")};
}

}  // namespace

TEST(Tokens, ParseBalancedToString) {
  const auto t = parse_tokens("( [ t n ] )");
  EXPECT_EQ(t.size(), 6u);
  EXPECT_TRUE(balanced(t));
  EXPECT_EQ(to_string(t), "( [ t n ] )");
  EXPECT_FALSE(balanced(parse_tokens("([)]")));
  EXPECT_FALSE(balanced(parse_tokens("((")));
  EXPECT_THROW(parse_tokens("(x)"), std::invalid_argument);
}

TEST(BuildHierarchy, TopLevelContainerAndLooseLeaf) {
  const auto ws = card_widgets();
  const auto h = build_hierarchy(ws, {});
  ASSERT_EQ(h.roots.size(), 2u);
  EXPECT_EQ(h.roots[0].kind, NodeKind::Container);
  EXPECT_EQ(h.roots[1].kind, NodeKind::Text);
  EXPECT_EQ(to_string(serialize(h)), "( [ n t ] ) t");
  const auto blocks = block_sequences(h);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(to_string(blocks[0]), "( [ n t ] )");
}

TEST(BuildHierarchy, EveryWidgetAppearsOnce) {
  std::vector<Widget> ws;
  for (int i = 0; i < 4; ++i) {
    ws.push_back(make_nontext(2 * i, {100, 100 + 140 * i, 196, 196 + 140 * i}));
    ws.push_back(make_text(2 * i + 1, {230, 130 + 140 * i, 700, 166 + 140 * i}, "t"));
  }
  ws.push_back(make_nontext(50, {900, 900, 1000, 1000}));
  Block b;
  for (int i = 0; i < 4; ++i) b.subgroups.push_back({2 * i, 2 * i + 1});
  const auto h = build_hierarchy(ws, {b});
  auto ids = collect_ids(h);
  std::sort(ids.begin(), ids.end());
  std::vector<WidgetId> expected;
  for (const auto& w : ws) expected.push_back(w.id);
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(ids, expected);
  EXPECT_EQ(to_string(serialize(h)), "( [ n t ] [ n t ] [ n t ] [ n t ] ) n");
}

TEST(BuildHierarchy, EmptyInput) {
  const auto h = build_hierarchy({}, {});
  EXPECT_TRUE(h.roots.empty());
  EXPECT_TRUE(serialize(h).empty());
}

TEST(HierarchyJson, RoundTrip) {
  const auto ws = card_widgets();
  const auto h = build_hierarchy(ws, {});
  const auto j = to_json(h);
  EXPECT_EQ(j["type"], "root");
  EXPECT_EQ(hierarchy_from_json(j), h);
  EXPECT_EQ(hierarchy_from_json(nlohmann::json::parse(j.dump())), h);
  EXPECT_EQ(hierarchy_from_json(j["children"]), h);
}

TEST(HierarchyJson, GroupBboxDerivedFromChildren) {
  const auto j = nlohmann::json::parse(R"({"type":"root","children":[{"type":"block","children":[
      {"type":"group","children":[{"type":"nontext","bbox":[0,0,10,10]},{"type":"text","bbox":[20,0,60,10],"content":"x"}]}]}]})");
  const auto h = hierarchy_from_json(j);
  EXPECT_EQ(h.roots[0].bbox, BBox(0, 0, 60, 10));
  EXPECT_EQ(to_string(serialize(h)), "( [ n t ] )");
}

TEST(HierarchyJson, RejectsBadDocuments) {
  EXPECT_THROW(hierarchy_from_json(nlohmann::json::parse(R"([{"type":"widget","bbox":[0,0,1,1]}])")),
               std::invalid_argument);
  EXPECT_THROW(hierarchy_from_json(nlohmann::json::parse(R"([{"type":"text"}])")), std::invalid_argument);
  EXPECT_THROW(hierarchy_from_json(nlohmann::json::parse(R"([{"type":"group","children":[]}])")),
               std::invalid_argument);
}

TEST(WidgetsJson, RoundTripAndIds) {
  const auto ws = card_widgets();
  auto back = widgets_from_json(widgets_to_json(ws));
  ASSERT_EQ(back.size(), ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    EXPECT_EQ(back[i].id, ws[i].id);
    EXPECT_EQ(back[i].bbox, ws[i].bbox);
    EXPECT_EQ(back[i].cls, ws[i].cls);
    EXPECT_EQ(back[i].text, ws[i].text);
  }
  const auto missing_ids = widgets_from_json(nlohmann::json::parse(
      R"([{"bbox":[0,0,5,5],"class":"nontext"},{"id":4,"bbox":[9,9,20,20],"class":"text","content":"a"}])"));
  EXPECT_EQ(missing_ids[0].id, 5);
  EXPECT_THROW(widgets_from_json(nlohmann::json::parse(
                   R"([{"id":1,"bbox":[0,0,5,5],"class":"nontext"},{"id":1,"bbox":[0,0,5,5],"class":"nontext"}])")),
               std::invalid_argument);
  EXPECT_THROW(widgets_from_json(nlohmann::json::parse(R"([{"bbox":[0,0,5,5],"class":"image"}])")),
               std::invalid_argument);
}

TEST(Serialize, BalancedForGroupedOutput) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Widget> ws;
    const int n = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      ws.push_back(make_nontext(2 * i, {100, 100 + 140 * i, 196, 196 + 140 * i}));
      ws.push_back(make_text(2 * i + 1, {230, 130 + 140 * i, 230 + 100 + static_cast<int>(rng() % 300), 166 + 140 * i}, "t"));
    }
    const auto res = group_widgets(ws, 1440, {});
    const auto tokens = serialize(res.hierarchy);
    EXPECT_TRUE(balanced(tokens));
    EXPECT_EQ(static_cast<std::size_t>(std::count(tokens.begin(), tokens.end(), 't') +
                                       std::count(tokens.begin(), tokens.end(), 'n')),
              ws.size());
  }
}
