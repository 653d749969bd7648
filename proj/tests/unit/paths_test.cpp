#include "pathmark/paths.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "../support/oracles.hpp"

namespace pathmark {
namespace {

Model fixture_model(const std::string& name) {
  std::ifstream in(std::string(PATHMARK_TEST_DATA) + "/fixtures/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

Model one_object(std::string cls, FeatureList attrs = {}) {
  Model m;
  m.model_type = "t";
  m.objects.push_back({"o", std::move(cls), std::move(attrs), {}});
  return m;
}

TEST(BuildGraph, AttributeEdgesBothWays) {
  auto g = build_graph(one_object("State", {{"name", {"Talking"}}}));
  ASSERT_EQ(g.vertices.size(), 2u);
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.vertices[0].kind, VertexKind::object_class);
  EXPECT_EQ(g.vertices[1].kind, VertexKind::attribute);
  EXPECT_EQ(g.edges[0].label, "name");
  EXPECT_EQ(g.edges[0].source, g.edges[1].target);
  EXPECT_EQ(g.edges[0].target, g.edges[1].source);
}

TEST(BuildGraph, EmptyModel) {
  Model m;
  m.model_type = "t";
  auto g = build_graph(m);
  EXPECT_TRUE(g.vertices.empty());
  EXPECT_TRUE(g.edges.empty());
}

TEST(BuildGraph, ReferenceEdgeKeepsDirection) {
  Model m;
  m.model_type = "t";
  m.objects.push_back({"t", "Transition", {}, {{"source", {"s"}}}});
  m.objects.push_back({"s", "State", {}, {}});
  auto g = build_graph(m);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.vertices[g.edges[0].source].label, "Transition");
  EXPECT_EQ(g.vertices[g.edges[0].target].label, "State");
  EXPECT_EQ(g.edges[0].kind, EdgeKind::reference);
}

TEST(BuildGraph, FilterExcludesNames) {
  Model m = fixture_model("statemachine.json");
  FilterConfig cfg;
  cfg.excluded_classes.insert("PseudoState");
  cfg.excluded_attributes.insert("kind");
  cfg.excluded_references.insert("container");
  auto g = build_graph(m, cfg);
  for (const auto& v : g.vertices) EXPECT_NE(v.label, "PseudoState");
  for (const auto& e : g.edges) {
    EXPECT_NE(e.label, "kind");
    EXPECT_NE(e.label, "container");
  }
}

TEST(ExtractPaths, RunningExampleForms) {
  auto bop = model_to_bop(fixture_model("statemachine.json"));
  EXPECT_EQ(bop.count(PathString::of({"Region"})), 1u);
  EXPECT_EQ(bop.count(PathString::of({"@initial", "kind", "PseudoState"})), 1u);
  EXPECT_EQ(bop.count(PathString::of({"@Phone call", "name", "StateMachine"})), 1u);
  EXPECT_EQ(bop.count(PathString::of({"@answer call", "name", "Transition", "kind", "@external"})), 1u);
  EXPECT_EQ(bop.count(PathString::of({"@Phone call", "name", "StateMachine", "region", "Region"})), 1u);
  EXPECT_EQ(bop.count(PathString::of({"@answer call", "name", "Transition", "target", "State", "name",
                                      "@Talking"})),
            1u);
  // Region is the only attribute-less class.
  std::size_t singletons = 0;
  for (const auto& [p, n] : bop) singletons += p.length() == 0 ? n : 0;
  EXPECT_EQ(singletons, 1u);
}

TEST(ModelToBop, Empty) {
  Model m;
  m.model_type = "t";
  auto bop = model_to_bop(m);
  EXPECT_TRUE(bop.empty());
  EXPECT_EQ(bop.total(), 0u);
}

TEST(ModelToBop, SingleAttributelessObject) {
  auto bop = model_to_bop(one_object("Region"));
  EXPECT_EQ(bop.total(), 1u);
  EXPECT_EQ(bop.count(PathString::of({"Region"})), 1u);
}

TEST(ModelToBop, QueryContainsLongPath) {
  auto bop = model_to_bop(fixture_model("running_query.json"));
  EXPECT_EQ(bop.count(PathString::of({"@answer call", "name", "Transition", "target", "State", "name",
                                      "@Talking"})),
            1u);
}

TEST(ModelToBop, AttributelessClassPairLengthOne) {
  Model m;
  m.model_type = "t";
  m.objects.push_back({"r", "Region", {}, {{"transition", {"t"}}}});
  m.objects.push_back({"t", "Transition", {}, {}});
  auto bop = model_to_bop(m);
  EXPECT_EQ(bop.count(PathString::of({"Region", "transition", "Transition"})), 1u);
}

TEST(ModelToBop, RepeatedValuesAccumulate) {
  auto bop = model_to_bop(one_object("A", {{"name", {"a", "a"}}}));
  EXPECT_EQ(bop.count(PathString::of({"@a", "name", "A"})), 2u);
  EXPECT_EQ(bop.count(PathString::of({"@a", "name", "A", "name", "@a"})), 2u);
}

TEST(ExtractPaths, ThreeVertexToyMatchesOracle) {
  auto m = one_object("A", {{"x", {"1"}}, {"y", {"2"}}});
  auto g = build_graph(m);
  EXPECT_EQ(extract_paths(g), testing::enumerate_paths(g, 4));
}

TEST(ExtractPaths, SmallGraphsMatchOracle) {
  Rng rng(7);
  testing::RandomModelOptions opt;
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    auto m = testing::random_model(rng, opt);
    auto g = build_graph(m);
    if (g.vertices.size() > 8) continue;
    for (int len = 1; len <= 4; ++len) {
      FilterConfig cfg;
      cfg.max_path_length = len;
      ASSERT_EQ(extract_paths(g, cfg), testing::enumerate_paths(g, len)) << serialize_model_json(m);
    }
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(ExtractPaths, Invariants) {
  Rng rng(11);
  testing::RandomModelOptions opt;
  opt.max_objects = 12;
  for (int i = 0; i < 100; ++i) {
    auto m = testing::random_model(rng, opt);
    auto g = build_graph(m);
    BagOfPaths previous;
    for (int len = 1; len <= 4; ++len) {
      FilterConfig cfg;
      cfg.max_path_length = len;
      auto bop = extract_paths(g, cfg);
      std::uint64_t sum = 0;
      for (const auto& [p, n] : bop) {
        sum += n;
        ASSERT_TRUE(p.well_formed());
        ASSERT_LE(p.length(), static_cast<std::size_t>(len));
        for (std::size_t v = 1; v + 1 < p.kinds.size(); ++v) {
          ASSERT_EQ(p.kinds[v], VertexKind::object_class) << p.to_string();
        }
        // Monotone in the length threshold.
        ASSERT_GE(n, previous.count(p));
      }
      ASSERT_EQ(sum, bop.total());
      for (const auto& [p, n] : previous) ASSERT_GE(bop.count(p), n);
      previous = std::move(bop);
    }
    // Object order does not matter.
    auto shuffled = m;
    rng.shuffle(shuffled.objects);
    ASSERT_EQ(model_to_bop(shuffled), model_to_bop(m));
  }
}

TEST(FilterConfig, RejectsZeroLength) {
  FilterConfig cfg;
  cfg.max_path_length = 0;
  EXPECT_THROW(cfg.check(), ContractError);
}

TEST(BagOfPaths, EraseUpdatesTotal) {
  BagOfPaths bop;
  auto p = PathString::of({"A"});
  bop.add(p, 3);
  bop.add(PathString::of({"B"}));
  EXPECT_EQ(bop.erase(p), 3u);
  EXPECT_EQ(bop.total(), 1u);
}

}  // namespace
}  // namespace pathmark
