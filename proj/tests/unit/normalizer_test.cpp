#include "pathmark/normalizer.hpp"

#include <gtest/gtest.h>

#include <cctype>
#include <fstream>

#include "../support/oracles.hpp"

namespace pathmark {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, PaperExample) {
  EXPECT_EQ(tokenize("Waiting to pick up"), (Tokens{"waiting", "to", "pick", "up"}));
}

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

// Camel-case boundaries applied by hand: a capital after a lowercase letter
// or digit starts a token, as does the last capital of an acronym run.
Tokens hand_camel(const std::string& s) {
  Tokens out;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (!std::isalnum(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      continue;
    }
    bool up = std::isupper(static_cast<unsigned char>(c)) != 0;
    if (up && !cur.empty()) {
      char prev = s[i - 1];
      bool next_lower = i + 1 < s.size() && std::islower(static_cast<unsigned char>(s[i + 1]));
      if (std::islower(static_cast<unsigned char>(prev)) || std::isdigit(static_cast<unsigned char>(prev)) ||
          (std::isupper(static_cast<unsigned char>(prev)) && next_lower)) {
        out.push_back(cur);
        cur.clear();
      }
    }
    cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

TEST(Tokenize, CamelCase) {
  EXPECT_EQ(tokenize("PseudoState"), (Tokens{"pseudo", "state"}));
  for (std::string s : {"PseudoState", "XMLParser", "eStructuralFeatures", "getHTTP2Response", "a_b-c.d",
                        "already lower", "ABC", "x1Y"}) {
    EXPECT_EQ(tokenize(s), hand_camel(s)) << s;
  }
}

TEST(Tokenize, CamelSplitCanBeDisabled) {
  TokenizerConfig cfg;
  cfg.split_camel_case = false;
  EXPECT_EQ(tokenize("PseudoState", cfg), (Tokens{"pseudostate"}));
  cfg.splitter = Splitter::whitespace;
  EXPECT_EQ(tokenize("a-b c", cfg), (Tokens{"a-b", "c"}));
}

TEST(TokenizerConfig, IdRoundTrip) {
  TokenizerConfig cfg;
  EXPECT_EQ(cfg.id(), "lc+camel+punct/en-v1");
  EXPECT_EQ(TokenizerConfig::from_id(cfg.id()).id(), cfg.id());
  cfg.split_camel_case = false;
  cfg.splitter = Splitter::whitespace;
  EXPECT_EQ(TokenizerConfig::from_id(cfg.id()).id(), cfg.id());
  EXPECT_THROW(TokenizerConfig::from_id("garbage"), ParseError);
}

TEST(StopWords, BuiltinList) {
  const auto& list = StopWordList::builtin("en-v1");
  EXPECT_EQ(list.size(), 179u);
  EXPECT_TRUE(list.contains("to"));
  EXPECT_TRUE(list.contains("up"));
  EXPECT_FALSE(list.contains("pick"));
  EXPECT_THROW(StopWordList::builtin("xx"), NotFoundError);
}

TEST(RemoveStopwords, Examples) {
  const auto& list = StopWordList::builtin("en-v1");
  EXPECT_EQ(remove_stopwords({"waiting", "to", "pick", "up"}, list), (Tokens{"waiting", "pick"}));
  EXPECT_TRUE(remove_stopwords({}, list).empty());
  EXPECT_TRUE(remove_stopwords({"the", "a", "of"}, list).empty());
}

TEST(Stem, Examples) {
  EXPECT_EQ(stem("waiting"), "wait");
  EXPECT_EQ(stem("wait"), "wait");
  EXPECT_EQ(stem("caresses"), "caress");
  EXPECT_EQ(stem("ponies"), "poni");
  EXPECT_EQ(stem("relational"), "relat");
  EXPECT_EQ(stem("Mixed"), "Mixed");
  EXPECT_EQ(stem("x2"), "x2");
}

TEST(Stem, PublishedVocabulary) {
  std::ifstream voc(std::string(PATHMARK_TEST_DATA) + "/porter/voc.txt");
  std::ifstream out(std::string(PATHMARK_TEST_DATA) + "/porter/output.txt");
  ASSERT_TRUE(voc && out);
  std::string w, s;
  std::size_t n = 0;
  while (std::getline(voc, w) && std::getline(out, s)) {
    if (w.empty()) continue;
    ASSERT_EQ(stem(w), s) << w;
    ++n;
  }
  EXPECT_GE(n, 23000u);
}

TEST(NormalizeBop, PaperExample) {
  BagOfPaths in;
  in.add(PathString::of({"@Waiting to pick up", "name", "State"}));
  BagOfPaths want;
  want.add(PathString::of({"@wait", "name", "State"}));
  want.add(PathString::of({"@pick", "name", "State"}));
  EXPECT_EQ(normalize_bop(in), want);
}

TEST(NormalizeBop, ClassOnlyPathUnchanged) {
  BagOfPaths in;
  in.add(PathString::of({"Region"}), 2);
  EXPECT_EQ(normalize_bop(in), in);
}

TEST(NormalizeBop, CartesianProduct) {
  BagOfPaths in;
  in.add(PathString::of({"@Big Dog", "name", "A", "name", "@Red Cat"}));
  auto out = normalize_bop(in);
  EXPECT_EQ(out.distinct(), 4u);
  for (const char* a : {"big", "dog"}) {
    for (const char* b : {"red", "cat"}) {
      EXPECT_EQ(out.count(PathString::of({std::string("@") + a, "name", "A", "name", std::string("@") + b})), 1u);
    }
  }
}

TEST(NormalizeBop, StopWordOnlyLabelDropsPath) {
  BagOfPaths in;
  in.add(PathString::of({"@the", "name", "A"}));
  in.add(PathString::of({"A"}));
  auto out = normalize_bop(in);
  EXPECT_EQ(out.total(), 1u);
}

TEST(NormalizeBop, ReplicaCap) {
  std::string a, b;
  for (int i = 0; i < 20; ++i) a += "alpha" + std::string(1, static_cast<char>('a' + i)) + "x ";
  for (int i = 0; i < 10; ++i) b += "beta" + std::string(1, static_cast<char>('a' + i)) + "x ";
  BagOfPaths in;
  in.add(PathString::of({"@" + a, "n", "A", "m", "@" + b}));
  auto out = normalize_bop(in);
  EXPECT_LE(out.distinct(), kMaxPathReplicas);
  EXPECT_GE(out.distinct(), kMaxPathReplicas / 2);
}

TEST(NormalizeBop, Properties) {
  Rng rng(19);
  testing::RandomModelOptions opt;
  opt.max_objects = 8;
  Normalizer norm;
  for (int i = 0; i < 200; ++i) {
    auto bop = model_to_bop(testing::random_model(rng, opt));
    auto out = norm.normalize_bop(bop);
    // Idempotent.
    ASSERT_EQ(norm.normalize_bop(out), out);
    // Total equals the sum of per-path token products.
    std::uint64_t expected = 0;
    for (const auto& [p, n] : bop) {
      std::uint64_t prod = 1;
      for (std::size_t v = 0; v < p.kinds.size(); ++v) {
        if (p.kinds[v] == VertexKind::attribute) prod *= norm.normalize_label(p.labels[2 * v]).size();
      }
      expected += n * prod;
    }
    ASSERT_EQ(out.total(), expected);
    // Class and edge labels are untouched.
    std::set<std::string> structural_in, structural_out;
    for (const auto& [p, n] : bop) {
      for (std::size_t j = 0; j < p.labels.size(); ++j) {
        if (j % 2 == 1 || p.kinds[j / 2] == VertexKind::object_class) structural_in.insert(p.labels[j]);
      }
    }
    for (const auto& [p, n] : out) {
      for (std::size_t j = 0; j < p.labels.size(); ++j) {
        if (j % 2 == 1 || p.kinds[j / 2] == VertexKind::object_class) {
          ASSERT_TRUE(structural_in.contains(p.labels[j])) << p.labels[j];
        }
      }
    }
  }
}

TEST(ComputeStopPaths, Boundaries) {
  SplitKey k{"(x", ")"};
  EXPECT_TRUE(compute_stop_paths({{k, 7}}, 10, 0.7).contains(k));
  EXPECT_FALSE(compute_stop_paths({{k, 6}}, 10, 0.7).contains(k));
  EXPECT_TRUE(compute_stop_paths({{k, 6}}, 0, 0.7).paths.empty());
  EXPECT_THROW(compute_stop_paths({}, 10, 0.0), ContractError);
}

TEST(FilterStopPaths, Examples) {
  BagOfPaths bop;
  auto p = PathString::of({"@initial", "kind", "PseudoState"});
  bop.add(p, 3);
  bop.add(PathString::of({"Region"}));
  EXPECT_EQ(filter_stop_paths(bop, {}), bop);
  StopPathSet s;
  s.paths.insert(split_path(p));
  auto out = filter_stop_paths(bop, s);
  EXPECT_EQ(out.total(), bop.total() - 3);
  s.paths.insert(split_path(PathString::of({"Region"})));
  EXPECT_TRUE(filter_stop_paths(bop, s).empty());
}

TEST(StopPathSet, SerializationRoundTrip) {
  StopPathSet s;
  s.threshold = 0.7;
  s.corpus_size = 20;
  s.paths.insert({"(initial,kind,PseudoState", ")"});
  s.paths.insert({"(Region", ",x,\\,y)"});
  auto back = deserialize_stop_paths(serialize_stop_paths(s));
  EXPECT_EQ(back.paths, s.paths);
  EXPECT_EQ(back.threshold, s.threshold);
  EXPECT_EQ(back.corpus_size, 20u);
  EXPECT_THROW(deserialize_stop_paths("nope"), ParseError);
}

}  // namespace
}  // namespace pathmark
