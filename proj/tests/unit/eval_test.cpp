#include "pathmark/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace pathmark {
namespace {

std::size_t count_class(const Model& m, std::string_view cls) {
  std::size_t n = 0;
  for (const auto& o : m.objects) n += o.class_name == cls ? 1 : 0;
  return n;
}

// A chain C00 -> C01 -> ... -> C21 of references, two attributes per class,
// plus one class nothing connects to.
Model chain_model(std::size_t length = 22) {
  Model m;
  m.model_type = "ecore";
  ModelObject pkg{"pkg", "EPackage", {}, {}};
  pkg.add_attribute("name", "chain");
  std::vector<ModelObject> rest;
  auto add_class = [&](const std::string& id, const std::string& name) {
    ModelObject c{id, "EClass", {}, {}};
    c.add_attribute("name", name);
    pkg.add_reference("eClassifiers", id);
    for (int a = 0; a < 2; ++a) {
      ModelObject f{id + ".a" + std::to_string(a), "EAttribute", {}, {}};
      f.add_attribute("name", name + "Value" + std::to_string(a));
      c.add_reference("eStructuralFeatures", f.id);
      rest.push_back(std::move(f));
    }
    return c;
  };
  std::vector<ModelObject> classes;
  for (std::size_t i = 0; i < length; ++i) {
    char name[8];
    std::snprintf(name, sizeof name, "C%02zu", i);
    classes.push_back(add_class("c" + std::to_string(i), name));
    if (i + 1 < length) {
      ModelObject r{"c" + std::to_string(i) + ".r", "EReference", {}, {}};
      r.add_attribute("name", std::string("next") + name);
      r.add_reference("eType", "c" + std::to_string(i + 1));
      classes.back().add_reference("eStructuralFeatures", r.id);
      rest.push_back(std::move(r));
    }
  }
  classes.push_back(add_class("lonely", "Zed"));
  m.objects.push_back(std::move(pkg));
  for (auto& c : classes) m.objects.push_back(std::move(c));
  for (auto& f : rest) m.objects.push_back(std::move(f));
  return m;
}

MutationConfig quiet_config() {
  MutationConfig cfg;
  cfg.radius = kUnboundedRadius;
  cfg.inheritance_rate = cfg.class_rate = cfg.reference_rate = cfg.enum_rate = cfg.attribute_rate =
      cfg.rename_rate = 0;
  cfg.low_df_ceiling = 0;
  return cfg;
}

TEST(Synth, EcoreCorpusIsValidAndDeterministic) {
  EcoreCorpusOptions opt;
  opt.models = 40;
  auto a = generate_ecore_corpus(opt);
  auto b = generate_ecore_corpus(opt);
  ASSERT_EQ(a.size(), 40u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(validate_model(a[i].model).valid()) << a[i].id << validate_model(a[i].model).summary();
    EXPECT_EQ(a[i].model, b[i].model);
    EXPECT_EQ(a[i].label, ecore_domains()[i % 12]);
    EXPECT_GE(count_class(a[i].model, "EClass"), 3u);
    ids.insert(a[i].id);
  }
  EXPECT_EQ(ids.size(), a.size());
  opt.seed = 7;
  EXPECT_NE(generate_ecore_corpus(opt)[0].model, a[0].model);
}

TEST(Synth, StateMachinesAreValid) {
  for (const auto& sm : generate_state_machines(20, 3)) {
    EXPECT_TRUE(validate_model(sm.model).valid()) << sm.id;
    EXPECT_EQ(count_class(sm.model, "Region"), 1u);
  }
}

TEST(Synth, ElementCount) {
  auto m = chain_model();
  EXPECT_EQ(element_count(m), 23u + 46u + 21u);
  Model plain;
  plain.model_type = "toy";
  plain.objects = {{"a", "Node", {}, {}}, {"b", "Node", {}, {}}};
  EXPECT_EQ(element_count(plain), 2u);
  EXPECT_EQ(size_bucket(19), SizeBucket::small);
  EXPECT_EQ(size_bucket(20), SizeBucket::medium);
  EXPECT_EQ(size_bucket(70), SizeBucket::medium);
  EXPECT_EQ(size_bucket(71), SizeBucket::large);
}

TEST(Mutate, QuietConfigKeepsRootComponentAndRenamesPackages) {
  auto input = chain_model();
  auto mutant = mutate(input, "chain", quiet_config(), {});
  Model expected = input;
  std::erase_if(expected.objects, [](const ModelObject& o) { return o.id == "lonely" || o.id.starts_with("lonely."); });
  for (auto& o : expected.objects) {
    if (o.id == "pkg") {
      o.attributes[0].second = {"pkg0"};
      std::erase(o.references[0].second, "lonely");
    }
  }
  EXPECT_EQ(mutant.query, expected);
  EXPECT_EQ(mutant.log.size(), 8u);
  EXPECT_EQ(mutant.origin, "chain");
}

TEST(Mutate, RadiusFollowsReferencesFromRoot) {
  auto cfg = quiet_config();
  cfg.radius = 3;
  auto mutant = mutate(chain_model(), "chain", cfg, {});
  std::set<std::string> names;
  for (const auto& o : mutant.query.objects) {
    if (o.class_name == "EClass") names.insert(o.attribute("name")->front());
  }
  EXPECT_EQ(names, (std::set<std::string>{"C00", "C01", "C02", "C03"}));
  // The reference out of C03 lost its target and went with it.
  EXPECT_EQ(count_class(mutant.query, "EReference"), 3u);
  EXPECT_TRUE(validate_model(mutant.query).valid());
}

TEST(Mutate, RejectsSmallModelsAndPoorMutants) {
  try {
    mutate(chain_model(10), "c", MutationConfig{}, {});
    FAIL();
  } catch (const MutationRejected& e) {
    EXPECT_EQ(e.reason(), MutationRejected::Reason::too_small);
  }
  auto cfg = quiet_config();
  cfg.radius = 1;  // two classes survive
  try {
    mutate(chain_model(), "c", cfg, {});
    FAIL();
  } catch (const MutationRejected& e) {
    EXPECT_EQ(e.reason(), MutationRejected::Reason::discarded);
  }
  MutationConfig bad;
  bad.inheritance_rate = 0.25;
  EXPECT_THROW(mutate(chain_model(), "c", bad, {}), ContractError);
}

TEST(Mutate, RareNamesAndClusterRenames) {
  auto cfg = quiet_config();
  cfg.low_df_ceiling = 2;
  MutationContext ctx;
  ctx.name_df["c05value0"] = 1;
  ctx.name_df["c06value0"] = 3;
  auto mutant = mutate(chain_model(), "c", cfg, ctx);
  std::set<std::string> names;
  for (const auto& o : mutant.query.objects) names.insert(o.attribute("name")->front());
  EXPECT_FALSE(names.contains("C05Value0"));
  EXPECT_TRUE(names.contains("C06Value0"));

  cfg = quiet_config();
  cfg.rename_rate = 0.3;
  ctx = {};
  ctx.rename_pool["EClass"] = {"Borrowed"};
  std::size_t renamed = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    for (const auto& o : mutate(chain_model(), "c", cfg, ctx).query.objects) {
      renamed += o.attribute("name")->front() == "Borrowed" ? 1 : 0;
    }
  }
  EXPECT_GT(renamed, 0u);
}

TEST(Mutate, GeneratedMutantsAreDeterministicAndShrink) {
  EcoreCorpusOptions opt;
  opt.models = 60;
  auto corpus = generate_ecore_corpus(opt);
  auto a = generate_mutants(corpus, {5, 6, 7}, {}, 9);
  auto b = generate_mutants(corpus, {5, 6, 7}, {}, 9);
  ASSERT_FALSE(a.mutants.empty());
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.mutants.size() + a.too_small + a.discarded, corpus.size() * 3);
  EXPECT_NE(generate_mutants(corpus, {5, 6, 7}, {}, 10).digest(), a.digest());
  std::map<std::string, const Model*> by_id;
  for (const auto& cm : corpus) by_id[cm.id] = &cm.model;
  for (const auto& m : a.mutants) {
    EXPECT_EQ(m.log.size(), 8u);
    EXPECT_TRUE(validate_model(m.query).valid()) << m.id;
    const auto classes = count_class(m.query, "EClass");
    EXPECT_GE(classes, 3u);
    EXPECT_GE(2 * count_class(m.query, "EReference"), classes);
    EXPECT_LE(m.query.objects.size(), by_id.at(m.origin)->objects.size());
  }
}

std::vector<CorpusModel> named_corpus(const std::vector<std::vector<std::string>>& docs) {
  std::vector<CorpusModel> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Model m;
    m.model_type = "ecore";
    for (std::size_t j = 0; j < docs[i].size(); ++j) {
      ModelObject o{"o" + std::to_string(j), "EClass", {}, {}};
      o.add_attribute("name", docs[i][j]);
      m.objects.push_back(std::move(o));
    }
    out.push_back({"d" + std::to_string(i), "", std::move(m)});
  }
  return out;
}

TEST(ClusterNames, TrivialCounts) {
  auto corpus = named_corpus({{"Book"}, {"Author"}, {"Shelf"}, {"Train"}, {"Station"}});
  auto single = cluster_names(corpus, 5, 1);
  std::set<std::size_t> distinct;
  for (const auto& kv : single) distinct.insert(kv.second);
  EXPECT_EQ(distinct.size(), 5u);
  for (const auto& kv : cluster_names(corpus, 1, 1)) EXPECT_EQ(kv.second, 0u);
  EXPECT_THROW(cluster_names(corpus, 6, 1), ContractError);
  EXPECT_THROW(cluster_names({}, 1, 1), ContractError);
  EXPECT_EQ(default_cluster_count(40), 5u);
  EXPECT_EQ(default_cluster_count(500), 25u);
  EXPECT_EQ(default_cluster_count(3), 3u);
}

TEST(ClusterNames, SeparatesDisjointFamilies) {
  auto corpus = named_corpus({{"Book", "Author", "Loan"},
                              {"Book", "Shelf"},
                              {"Author", "Shelf", "Loan"},
                              {"Train", "Station"},
                              {"Station", "Track", "Signal"},
                              {"Train", "Track"}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = cluster_names(corpus, 2, seed);
    EXPECT_EQ(c["d0"], c["d1"]);
    EXPECT_EQ(c["d0"], c["d2"]);
    EXPECT_EQ(c["d3"], c["d4"]);
    EXPECT_EQ(c["d3"], c["d5"]);
    EXPECT_NE(c["d0"], c["d3"]);
    EXPECT_EQ(cluster_names(corpus, 2, seed), c);
  }
}

QueryMutant fake_mutant(const std::string& origin) {
  QueryMutant m;
  m.id = origin + "@q";
  m.origin = origin;
  return m;
}

TEST(EvaluateMrr, ArithmeticAndHistogram) {
  std::vector<QueryMutant> qs{fake_mutant("a"), fake_mutant("b"), fake_mutant("c"), fake_mutant("d")};
  std::map<std::string, std::vector<std::string>> lists{
      {"a", {"a", "x"}}, {"b", {"b"}}, {"c", {"x", "c"}}, {"d", {"x", "y", "z", "d"}}};
  // The fake engine reads the origin from the query's model type.
  std::vector<QueryMutant> tagged = qs;
  for (auto& q : tagged) q.query.model_type = q.origin;
  QueryEngine engine = [&](const Model& q, std::size_t) {
    std::vector<ScoredResult> out;
    for (const auto& id : lists.at(q.model_type)) out.push_back({id, 1.0, {}});
    return out;
  };
  auto r = evaluate_mrr(tagged, engine, "fake", 3);
  EXPECT_DOUBLE_EQ(r.mrr, 0.6875);
  EXPECT_EQ(r.histogram, (std::array<std::size_t, 6>{2, 1, 0, 1, 0, 0}));
  EXPECT_EQ(r.ranks[3].rank, 4u);

  // Shuffling results below the origin changes nothing.
  lists["c"] = {"x", "c", "z", "y", "w"};
  EXPECT_DOUBLE_EQ(evaluate_mrr(tagged, engine, "fake").mrr, 0.6875);

  auto empty = evaluate_mrr(tagged, [](const Model&, std::size_t) { return std::vector<ScoredResult>{}; }, "none");
  EXPECT_DOUBLE_EQ(empty.mrr, 0.0);
  EXPECT_EQ(empty.histogram[5], 4u);
  auto first = evaluate_mrr(
      tagged, [](const Model& q, std::size_t) { return std::vector<ScoredResult>{{q.model_type, 1.0, {}}}; }, "oracle");
  EXPECT_DOUBLE_EQ(first.mrr, 1.0);
  EXPECT_NE(r.to_json().find("\"mrr\": 0.6875"), std::string::npos);
  EXPECT_EQ(r.to_csv().substr(0, r.to_csv().find('\n')), "query,origin,rank,reciprocal_rank");
}

TEST(TextBaseline, HandComputedBm25) {
  auto corpus = named_corpus({{"Book Author"}, {"Book"}, {"Shelf"}});
  TextBaseline text(corpus);
  auto query = named_corpus({{"books"}})[0].model;
  auto r = text.search(query, 0);
  ASSERT_EQ(r.size(), 2u);
  // avdl = 4/3, t = 3, df(book) = 2.
  const double idf = std::log(4.0 / 2.0);
  const double d1 = 1.1 / (1.0 + 0.1 * (0.25 + 0.75 * 2.0 / (4.0 / 3.0))) * idf;
  const double d2 = 1.1 / (1.0 + 0.1 * (0.25 + 0.75 * 1.0 / (4.0 / 3.0))) * idf;
  EXPECT_EQ(r[0].model_id, "d1");
  EXPECT_NEAR(r[0].score, d2, 1e-12);
  EXPECT_EQ(r[1].model_id, "d0");
  EXPECT_NEAR(r[1].score, d1, 1e-12);

  EXPECT_TRUE(text.search(named_corpus({{"Locomotive"}})[0].model, 0).empty());
  EXPECT_EQ(text.search(corpus[2].model, 0)[0].model_id, "d2");
}

TEST(BenchmarkLatency, RowsAndPhases) {
  EcoreCorpusOptions opt;
  opt.models = 30;
  auto corpus = generate_ecore_corpus(opt);
  std::vector<Model> queries;
  for (std::size_t i = 0; i < corpus.size(); i += 3) queries.push_back(corpus[i].model);
  auto report = benchmark_latency(corpus, {10, 20, 30}, queries, std::make_shared<MemoryStore>());
  ASSERT_EQ(report.rows.size(), 9u);
  std::size_t previous = 0;
  for (std::size_t i = 0; i < report.rows.size(); i += 3) {
    EXPECT_GT(report.rows[i].index_size, previous);
    previous = report.rows[i].index_size;
  }
  for (const auto& row : report.rows) {
    EXPECT_LE(row.paths.mean_ms + row.get.mean_ms + row.score.mean_ms, row.total.mean_ms + 1e-9);
  }
  std::size_t n = 0;
  for (const auto& row : report.rows) n += row.index_size == 30 ? row.queries : 0;
  EXPECT_EQ(n, queries.size());
  const auto csv = report.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 9 * 4);
  EXPECT_THROW(benchmark_latency(corpus, {20, 10}, queries, std::make_shared<MemoryStore>()), ContractError);
}

}  // namespace
}  // namespace pathmark
