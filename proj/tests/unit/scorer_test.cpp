#include "pathmark/scorer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "../support/oracles.hpp"

namespace pathmark {
namespace {

TEST(Bm25Term, HandValue) {
  // The length factor cancels when the model length equals avdl.
  EXPECT_NEAR(bm25_term(1, 1, 10, 10.0, 1, 1), 0.693147180559945, 1e-12);
}

TEST(Bm25Term, PathInEveryModelStillPositive) {
  EXPECT_GT(bm25_term(1, 1, 5, 5.0, 9, 9), 0.0);
  EXPECT_NEAR(bm25_term(1, 1, 5, 5.0, 9, 9), 1.1 / 1.1 * std::log(10.0 / 9.0), 1e-15);
}

TEST(Bm25Term, SaturatesInModelCount) {
  const double limit = 2 * 1.1 * std::log(11.0 / 3.0);
  double previous = 0;
  for (std::uint64_t c = 1; c <= 1000000; c *= 10) {
    double v = bm25_term(2, c, 50, 40.0, 10, 3);
    EXPECT_GT(v, previous);
    EXPECT_LT(v, limit);
    previous = v;
  }
  EXPECT_NEAR(previous, limit, 1e-6);
}

TEST(Bm25Term, Preconditions) {
  EXPECT_THROW(bm25_term(0, 1, 1, 1.0, 1, 1), ContractError);
  EXPECT_THROW(bm25_term(1, 0, 1, 1.0, 1, 1), ContractError);
  EXPECT_THROW(bm25_term(1, 1, 1, 1.0, 1, 0), ContractError);
  EXPECT_THROW(bm25_term(1, 1, 1, 1.0, 1, 2), ContractError);
  EXPECT_THROW(bm25_term(1, 1, 1, 0.0, 1, 1), ContractError);
  ScoringParams bad;
  bad.b = 1.5;
  EXPECT_THROW(bad.check(), ContractError);
}

struct Fixture {
  std::shared_ptr<MemoryStore> store = std::make_shared<MemoryStore>();
  InvertedIndex index{store, "toy"};
  std::vector<CorpusEntry> corpus;

  explicit Fixture(std::uint64_t seed, int models = 30, std::size_t max_objects = 10) {
    Rng rng(seed);
    testing::RandomModelOptions opt;
    opt.max_objects = max_objects;
    Normalizer norm;
    std::vector<InvertedIndex::Entry> batch;
    for (int i = 0; i < models; ++i) {
      auto bop = norm.normalize_bop(model_to_bop(testing::random_model(rng, opt)));
      corpus.push_back({"m" + std::to_string(i), bop});
      batch.push_back({corpus.back().id, bop, {}, ""});
    }
    index.index_batch(std::move(batch));
  }
};

void expect_same(const std::vector<ScoredResult>& a, const std::vector<ScoredResult>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].model_id, b[i].model_id) << "rank " << i;
    ASSERT_LE(std::abs(a[i].score - b[i].score), 1e-9 * std::abs(b[i].score));
  }
}

TEST(ScoreQuery, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Fixture f(seed);
    auto reader = f.index.reader();
    for (const auto& q : f.corpus) {
      auto got = score_query(reader, q.bop);
      auto want = brute_force_score(q.bop, f.corpus);
      expect_same(got, want);
    }
  }
}

TEST(ScoreQuery, OneGetPerDistinctRow) {
  Fixture f(4);
  const auto& q = f.corpus[3].bop;
  std::set<std::string> rows;
  for (const auto& [p, n] : q) rows.insert(split_path(p).row);
  auto reader = f.index.reader();
  auto before = f.store->get_count();
  QueryTimings tm;
  score_query(reader, q, {}, 0, false, &tm);
  EXPECT_EQ(f.store->get_count() - before, rows.size());
  EXPECT_EQ(tm.gets, rows.size());
}

TEST(ScoreQuery, EmptyAndNonMatching) {
  Fixture f(5, 5);
  auto reader = f.index.reader();
  EXPECT_TRUE(score_query(reader, BagOfPaths{}).empty());
  BagOfPaths q;
  q.add(PathString::of({"@nowhere", "name", "Nothing"}));
  EXPECT_TRUE(score_query(reader, q).empty());
}

TEST(ScoreQuery, OrderingAndTruncation) {
  Fixture f(6);
  auto reader = f.index.reader();
  auto all = score_query(reader, f.corpus[0].bop);
  ASSERT_GT(all.size(), 3u);
  for (std::size_t i = 1; i < all.size(); ++i) {
    ASSERT_TRUE(all[i - 1].score > all[i].score ||
                (all[i - 1].score == all[i].score && all[i - 1].model_id < all[i].model_id));
    ASSERT_GT(all[i].score, 0.0);
  }
  auto top = score_query(reader, f.corpus[0].bop, {}, 3);
  ASSERT_EQ(top.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(top[i].model_id, all[i].model_id);
}

TEST(ScoreQuery, ExplanationsSumToScore) {
  Fixture f(8);
  auto reader = f.index.reader();
  for (const auto& r : score_query(reader, f.corpus[2].bop, {}, 0, true)) {
    double sum = 0;
    for (const auto& m : r.matched_paths) sum += m.contribution;
    EXPECT_NEAR(sum, r.score, 1e-9 * r.score);
  }
}

TEST(ScoreQuery, SelfRetrieval) {
  Fixture f(9);
  auto reader = f.index.reader();
  for (const auto& q : f.corpus) {
    if (q.bop.empty()) continue;
    auto res = score_query(reader, q.bop);
    ASSERT_FALSE(res.empty());
    double self = 0;
    for (const auto& r : res) {
      if (r.model_id == q.id) self = r.score;
    }
    for (const auto& r : res) {
      const auto& other = *std::find_if(f.corpus.begin(), f.corpus.end(),
                                        [&](const CorpusEntry& c) { return c.id == r.model_id; });
      if (other.bop != q.bop) {
        EXPECT_LE(r.score, self * (1 + 1e-12)) << q.id << " vs " << r.model_id;
      }
    }
  }
}

TEST(BruteForce, MonotoneInModelCount) {
  // With df and avdl held fixed, one more occurrence never lowers a term.
  for (std::uint64_t c = 1; c < 50; ++c) {
    EXPECT_GE(bm25_term(1, c + 1, 30, 25.0, 10, 4), bm25_term(1, c, 30, 25.0, 10, 4));
  }
}

TEST(BruteForce, TrivialCases) {
  BagOfPaths q;
  q.add(PathString::of({"Region"}));
  EXPECT_TRUE(brute_force_score(q, {}).empty());
  auto res = brute_force_score(q, {{"only", q}});
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].model_id, "only");
}

TEST(Engines, AgreeOnFixture) {
  Fixture f(12);
  IndexEngine mar(f.index);
  BruteForceEngine brute(f.corpus);
  for (const auto& q : f.corpus) expect_same(mar.search(q.bop, 5), brute.search(q.bop, 5));
}

}  // namespace
}  // namespace pathmark
