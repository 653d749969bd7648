#include "pathmark/scorer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <unordered_map>

namespace pathmark {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Query bag regrouped by storage key, keeping one representative path for
// explanations.
struct QueryTerm {
  std::uint64_t count = 0;
  const PathString* path = nullptr;
};

std::map<SplitKey, QueryTerm> group_query(const BagOfPaths& query) {
  std::map<SplitKey, QueryTerm> terms;
  for (const auto& [path, count] : query) {
    auto& term = terms[split_path(path)];
    term.count += count;
    if (term.path == nullptr) term.path = &path;
  }
  return terms;
}

struct Accumulator {
  long double score = 0;
  std::vector<MatchedPath> matched;
};

std::vector<ScoredResult> finish(std::unordered_map<std::string, Accumulator>& acc,
                                 std::size_t max_results, bool explain) {
  std::vector<ScoredResult> out;
  out.reserve(acc.size());
  for (auto& [id, a] : acc) {
    ScoredResult r;
    r.model_id = id;
    r.score = static_cast<double>(a.score);
    if (explain) {
      r.matched_paths = std::move(a.matched);
      std::stable_sort(r.matched_paths.begin(), r.matched_paths.end(),
                       [](const MatchedPath& x, const MatchedPath& y) { return x.contribution > y.contribution; });
    }
    if (r.score > 0) out.push_back(std::move(r));
  }
  rank_results(out, max_results);
  return out;
}

}  // namespace

void ScoringParams::check() const {
  if (!(b >= 0.0 && b <= 1.0)) throw ContractError("b must lie in [0, 1]");
  if (!(z >= 0.0) || !std::isfinite(z)) throw ContractError("z must be a finite value >= 0");
}

double bm25_term(std::uint64_t c_q, std::uint64_t c_m, std::uint64_t bop_len_m, double avdl,
                 std::uint64_t t, std::uint64_t df, const ScoringParams& params) {
  if (c_q < 1 || c_m < 1) throw ContractError("bm25_term: counts must be >= 1");
  if (df < 1 || df > t) throw ContractError("bm25_term: need 1 <= df <= t");
  if (!(avdl > 0.0)) throw ContractError("bm25_term: avdl must be positive");
  const double z = params.z;
  const double b = params.b;
  const double cm = static_cast<double>(c_m);
  const double norm = 1.0 - b + b * static_cast<double>(bop_len_m) / avdl;
  const double idf = std::log((static_cast<double>(t) + 1.0) / static_cast<double>(df));
  return static_cast<double>(c_q) * (z + 1.0) * cm / (cm + z * norm) * idf;
}

void rank_results(std::vector<ScoredResult>& results, std::size_t max_results) {
  auto better = [](const ScoredResult& a, const ScoredResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.model_id < b.model_id;
  };
  if (max_results != 0 && results.size() > max_results) {
    std::partial_sort(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(max_results),
                      results.end(), better);
    results.resize(max_results);
  } else {
    std::sort(results.begin(), results.end(), better);
  }
}

std::vector<ScoredResult> score_query(IndexReader& index, const BagOfPaths& query,
                                      const ScoringParams& params, std::size_t max_results,
                                      bool explain, QueryTimings* timings) {
  params.check();
  QueryTimings local;
  QueryTimings& tm = timings != nullptr ? *timings : local;
  tm = {};
  const auto& stats = index.stats();
  if (query.empty() || stats.t == 0 || stats.path_total == 0) return {};
  const double avdl = stats.avdl();

  // Row key -> requested qualifiers, in key order.
  auto terms = group_query(query);
  std::map<std::string, std::vector<std::string>> rows;
  for (const auto& [key, term] : terms) {
    if (index.stop_paths().contains(key)) continue;
    rows[key.row].push_back(key.qualifier);
  }

  std::unordered_map<std::string, Accumulator> acc;
  for (const auto& [row, quals] : rows) {
    auto start = Clock::now();
    auto postings = index.get_postings(row, quals);
    tm.get_ms += ms_since(start);
    ++tm.gets;

    start = Clock::now();
    for (const auto& [qual, payload] : postings) {
      const auto& term = terms.at(SplitKey{row, qual});
      const auto df = payload.entries.size();
      for (const auto& [id, posting] : payload.entries) {
        if (posting.total == 0) {
          ++tm.skipped_unscoreable;
          continue;
        }
        double c = bm25_term(term.count, posting.count, posting.total, avdl, stats.t, df, params);
        auto& a = acc[id];
        a.score += c;
        if (explain) a.matched.push_back({*term.path, c});
      }
    }
    tm.score_ms += ms_since(start);
  }

  auto start = Clock::now();
  auto out = finish(acc, max_results, explain);
  tm.score_ms += ms_since(start);
  return out;
}

std::vector<ScoredResult> brute_force_score(const BagOfPaths& query,
                                            const std::vector<CorpusEntry>& corpus,
                                            const ScoringParams& params, std::size_t max_results,
                                            bool explain) {
  params.check();
  if (query.empty() || corpus.empty()) return {};

  std::vector<std::map<SplitKey, std::uint64_t>> keyed(corpus.size());
  std::map<SplitKey, std::uint64_t> df;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& [path, count] : corpus[i].bop) keyed[i][split_path(path)] += count;
    for (const auto& kv : keyed[i]) ++df[kv.first];
    sum += corpus[i].bop.total();
  }
  const auto t = static_cast<std::uint64_t>(corpus.size());
  if (sum == 0) return {};
  const double avdl = static_cast<double>(sum) / static_cast<double>(t);

  auto terms = group_query(query);
  std::unordered_map<std::string, Accumulator> acc;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto total = corpus[i].bop.total();
    if (total == 0) continue;
    for (const auto& [key, term] : terms) {
      auto it = keyed[i].find(key);
      if (it == keyed[i].end()) continue;
      double c = bm25_term(term.count, it->second, total, avdl, t, df.at(key), params);
      auto& a = acc[corpus[i].id];
      a.score += c;
      if (explain) a.matched.push_back({*term.path, c});
    }
  }
  return finish(acc, max_results, explain);
}

std::vector<ScoredResult> IndexEngine::search(const BagOfPaths& query, std::size_t max_results) {
  auto reader = index_.reader();
  return score_query(reader, query, params_, max_results);
}

std::vector<ScoredResult> BruteForceEngine::search(const BagOfPaths& query, std::size_t max_results) {
  return brute_force_score(query, corpus_, params_, max_results);
}

}  // namespace pathmark
