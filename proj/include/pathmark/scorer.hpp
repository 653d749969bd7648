#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pathmark/index.hpp"
#include "pathmark/paths.hpp"

namespace pathmark {

struct ScoringParams {
  double b = 0.75;  // length normalization
  double z = 0.1;   // term-frequency saturation

  void check() const;
};

struct MatchedPath {
  PathString path;
  double contribution = 0;
};

struct ScoredResult {
  std::string model_id;
  double score = 0;
  std::vector<MatchedPath> matched_paths;  // filled only when explaining
};

/// One summand of the ranking function:
///   c_q (z+1) c_m / (c_m + z (1 - b + b len/avdl)) * ln((t+1)/df)
/// Throws ContractError unless c_q, c_m, df >= 1, df <= t and avdl > 0.
double bm25_term(std::uint64_t c_q, std::uint64_t c_m, std::uint64_t bop_len_m, double avdl,
                 std::uint64_t t, std::uint64_t df, const ScoringParams& params = {});

/// Wall time split of one scoring call, in milliseconds.
struct QueryTimings {
  double get_ms = 0;
  double score_ms = 0;
  std::uint64_t gets = 0;
  std::uint64_t skipped_unscoreable = 0;
};

/// Ranks indexed models against a normalized query bag. Query paths are
/// grouped by row key and each row is fetched with a single get. Results are
/// sorted by score descending, then id ascending; max_results 0 keeps all.
std::vector<ScoredResult> score_query(IndexReader& index, const BagOfPaths& query,
                                      const ScoringParams& params = {},
                                      std::size_t max_results = 0, bool explain = false,
                                      QueryTimings* timings = nullptr);

struct CorpusEntry {
  std::string id;
  BagOfPaths bop;
};

/// Linear scan evaluating the ranking function against every model in memory.
/// Paths are identified by their serialized key, as in the index.
std::vector<ScoredResult> brute_force_score(const BagOfPaths& query,
                                            const std::vector<CorpusEntry>& corpus,
                                            const ScoringParams& params = {},
                                            std::size_t max_results = 0, bool explain = false);

/// Sorts by score descending, id ascending, then truncates.
void rank_results(std::vector<ScoredResult>& results, std::size_t max_results);

/// Search backend used by the classifier and the evaluation harness.
class SearchEngine {
 public:
  virtual ~SearchEngine() = default;
  virtual std::vector<ScoredResult> search(const BagOfPaths& query, std::size_t max_results) = 0;
  virtual std::string name() const = 0;
};

class IndexEngine : public SearchEngine {
 public:
  explicit IndexEngine(InvertedIndex index, ScoringParams params = {})
      : index_(std::move(index)), params_(params) {}
  std::vector<ScoredResult> search(const BagOfPaths& query, std::size_t max_results) override;
  std::string name() const override { return "mar"; }

 private:
  InvertedIndex index_;
  ScoringParams params_;
};

class BruteForceEngine : public SearchEngine {
 public:
  explicit BruteForceEngine(std::vector<CorpusEntry> corpus, ScoringParams params = {})
      : corpus_(std::move(corpus)), params_(params) {}
  std::vector<ScoredResult> search(const BagOfPaths& query, std::size_t max_results) override;
  std::string name() const override { return "brute-force"; }

 private:
  std::vector<CorpusEntry> corpus_;
  ScoringParams params_;
};

}  // namespace pathmark
