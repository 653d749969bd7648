#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pathmark/index.hpp"
#include "pathmark/pipeline.hpp"
#include "pathmark/scorer.hpp"
#include "pathmark/synth.hpp"

namespace pathmark {

// ---------------------------------------------------------------------------
// Query mutants

inline constexpr int kUnboundedRadius = std::numeric_limits<int>::max();

struct MutationConfig {
  int radius = 5;
  double inheritance_rate = 0.20;
  double class_rate = 0.30;
  double reference_rate = 0.30;
  double enum_rate = 0.50;
  double attribute_rate = 0.30;
  double rename_rate = 0.30;
  std::size_t low_df_ceiling = 2;
  std::uint64_t seed = 42;

  /// Throws ContractError for rates outside their bounds or radius < 1.
  void check() const;
};

struct QueryMutant {
  std::string id;      // origin id plus radius
  std::string origin;  // id of the model the query was derived from
  int radius = 0;
  Model query;
  std::vector<std::string> log;  // one line per operator, in order
};

class MutationRejected : public Error {
 public:
  enum class Reason { too_small, discarded };
  MutationRejected(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

/// Corpus knowledge used by the naming operators.
struct MutationContext {
  /// Lowercased element name -> number of corpus models using it.
  std::map<std::string, std::size_t> name_df;
  /// Element class (EClass, EAttribute, EReference) -> names used by other
  /// models of the origin's cluster.
  std::map<std::string, std::vector<std::string>> rename_pool;
};

std::map<std::string, std::size_t> name_document_frequency(const std::vector<CorpusModel>& corpus);

MutationContext mutation_context(const std::vector<CorpusModel>& corpus,
                                 const std::map<std::string, std::size_t>& name_df,
                                 const std::map<std::string, std::size_t>& clusters,
                                 const std::string& origin_id);

/// Shrinks and renames an Ecore-flavored model with eight operators applied
/// in turn: connected extraction around a root class with package renaming,
/// then removal of inheritance links, far classes, references,
/// enumerations, attributes and rarely named elements, and finally renaming
/// from the cluster vocabulary. Throws MutationRejected with reason
/// too_small when the input has fewer than 20 classes or 40 classes plus
/// features, and discarded when the result has fewer than 3 classes or fewer
/// references than half its classes.
QueryMutant mutate(const Model& m, const std::string& origin_id, const MutationConfig& cfg,
                   const MutationContext& ctx);

/// k-means over TF-IDF vectors of normalized element-name tokens; the best
/// of ten seeded k-means++ runs by inertia. Returns model id -> cluster in
/// [0, k).
std::map<std::string, std::size_t> cluster_names(const std::vector<CorpusModel>& corpus, std::size_t k,
                                                 std::uint64_t seed, const Normalizer& normalizer = Normalizer());

/// max(5, ceil(n / 20)), capped at n.
std::size_t default_cluster_count(std::size_t corpus_size);

struct MutantSet {
  std::vector<QueryMutant> mutants;
  std::size_t too_small = 0;
  std::size_t discarded = 0;
  std::map<std::string, std::size_t> clusters;

  /// Digest of the query models and their origins.
  std::string digest() const;
};

/// Applies mutate to every corpus model at each radius. Each (model, radius)
/// pair gets its own seed derived from `seed`.
MutantSet generate_mutants(const std::vector<CorpusModel>& corpus, const std::vector<int>& radii,
                           MutationConfig base, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Engines over models

using QueryEngine = std::function<std::vector<ScoredResult>(const Model& query, std::size_t max_results)>;

/// Path index search: encode, drop stop paths, score.
class MarSearcher {
 public:
  MarSearcher(InvertedIndex index, EncodePipeline pipeline = EncodePipeline(), ScoringParams params = {})
      : index_(std::move(index)), pipeline_(std::move(pipeline)), params_(params) {}
  std::vector<ScoredResult> search(const Model& query, std::size_t max_results) const;
  QueryEngine engine() const;

 private:
  InvertedIndex index_;
  EncodePipeline pipeline_;
  ScoringParams params_;
};

/// Text control: one document per model holding the normalized tokens of
/// every `name` value, ranked with the same BM25 function over whole-document
/// term frequencies.
class TextBaseline {
 public:
  explicit TextBaseline(const std::vector<CorpusModel>& corpus, Normalizer normalizer = Normalizer(),
                        ScoringParams params = {});

  std::vector<ScoredResult> search(const Model& query, std::size_t max_results) const;
  QueryEngine engine() const;

  /// Normalized tokens of all `name` attribute values, in object order.
  std::vector<std::string> name_tokens(const Model& m) const;
  std::size_t size() const { return ids_.size(); }

 private:
  Normalizer normalizer_;
  ScoringParams params_;
  std::vector<std::string> ids_;
  std::vector<std::uint64_t> lengths_;
  std::map<std::string, std::vector<std::pair<std::size_t, std::uint64_t>>> postings_;
  double avdl_ = 0;
};

// ---------------------------------------------------------------------------
// Known-item evaluation

struct QueryRank {
  std::string query_id;
  std::string origin;
  std::size_t rank = 0;  // 1-based; 0 when the origin was not returned
};

struct EvalReport {
  std::string engine;
  std::string query_set;
  std::string corpus;
  std::vector<QueryRank> ranks;
  double mrr = 0;
  /// Queries at rank 1, 2, 3, 4, 5 or worse, and not found.
  std::array<std::size_t, 6> histogram{};

  std::string to_json() const;
  std::string to_csv() const;
};

/// Rank of each origin in the engine's results; absent origins count as
/// reciprocal rank 0. Queries are evaluated in parallel.
EvalReport evaluate_mrr(const std::vector<QueryMutant>& mutants, const QueryEngine& engine,
                        const std::string& engine_id, std::size_t workers = 0,
                        std::size_t max_results = 0);

/// MRR and histogram from per-query ranks.
void summarize_ranks(EvalReport& report);

// ---------------------------------------------------------------------------
// Latency

enum class SizeBucket { small, medium, large };
std::string to_string(SizeBucket b);
/// small below 20 elements, large above 70.
SizeBucket size_bucket(std::size_t elements);

struct PhaseStats {
  double mean_ms = 0;
  double max_ms = 0;
};

struct LatencyRow {
  std::size_t index_size = 0;
  SizeBucket bucket = SizeBucket::small;
  std::size_t queries = 0;
  PhaseStats paths, get, score, total;
};

struct LatencyReport {
  std::vector<LatencyRow> rows;
  const LatencyRow* find(std::size_t index_size, SizeBucket bucket) const;
  /// index_size,bucket,phase,mean_ms,max_ms
  std::string to_csv() const;
  std::string to_json() const;
};

/// Grows an index over `store` through the given sizes (ascending), applying
/// stop-path post-processing after each step, and times every query once per
/// size. Rows are ordered by size, then bucket.
LatencyReport benchmark_latency(const std::vector<CorpusModel>& corpus, const std::vector<std::size_t>& sizes,
                                const std::vector<Model>& queries, std::shared_ptr<OrderedStore> store,
                                const EncodePipeline& pipeline = EncodePipeline(),
                                const ScoringParams& params = {});

}  // namespace pathmark
