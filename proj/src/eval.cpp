#include "pathmark/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "json.hpp"

namespace pathmark {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct PhaseAccumulator {
  double sum = 0;
  double max = 0;
  void add(double v) {
    sum += v;
    max = std::max(max, v);
  }
  PhaseStats stats(std::size_t n) const { return {n == 0 ? 0.0 : sum / static_cast<double>(n), max}; }
};

json phase_json(const PhaseStats& p) { return {{"mean_ms", p.mean_ms}, {"max_ms", p.max_ms}}; }

}  // namespace

// ---------------------------------------------------------------------------

std::vector<ScoredResult> MarSearcher::search(const Model& query, std::size_t max_results) const {
  auto reader = index_.reader();
  auto bop = pipeline_.encode_query(query, reader.stop_paths());
  return score_query(reader, bop, params_, max_results);
}

QueryEngine MarSearcher::engine() const {
  return [this](const Model& q, std::size_t max) { return search(q, max); };
}

TextBaseline::TextBaseline(const std::vector<CorpusModel>& corpus, Normalizer normalizer, ScoringParams params)
    : normalizer_(std::move(normalizer)), params_(params) {
  params_.check();
  std::uint64_t sum = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    ids_.push_back(corpus[d].id);
    std::map<std::string, std::uint64_t> tf;
    for (auto& tok : name_tokens(corpus[d].model)) ++tf[tok];
    std::uint64_t len = 0;
    for (const auto& [term, n] : tf) {
      postings_[term].emplace_back(d, n);
      len += n;
    }
    lengths_.push_back(len);
    sum += len;
  }
  avdl_ = ids_.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(ids_.size());
}

std::vector<std::string> TextBaseline::name_tokens(const Model& m) const {
  std::vector<std::string> out;
  for (const auto& o : m.objects) {
    const auto* names = o.attribute("name");
    if (names == nullptr) continue;
    for (const auto& v : *names) {
      for (auto& t : normalizer_.normalize_label(v)) out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<ScoredResult> TextBaseline::search(const Model& query, std::size_t max_results) const {
  if (avdl_ <= 0) return {};
  std::map<std::string, std::uint64_t> qtf;
  for (auto& t : name_tokens(query)) ++qtf[t];
  std::vector<long double> acc(ids_.size(), 0);
  std::vector<bool> hit(ids_.size(), false);
  const auto t = static_cast<std::uint64_t>(ids_.size());
  for (const auto& [term, cq] : qtf) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const auto df = static_cast<std::uint64_t>(it->second.size());
    for (const auto& [doc, cm] : it->second) {
      acc[doc] += bm25_term(cq, cm, lengths_[doc], avdl_, t, df, params_);
      hit[doc] = true;
    }
  }
  std::vector<ScoredResult> out;
  for (std::size_t d = 0; d < ids_.size(); ++d) {
    if (hit[d] && acc[d] > 0) out.push_back({ids_[d], static_cast<double>(acc[d]), {}});
  }
  rank_results(out, max_results);
  return out;
}

QueryEngine TextBaseline::engine() const {
  return [this](const Model& q, std::size_t max) { return search(q, max); };
}

// ---------------------------------------------------------------------------

void summarize_ranks(EvalReport& report) {
  report.histogram.fill(0);
  double sum = 0;
  for (const auto& r : report.ranks) {
    if (r.rank == 0) {
      ++report.histogram[5];
      continue;
    }
    sum += 1.0 / static_cast<double>(r.rank);
    ++report.histogram[std::min<std::size_t>(r.rank, 5) - 1];
  }
  report.mrr = report.ranks.empty() ? 0.0 : sum / static_cast<double>(report.ranks.size());
}

EvalReport evaluate_mrr(const std::vector<QueryMutant>& mutants, const QueryEngine& engine,
                        const std::string& engine_id, std::size_t workers, std::size_t max_results) {
  EvalReport report;
  report.engine = engine_id;
  report.ranks.resize(mutants.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < mutants.size(); i = next++) {
      const auto& m = mutants[i];
      auto results = engine(m.query, max_results);
      auto it = std::find_if(results.begin(), results.end(),
                             [&](const ScoredResult& r) { return r.model_id == m.origin; });
      report.ranks[i] = {m.id, m.origin,
                         it == results.end() ? 0 : static_cast<std::size_t>(it - results.begin()) + 1};
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, mutants.size()); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  summarize_ranks(report);
  return report;
}

std::string EvalReport::to_json() const {
  json ranks_json = json::array();
  for (const auto& r : ranks) {
    ranks_json.push_back({{"query", r.query_id}, {"origin", r.origin}, {"rank", r.rank}});
  }
  json j = {{"engine", engine},
            {"query_set", query_set},
            {"corpus", corpus},
            {"queries", ranks.size()},
            {"mrr", mrr},
            {"histogram",
             {{"1", histogram[0]},
              {"2", histogram[1]},
              {"3", histogram[2]},
              {"4", histogram[3]},
              {"5+", histogram[4]},
              {"not_found", histogram[5]}}},
            {"ranks", ranks_json}};
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::string out = "query,origin,rank,reciprocal_rank\n";
  for (const auto& r : ranks) {
    out += r.query_id + "," + r.origin + "," + std::to_string(r.rank) + "," +
           json(r.rank == 0 ? 0.0 : 1.0 / static_cast<double>(r.rank)).dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(SizeBucket b) {
  switch (b) {
    case SizeBucket::small:
      return "small";
    case SizeBucket::medium:
      return "medium";
    case SizeBucket::large:
      return "large";
  }
  return "?";
}

SizeBucket size_bucket(std::size_t elements) {
  if (elements < 20) return SizeBucket::small;
  if (elements > 70) return SizeBucket::large;
  return SizeBucket::medium;
}

const LatencyRow* LatencyReport::find(std::size_t index_size, SizeBucket bucket) const {
  for (const auto& r : rows) {
    if (r.index_size == index_size && r.bucket == bucket) return &r;
  }
  return nullptr;
}

std::string LatencyReport::to_csv() const {
  std::string out = "index_size,bucket,phase,mean_ms,max_ms\n";
  for (const auto& r : rows) {
    const std::pair<const char*, const PhaseStats*> phases[] = {
        {"paths", &r.paths}, {"get", &r.get}, {"score", &r.score}, {"total", &r.total}};
    for (const auto& [name, p] : phases) {
      out += std::to_string(r.index_size) + "," + to_string(r.bucket) + "," + name + "," + json(p->mean_ms).dump() +
             "," + json(p->max_ms).dump() + "\n";
    }
  }
  return out;
}

std::string LatencyReport::to_json() const {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"index_size", r.index_size},
                   {"bucket", to_string(r.bucket)},
                   {"queries", r.queries},
                   {"paths", phase_json(r.paths)},
                   {"get", phase_json(r.get)},
                   {"score", phase_json(r.score)},
                   {"total", phase_json(r.total)}});
  }
  return json{{"rows", arr}}.dump(2) + "\n";
}

LatencyReport benchmark_latency(const std::vector<CorpusModel>& corpus, const std::vector<std::size_t>& sizes,
                                const std::vector<Model>& queries, std::shared_ptr<OrderedStore> store,
                                const EncodePipeline& pipeline, const ScoringParams& params) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || sizes[i] > corpus.size() || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw ContractError("index sizes must be ascending and within the corpus size");
    }
  }
  InvertedIndex index(std::move(store), "bench");
  LatencyReport report;
  std::size_t indexed = 0;
  for (auto size : sizes) {
    std::vector<InvertedIndex::Entry> batch;
    for (; indexed < size; ++indexed) {
      const auto& cm = corpus[indexed];
      batch.push_back({cm.id, pipeline.encode(cm.model), {cm.model.source_uri, "bench", "json", ""}, ""});
    }
    index.index_batch(std::move(batch));
    index.apply_stop_paths(kDefaultStopPathThreshold);

    struct Acc {
      std::size_t n = 0;
      PhaseAccumulator paths, get, score, total;
    };
    std::map<SizeBucket, Acc> acc;
    for (const auto& q : queries) {
      auto& a = acc[size_bucket(element_count(q))];
      const auto start = Clock::now();
      auto reader = index.reader();
      const auto paths_start = Clock::now();
      auto bop = pipeline.encode_query(q, reader.stop_paths());
      const double paths_ms = ms_since(paths_start);
      QueryTimings tm;
      score_query(reader, bop, params, 20, false, &tm);
      a.total.add(ms_since(start));
      a.paths.add(paths_ms);
      a.get.add(tm.get_ms);
      a.score.add(tm.score_ms);
      ++a.n;
    }
    for (auto b : {SizeBucket::small, SizeBucket::medium, SizeBucket::large}) {
      const auto& a = acc[b];
      report.rows.push_back({size, b, a.n, a.paths.stats(a.n), a.get.stats(a.n), a.score.stats(a.n),
                             a.total.stats(a.n)});
    }
  }
  return report;
}

}  // namespace pathmark
