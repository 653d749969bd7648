#include "pathmark/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pathmark/rng.hpp"

namespace pathmark {

namespace {

// One record of RFC 4180 CSV starting at `pos`; handles quoted fields.
std::vector<std::string> read_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  while (pos < text.size()) {
    char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          fields.back().push_back('"');
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", pos);
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

LabeledCorpus LabeledCorpus::parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::size_t pos = 0;
  auto header = read_record(text, pos);
  if (header.size() != 2 || header[0] != "model_id" || header[1] != "label") {
    throw ParseError("labels file must start with the header 'model_id,label'", 0);
  }
  LabeledCorpus c;
  while (pos < text.size()) {
    const auto at = pos;
    auto rec = read_record(text, pos);
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 2) throw ParseError("labels file: expected two fields", at);
    if (rec[0].empty() || rec[1].empty()) throw ParseError("labels file: empty model id or label", at);
    if (!c.labels.emplace(rec[0], rec[1]).second) {
      throw ParseError("labels file: duplicate model id " + rec[0], at);
    }
  }
  return c;
}

LabeledCorpus LabeledCorpus::load_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw NotFoundError("cannot read labels file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string LabeledCorpus::to_csv() const {
  std::string out = "model_id,label\n";
  for (const auto& [id, label] : labels) out += csv_field(id) + "," + csv_field(label) + "\n";
  return out;
}

std::set<std::string> LabeledCorpus::label_set() const {
  std::set<std::string> out;
  for (const auto& kv : labels) out.insert(kv.second);
  return out;
}

std::vector<Neighbor> nearest_labeled(SearchEngine& engine, const BagOfPaths& query,
                                      const LabeledCorpus& corpus, std::size_t k,
                                      const std::string& exclude_id,
                                      const std::set<std::string>* allowed) {
  std::vector<Neighbor> out;
  for (auto& r : engine.search(query, 0)) {
    if (out.size() == k) break;
    if (r.model_id == exclude_id) continue;
    if (allowed != nullptr && !allowed->contains(r.model_id)) continue;
    auto it = corpus.labels.find(r.model_id);
    if (it == corpus.labels.end()) continue;
    out.push_back({std::move(r.model_id), r.score, it->second});
  }
  return out;
}

ClassificationResult vote(const std::vector<Neighbor>& neighbors, std::size_t k) {
  if (k == 0) throw ContractError("k must be at least 1");
  ClassificationResult res;
  res.k = k;
  const auto n = std::min(k, neighbors.size());
  if (n == 0) throw UnclassifiableError("unclassifiable: no scoreable neighbor");
  res.neighbors.assign(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(n));
  for (const auto& nb : res.neighbors) res.weights[nb.label] += nb.score;
  double best = -1;
  for (const auto& [label, w] : res.weights) best = std::max(best, w);
  // The top neighbor's label wins among the tied labels.
  std::string tied_top;
  std::size_t tied = 0;
  for (const auto& [label, w] : res.weights) {
    if (w == best) {
      ++tied;
      tied_top = label;
    }
  }
  if (tied == 1) {
    res.label = tied_top;
  } else {
    for (const auto& nb : res.neighbors) {
      if (res.weights[nb.label] == best) {
        res.label = nb.label;
        break;
      }
    }
  }
  return res;
}

ClassificationResult classify(SearchEngine& engine, const BagOfPaths& query,
                              const LabeledCorpus& corpus, std::size_t k,
                              const std::string& exclude_id) {
  return vote(nearest_labeled(engine, query, corpus, k, exclude_id), k);
}

std::map<std::string, std::size_t> stratified_folds(const LabeledCorpus& corpus, std::size_t folds,
                                                    std::uint64_t seed) {
  if (folds == 0) throw ContractError("folds must be at least 1");
  std::map<std::string, std::vector<std::string>> by_label;
  for (const auto& [id, label] : corpus.labels) by_label[label].push_back(id);
  Rng rng(seed);
  std::map<std::string, std::size_t> out;
  std::size_t next = 0;
  for (auto& [label, ids] : by_label) {
    rng.shuffle(ids);
    for (const auto& id : ids) out[id] = next++ % folds;
  }
  return out;
}

KSelection select_k(SearchEngine& engine, const std::map<std::string, BagOfPaths>& bops,
                    const LabeledCorpus& corpus, std::size_t k_min, std::size_t k_max,
                    std::size_t folds, std::uint64_t seed) {
  if (k_min == 0 || k_min > k_max) throw ContractError("invalid k range");
  if (folds < 2) throw ContractError("cross-validation needs at least two folds");
  if (corpus.size() < folds) {
    throw ContractError("corpus too small: " + std::to_string(corpus.size()) + " models for " +
                        std::to_string(folds) + " folds");
  }
  auto fold_of = stratified_folds(corpus, folds, seed);
  std::vector<std::set<std::string>> train(folds);
  std::vector<std::vector<std::string>> validation(folds);
  for (const auto& [id, f] : fold_of) {
    validation[f].push_back(id);
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) train[g].insert(id);
    }
  }

  std::map<std::size_t, double> acc_sum;
  for (std::size_t f = 0; f < folds; ++f) {
    std::map<std::size_t, std::size_t> correct;
    for (const auto& id : validation[f]) {
      auto it = bops.find(id);
      if (it == bops.end()) throw NotFoundError("no bag of paths for labeled model " + id);
      // One search serves every k: neighbors for k are a prefix of those for k_max.
      auto nb = nearest_labeled(engine, it->second, corpus, k_max, id, &train[f]);
      const auto& truth = corpus.labels.at(id);
      for (std::size_t k = k_min; k <= k_max; ++k) {
        if (nb.empty()) continue;
        if (vote(nb, k).label == truth) ++correct[k];
      }
    }
    for (std::size_t k = k_min; k <= k_max; ++k) {
      acc_sum[k] += static_cast<double>(correct[k]) / static_cast<double>(validation[f].size());
    }
  }

  KSelection sel;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    double mean = acc_sum[k] / static_cast<double>(folds);
    sel.accuracy_by_k[k] = mean;
    if (sel.k == 0 || mean > sel.accuracy) {
      sel.k = k;
      sel.accuracy = mean;
    }
  }
  return sel;
}

std::pair<LabeledCorpus, LabeledCorpus> train_test_split(const LabeledCorpus& corpus, double ratio,
                                                         std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("split ratio must lie in (0, 1)");
  std::map<std::string, std::vector<std::string>> by_label;
  for (const auto& [id, label] : corpus.labels) by_label[label].push_back(id);
  Rng rng(seed);
  std::pair<LabeledCorpus, LabeledCorpus> out;
  for (auto& [label, ids] : by_label) {
    rng.shuffle(ids);
    auto cut = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < cut ? out.first : out.second).labels.emplace(ids[i], label);
    }
  }
  return out;
}

}  // namespace pathmark
