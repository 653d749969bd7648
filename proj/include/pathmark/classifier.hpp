#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pathmark/scorer.hpp"

namespace pathmark {

/// Domain label per model id.
struct LabeledCorpus {
  std::map<std::string, std::string> labels;

  /// CSV with a `model_id,label` header row.
  static LabeledCorpus parse_csv(std::string_view text);
  static LabeledCorpus load_csv(const std::filesystem::path& file);
  std::string to_csv() const;

  std::set<std::string> label_set() const;
  std::size_t size() const { return labels.size(); }
};

class UnclassifiableError : public Error {
 public:
  using Error::Error;
};

struct Neighbor {
  std::string id;
  double score = 0;
  std::string label;
};

struct ClassificationResult {
  std::string label;
  std::map<std::string, double> weights;  // label -> summed neighbor scores
  std::size_t k = 0;
  std::vector<Neighbor> neighbors;
};

/// Top-k labeled neighbors of `query` by search score, skipping
/// `exclude_id` and, when `allowed` is given, ids outside it.
std::vector<Neighbor> nearest_labeled(SearchEngine& engine, const BagOfPaths& query,
                                      const LabeledCorpus& corpus, std::size_t k,
                                      const std::string& exclude_id = {},
                                      const std::set<std::string>* allowed = nullptr);

/// Weighted vote over the first k neighbors. Equal weight sums go to the
/// label of the highest-scoring neighbor. Throws UnclassifiableError when
/// there is no neighbor.
ClassificationResult vote(const std::vector<Neighbor>& neighbors, std::size_t k);

ClassificationResult classify(SearchEngine& engine, const BagOfPaths& query,
                              const LabeledCorpus& corpus, std::size_t k,
                              const std::string& exclude_id = {});

struct KSelection {
  std::size_t k = 0;
  double accuracy = 0;                        // mean validation accuracy of k
  std::map<std::size_t, double> accuracy_by_k;
};

/// Stratified, seeded k-fold cross-validation over `corpus`; the neighbors
/// of a validation model are drawn from the other folds only. Ties go to the
/// smallest k.
KSelection select_k(SearchEngine& engine, const std::map<std::string, BagOfPaths>& bops,
                    const LabeledCorpus& corpus, std::size_t k_min = 2, std::size_t k_max = 10,
                    std::size_t folds = 10, std::uint64_t seed = 42);

/// Stratified split into (train, test) with `ratio` of each label in train.
std::pair<LabeledCorpus, LabeledCorpus> train_test_split(const LabeledCorpus& corpus,
                                                         double ratio = 0.7,
                                                         std::uint64_t seed = 42);

/// Stratified fold assignment: fold index per model id.
std::map<std::string, std::size_t> stratified_folds(const LabeledCorpus& corpus, std::size_t folds,
                                                    std::uint64_t seed);

}  // namespace pathmark
