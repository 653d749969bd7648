#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pathmark/keys.hpp"
#include "pathmark/paths.hpp"

namespace pathmark {

enum class Splitter { whitespace, whitespace_punctuation };

struct TokenizerConfig {
  bool lowercase = true;
  bool split_camel_case = true;
  Splitter splitter = Splitter::whitespace_punctuation;
  std::string stopword_list_id = "en-v1";

  /// Stable descriptor recorded in index metadata, e.g. "lc+camel+punct/en-v1".
  std::string id() const;
  static TokenizerConfig from_id(std::string_view id);
};

/// Identifier of the stop-word list compiled into the library.
inline constexpr std::string_view kDefaultStopwordListId = "en-v1";

class StopWordList {
 public:
  /// Parses the list file format: one lowercase word per line, `#` comments.
  static StopWordList parse(std::string id, std::string_view text);
  /// Built-in lists by id; throws NotFoundError for unknown ids.
  static const StopWordList& builtin(std::string_view id);
  /// Text of the built-in default list, in the list file format.
  static std::string_view default_list_text();

  const std::string& id() const { return id_; }
  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  std::size_t size() const { return words_.size(); }

 private:
  std::string id_;
  std::unordered_set<std::string> words_;
};

std::vector<std::string> tokenize(std::string_view value, const TokenizerConfig& cfg = {});

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                          const StopWordList& list);

/// Porter stemmer, reference C implementation behaviour (including its
/// `logi -> log` and `bli -> ble` rules). Tokens that are not lowercase ASCII
/// letters are returned unchanged.
std::string stem(std::string_view token);

/// Most replicas a single path may expand into during normalization.
inline constexpr std::size_t kMaxPathReplicas = 64;

/// Tokenize, drop stop words and stem attribute-value labels of paths.
class Normalizer {
 public:
  explicit Normalizer(TokenizerConfig cfg = {});
  Normalizer(TokenizerConfig cfg, std::shared_ptr<const StopWordList> list);

  /// Tokens of one attribute value. Stemming is repeated until it settles and
  /// stems that are stop words are dropped, so a normalized token maps to
  /// itself.
  std::vector<std::string> normalize_label(std::string_view value) const;

  /// Replaces each attribute label by its tokens, replicating the path once
  /// per token combination; paths with a token-less label are dropped.
  BagOfPaths normalize_bop(const BagOfPaths& bop) const;

  const TokenizerConfig& config() const { return cfg_; }
  const StopWordList& stopwords() const { return *list_; }

 private:
  TokenizerConfig cfg_;
  std::shared_ptr<const StopWordList> list_;
};

BagOfPaths normalize_bop(const BagOfPaths& bop, const TokenizerConfig& cfg = {});

inline constexpr double kDefaultStopPathThreshold = 0.70;

/// Paths present in at least `threshold` of the indexed models.
struct StopPathSet {
  std::set<SplitKey> paths;
  double threshold = kDefaultStopPathThreshold;
  std::uint64_t corpus_size = 0;

  bool contains(const SplitKey& k) const { return paths.contains(k); }
};

StopPathSet compute_stop_paths(const std::map<SplitKey, std::uint64_t>& df,
                               std::uint64_t corpus_size,
                               double threshold = kDefaultStopPathThreshold);

BagOfPaths filter_stop_paths(const BagOfPaths& bop, const StopPathSet& stop);

/// stoppaths.bin encoding: magic, version, threshold, corpus size, then
/// length-prefixed (row, qualifier) pairs.
std::string serialize_stop_paths(const StopPathSet& s);
StopPathSet deserialize_stop_paths(std::string_view bytes);

}  // namespace pathmark
