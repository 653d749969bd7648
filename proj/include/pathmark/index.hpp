#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathmark/keys.hpp"
#include "pathmark/normalizer.hpp"
#include "pathmark/paths.hpp"
#include "pathmark/store.hpp"

namespace pathmark {

struct Posting {
  std::uint64_t count = 0;  // occurrences of the path in the model
  std::uint64_t total = 0;  // size of the model's bag of paths
  bool operator==(const Posting&) const = default;
};

/// Serialized value of one (row, qualifier) cell: model id -> posting.
struct PostingPayload {
  std::map<std::string, Posting> entries;
  bool operator==(const PostingPayload&) const = default;
};

/// Version byte, entry count, then per entry the length-prefixed model id
/// followed by count and total, all integers as LEB128 varints.
std::string encode_payload(const PostingPayload& p);
PostingPayload decode_payload(std::string_view bytes);

struct ModelMeta {
  std::string source_uri;
  std::string model_type;
  std::string format;        // "json" or "xmi"
  std::string content_hash;  // hex SHA-256 of the source bytes
};

struct StoredModel {
  std::string id;
  ModelMeta meta;
  std::uint64_t total = 0;  // |BoP| after stop-path removal
  std::string content;      // original source bytes
};

struct IndexStats {
  std::uint64_t t = 0;           // indexed models
  std::uint64_t path_total = 0;  // sum of per-model totals
  std::uint64_t unscoreable = 0; // models whose total dropped to zero
  std::uint64_t stop_paths = 0;
  double avdl() const { return t == 0 ? 0.0 : static_cast<double>(path_total) / static_cast<double>(t); }
};

/// Read view of one model type's index over a store snapshot.
class IndexReader {
 public:
  IndexReader(std::unique_ptr<StoreSnapshot> snap, std::string model_type);

  const std::string& model_type() const { return type_; }
  const IndexStats& stats() const { return stats_; }
  const StopPathSet& stop_paths() const { return stop_; }

  /// One storage get for all requested qualifiers of `row`.
  std::map<std::string, PostingPayload> get_postings(const std::string& row,
                                                     const std::vector<std::string>& qualifiers);

  /// df of every stored path, by ordered scan.
  std::map<SplitKey, std::uint64_t> document_frequencies();

  /// Visits every stored posting cell.
  void for_each_posting(const std::function<void(const SplitKey&, const PostingPayload&)>& visit);

  std::optional<StoredModel> model(const std::string& id, bool with_content = true);
  /// Per-model totals table, ordered by id.
  std::map<std::string, std::uint64_t> totals();
  std::vector<std::string> model_ids();

 private:
  std::unique_ptr<StoreSnapshot> snap_;
  std::string type_;
  IndexStats stats_;
  StopPathSet stop_;
};

/// Inverted index of one model type. Postings live under a per-type row
/// prefix; stats, model metadata, raw sources and the stop-path set live in a
/// per-type sidecar keyspace of the same store and are updated in the same
/// write batch as the postings.
class InvertedIndex {
 public:
  InvertedIndex(std::shared_ptr<OrderedStore> store, std::string model_type);

  struct Entry {
    std::string id;
    BagOfPaths bop;
    ModelMeta meta;
    std::string content;
  };

  /// Adds one model. Paths in the current stop-path set are not stored.
  void index_model(const std::string& id, const BagOfPaths& bop, const ModelMeta& meta,
                   std::string content = {});
  /// Adds several models in one atomic write. Throws ContractError on an id
  /// that is already indexed or repeated within the batch.
  void index_batch(std::vector<Entry> entries);

  void remove_model(const std::string& id);

  /// Stop-path post-processing: computes df over the stored postings, marks
  /// paths reaching `threshold` of the models as stop paths, deletes their
  /// postings and subtracts their counts from the affected totals.
  StopPathSet apply_stop_paths(double threshold = kDefaultStopPathThreshold);

  IndexReader reader() const;

  const std::string& model_type() const { return type_; }
  OrderedStore& store() const { return *store_; }

  /// Store row of a posting key under this index's namespace.
  std::string posting_row(const std::string& row_key) const;

 private:
  std::shared_ptr<OrderedStore> store_;
  std::string type_;
};

/// Index metadata persisted as meta.json.
struct IndexMeta {
  int format_version = 1;
  TokenizerConfig tokenizer;
  double stop_path_threshold = kDefaultStopPathThreshold;
  FilterConfig filter;
  std::vector<std::string> model_types;

  std::string to_json() const;
  static IndexMeta from_json(std::string_view text);
};

/// On-disk index layout:
///   store/index.sqlite   ordered key-value store
///   meta.json            format version, tokenizer, stop-word list, threshold
///   stoppaths.bin        stop-path sets per model type
///   manifest.json        ingestion manifest (written by ingest)
///   LOCK                 held by the single writer
class IndexDirectory {
 public:
  /// Opens (creating if needed) for writing; takes the writer lock.
  static IndexDirectory open_writer(const std::filesystem::path& dir, const IndexMeta& defaults = {});
  static IndexDirectory open_reader(const std::filesystem::path& dir);

  IndexDirectory(IndexDirectory&&) noexcept;
  IndexDirectory& operator=(IndexDirectory&&) noexcept;
  ~IndexDirectory();

  const std::filesystem::path& path() const { return dir_; }
  const IndexMeta& meta() const { return meta_; }
  bool has_type(std::string_view model_type) const;
  bool writable() const { return lock_fd_ >= 0; }

  /// Index of `model_type`; registers the type when writable, otherwise
  /// throws NotFoundError for unknown types.
  InvertedIndex index(const std::string& model_type);
  Normalizer normalizer() const;
  std::shared_ptr<OrderedStore> store() const { return store_; }

  /// Runs stop-path post-processing for `model_type` at the configured
  /// threshold and exports stoppaths.bin.
  StopPathSet finalize(const std::string& model_type);
  void write_stop_path_file();
  void save_meta();

 private:
  IndexDirectory() = default;
  std::filesystem::path dir_;
  IndexMeta meta_;
  std::shared_ptr<OrderedStore> store_;
  int lock_fd_ = -1;
};

/// Reads a stoppaths.bin export: stop-path set per model type.
std::map<std::string, StopPathSet> read_stop_path_file(const std::filesystem::path& file);

}  // namespace pathmark
