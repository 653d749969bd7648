#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pathmark/index.hpp"
#include "pathmark/pipeline.hpp"

namespace pathmark {

/// Largest model file accepted by ingestion and by the query service.
inline constexpr std::uint64_t kMaxModelBytes = 32ull << 20;

struct ManifestEntry {
  std::string source_path;  // relative to the crawl root
  std::string model_type;
  std::string model_id;
  std::string content_hash;  // hex SHA-256
  std::uint64_t size = 0;
};

struct SkipRecord {
  std::string source_path;
  std::string reason;
};

struct CorpusManifest {
  std::string root;
  std::string created;  // UTC, ISO 8601
  std::vector<ManifestEntry> entries;
  std::vector<SkipRecord> skipped;

  std::string to_json() const;
  static CorpusManifest from_json(std::string_view text);
  /// Digest of the entry list, independent of the creation time.
  std::string digest() const;
};

std::string sha256_hex(std::string_view bytes);

/// `*` and `?` match within a path segment, `**` across segments.
bool glob_match(std::string_view pattern, std::string_view path);

/// Walks `root` in sorted order and lists files matching any glob.
/// Identical contents and files over kMaxModelBytes are recorded as skips.
/// Model ids are the first 12 hex digits of the content hash, a dash and the
/// file stem.
CorpusManifest crawl_directory(const std::filesystem::path& root, const std::string& model_type,
                               const std::vector<std::string>& include_globs = {"**/*"});

struct IndexReport {
  std::size_t indexed = 0;
  std::size_t skipped = 0;
  std::vector<SkipRecord> skips;
  std::size_t stop_paths = 0;
  double elapsed_ms = 0;
  IndexStats stats;

  std::string to_json() const;
};

struct IngestOptions {
  std::size_t workers = 0;  // 0: hardware concurrency
  std::size_t batch_size = 64;
  bool finalize = true;     // run stop-path post-processing at the end
};

/// Parses, encodes and indexes every manifest entry into the directory's
/// index of the manifest's model type. Unparseable files and ids that are
/// already indexed are skipped. Appends the entries to manifest.json.
IndexReport index_corpus(IndexDirectory& dir, const CorpusManifest& manifest,
                         const IngestOptions& options = {});

struct AuditMismatch {
  std::string model_id;
  std::string detail;
};

/// Re-runs the pipeline on stored sources and compares the result with the
/// stored postings and totals.
std::vector<AuditMismatch> audit_models(IndexDirectory& dir, const std::string& model_type,
                                        const std::vector<std::string>& ids);

}  // namespace pathmark
