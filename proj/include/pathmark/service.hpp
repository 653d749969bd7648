#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pathmark/classifier.hpp"
#include "pathmark/index.hpp"
#include "pathmark/ingest.hpp"
#include "pathmark/pipeline.hpp"
#include "pathmark/scorer.hpp"

namespace pathmark {

inline constexpr std::size_t kDefaultMaxResults = 20;
inline constexpr std::size_t kMaxResultsCap = 200;

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_body = kMaxModelBytes;
  /// Allowed CORS origins; "*" allows any.
  std::vector<std::string> cors_origins{"*"};
  std::optional<std::filesystem::path> labels;  // CSV for /classify
  std::size_t default_k = 5;
  ScoringParams params;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

struct SearchRequest {
  std::string payload;
  std::string filename;  // selects the parser: .json canonical, else XMI
  std::string model_type;
  std::size_t max_results = kDefaultMaxResults;
  bool explain = false;
};

struct ClassifyRequest {
  std::string payload;
  std::string filename;
  std::string model_type;
  std::size_t k = 0;  // 0: service default
};

/// Read-only query handlers over an index. Every request works on its own
/// store snapshot; handlers are safe to call concurrently.
class SearchService {
 public:
  /// `meta_file` is re-read to pick up model types added by a writer.
  SearchService(std::shared_ptr<OrderedStore> store, IndexMeta meta, ServiceOptions options = {},
                std::optional<std::filesystem::path> meta_file = std::nullopt);
  static SearchService open(const std::filesystem::path& index_dir, ServiceOptions options = {});

  HttpResponse search(const SearchRequest& req) const;
  HttpResponse model(const std::string& id, const std::string& model_type = "") const;
  HttpResponse stats() const;
  HttpResponse classify(const ClassifyRequest& req) const;

  void set_labels(LabeledCorpus labels) { labels_ = std::move(labels); }
  const ServiceOptions& options() const { return options_; }

 private:
  std::vector<std::string> model_types() const;
  InvertedIndex index_for(const std::string& model_type) const;
  Model parse_upload(const std::string& payload, const std::string& filename) const;

  std::shared_ptr<OrderedStore> store_;
  mutable std::mutex meta_mu_;
  mutable IndexMeta meta_;
  std::optional<std::filesystem::path> meta_file_;
  ServiceOptions options_;
  EncodePipeline pipeline_;
  std::optional<LabeledCorpus> labels_;
};

/// JSON error body {"error": ..., "status": ...}.
HttpResponse error_response(int status, const std::string& message);

/// HTTP front end: POST /search, GET /model/{id}, GET /stats,
/// POST /classify, with CORS headers and OPTIONS preflight.
class HttpServer {
 public:
  HttpServer(const SearchService& service, ServiceOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds options.host:options.port (port 0 picks a free one); returns the
  /// bound port or -1.
  int bind();
  /// Serves on the bound socket until stop() is called.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pathmark
