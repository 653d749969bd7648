#include "pathmark/service.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace pathmark {

using nlohmann::json;

namespace {

class HttpError : public Error {
 public:
  HttpError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

HttpResponse json_response(const json& j, int status = 200) {
  HttpResponse r;
  r.status = status;
  r.body = j.dump() + "\n";
  return r;
}

json path_json(const PathString& p) {
  json segments = json::array();
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    std::string kind = "edge";
    if (i % 2 == 0) kind = p.kinds[i / 2] == VertexKind::attribute ? "attribute" : "class";
    segments.push_back({{"label", p.labels[i]}, {"kind", kind}});
  }
  return {{"text", p.to_string()}, {"segments", segments}};
}

json stats_json(const IndexStats& s) {
  return {{"t", s.t},
          {"avdl", s.avdl()},
          {"path_total", s.path_total},
          {"unscoreable", s.unscoreable},
          {"stop_paths", s.stop_paths}};
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StorageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs a handler body and maps library errors onto status codes.
template <typename F>
HttpResponse guarded(F&& body) {
  try {
    return body();
  } catch (const HttpError& e) {
    return error_response(e.status(), e.what());
  } catch (const ValidationError& e) {
    return error_response(400, std::string("invalid model: ") + e.report().summary());
  } catch (const ParseError& e) {
    return error_response(400, std::string("malformed model: ") + e.what());
  } catch (const UnsupportedFeatureError& e) {
    return error_response(400, e.what());
  } catch (const UnclassifiableError& e) {
    return error_response(422, e.what());
  } catch (const NotFoundError& e) {
    return error_response(404, e.what());
  } catch (const ContractError& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, std::string("internal error: ") + e.what());
  }
}

}  // namespace

HttpResponse error_response(int status, const std::string& message) {
  return json_response({{"error", message}, {"status", status}}, status);
}

SearchService::SearchService(std::shared_ptr<OrderedStore> store, IndexMeta meta, ServiceOptions options,
                             std::optional<std::filesystem::path> meta_file)
    : store_(std::move(store)),
      meta_(std::move(meta)),
      meta_file_(std::move(meta_file)),
      options_(std::move(options)),
      pipeline_(meta_.filter, meta_.tokenizer) {
  if (options_.labels) labels_ = LabeledCorpus::load_csv(*options_.labels);
}

SearchService SearchService::open(const std::filesystem::path& index_dir, ServiceOptions options) {
  auto dir = IndexDirectory::open_reader(index_dir);
  return SearchService(dir.store(), dir.meta(), std::move(options), index_dir / "meta.json");
}

std::vector<std::string> SearchService::model_types() const {
  std::lock_guard lock(meta_mu_);
  if (meta_file_ && std::filesystem::exists(*meta_file_)) {
    meta_.model_types = IndexMeta::from_json(read_text(*meta_file_)).model_types;
  }
  return meta_.model_types;
}

InvertedIndex SearchService::index_for(const std::string& model_type) const {
  if (model_type.empty()) throw HttpError(400, "modelType is required");
  auto types = model_types();
  if (std::find(types.begin(), types.end(), model_type) == types.end()) {
    throw HttpError(404, "unknown model type '" + model_type + "'");
  }
  return InvertedIndex(store_, model_type);
}

Model SearchService::parse_upload(const std::string& payload, const std::string& filename) const {
  if (payload.empty()) throw HttpError(400, "empty model payload");
  if (payload.size() > options_.max_body) throw HttpError(413, "model larger than the request limit");
  return parse_model_file_contents(payload, filename.empty() ? "query.xmi" : filename);
}

HttpResponse SearchService::search(const SearchRequest& req) const {
  return guarded([&] {
    const auto start = std::chrono::steady_clock::now();
    if (req.max_results < 1 || req.max_results > kMaxResultsCap) {
      throw HttpError(400, "maxResults must lie in [1, " + std::to_string(kMaxResultsCap) + "]");
    }
    auto index = index_for(req.model_type);
    auto query = parse_upload(req.payload, req.filename);
    auto reader = index.reader();
    auto bop = pipeline_.encode_query(query, reader.stop_paths());
    auto results = score_query(reader, bop, options_.params, req.max_results, req.explain);

    json items = json::array();
    for (const auto& r : results) {
      json item = {{"id", r.model_id}, {"score", r.score}};
      if (req.explain) {
        json matched = json::array();
        for (const auto& m : r.matched_paths) {
          auto p = path_json(m.path);
          p["contribution"] = m.contribution;
          matched.push_back(std::move(p));
        }
        item["matched_paths"] = std::move(matched);
      }
      items.push_back(std::move(item));
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return json_response({{"results", items},
                          {"query",
                           {{"model_type", req.model_type},
                            {"paths", bop.total()},
                            {"distinct_paths", bop.distinct()},
                            {"elapsed_ms", elapsed}}}});
  });
}

HttpResponse SearchService::model(const std::string& id, const std::string& model_type) const {
  return guarded([&] {
    std::vector<std::string> types;
    if (model_type.empty()) {
      types = model_types();
    } else {
      index_for(model_type);
      types = {model_type};
    }
    for (const auto& type : types) {
      auto stored = InvertedIndex(store_, type).reader().model(id);
      if (!stored) continue;
      HttpResponse r;
      r.body = std::move(stored->content);
      r.content_type = stored->meta.format == "json" ? "application/json" : "application/xml";
      r.headers = {{"X-Model-Id", stored->id},
                   {"X-Model-Type", type},
                   {"X-Source-Uri", stored->meta.source_uri},
                   {"X-Content-Hash", stored->meta.content_hash}};
      return r;
    }
    throw HttpError(404, "unknown model id '" + id + "'");
  });
}

HttpResponse SearchService::stats() const {
  return guarded([&] {
    json types = json::object();
    std::uint64_t total = 0;
    for (const auto& type : model_types()) {
      auto s = InvertedIndex(store_, type).reader().stats();
      total += s.t;
      types[type] = stats_json(s);
    }
    IndexMeta meta;
    {
      std::lock_guard lock(meta_mu_);
      meta = meta_;
    }
    return json_response({{"models", total},
                          {"model_types", types},
                          {"tokenizer", meta.tokenizer.id()},
                          {"stop_path_threshold", meta.stop_path_threshold},
                          {"format_version", meta.format_version}});
  });
}

HttpResponse SearchService::classify(const ClassifyRequest& req) const {
  return guarded([&] {
    if (!labels_) throw HttpError(400, "classification needs a labels file; start the service with --labels");
    auto index = index_for(req.model_type);
    auto query = parse_upload(req.payload, req.filename);
    const auto k = req.k == 0 ? options_.default_k : req.k;
    auto reader = index.reader();
    auto bop = pipeline_.encode_query(query, reader.stop_paths());
    IndexEngine engine(std::move(index), options_.params);
    auto result = pathmark::classify(engine, bop, *labels_, k);
    json neighbors = json::array();
    for (const auto& n : result.neighbors) {
      neighbors.push_back({{"id", n.id}, {"score", n.score}, {"label", n.label}});
    }
    return json_response({{"label", result.label}, {"k", result.k}, {"weights", result.weights}, {"neighbors", neighbors}});
  });
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  const SearchService& service;
  ServiceOptions options;
  httplib::Server server;

  Impl(const SearchService& s, ServiceOptions o) : service(s), options(std::move(o)) {}

  std::string allowed_origin(const httplib::Request& req) const {
    const auto origin = req.get_header_value("Origin");
    for (const auto& o : options.cors_origins) {
      if (o == "*") return "*";
      if (!origin.empty() && o == origin) return origin;
    }
    return "";
  }

  void send(const httplib::Request& req, httplib::Response& res, const HttpResponse& r) const {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    if (auto origin = allowed_origin(req); !origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Expose-Headers", "X-Model-Id, X-Model-Type, X-Source-Uri, X-Content-Hash");
      if (origin != "*") res.set_header("Vary", "Origin");
    }
    res.set_content(r.body, r.content_type);
  }

  static std::string field(const httplib::Request& req, const std::string& name) {
    if (req.has_file(name)) return req.get_file_value(name).content;
    if (req.has_param(name)) return req.get_param_value(name);
    return "";
  }

  static std::size_t number(const std::string& text, const std::string& name, std::size_t fallback) {
    if (text.empty()) return fallback;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != text.size() || text[0] == '-') throw HttpError(400, name + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  static bool flag(const std::string& text) { return text == "true" || text == "1" || text == "yes" || text == "on"; }

  void install() {
    server.set_payload_max_length(options.max_body + (1u << 16));
    server.Options(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      send(req, res, {204, "text/plain", "", {}});
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server.Post("/search", [this](const httplib::Request& req, httplib::Response& res) {
      send(req, res, guarded([&] {
             SearchRequest s;
             if (!req.has_file("file")) throw HttpError(400, "multipart field 'file' is required");
             const auto file = req.get_file_value("file");
             s.payload = file.content;
             s.filename = file.filename;
             s.model_type = field(req, "modelType");
             s.max_results = number(field(req, "maxResults"), "maxResults", kDefaultMaxResults);
             s.explain = flag(field(req, "explain"));
             return service.search(s);
           }));
    });
    server.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
      send(req, res, guarded([&] {
             ClassifyRequest c;
             if (!req.has_file("file")) throw HttpError(400, "multipart field 'file' is required");
             const auto file = req.get_file_value("file");
             c.payload = file.content;
             c.filename = file.filename;
             c.model_type = field(req, "modelType");
             c.k = number(field(req, "k"), "k", 0);
             return service.classify(c);
           }));
    });
    server.Get(R"(/model/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto type = req.has_param("modelType") ? req.get_param_value("modelType") : std::string();
      send(req, res, service.model(req.matches[1], type));
    });
    server.Get("/stats", [this](const httplib::Request& req, httplib::Response& res) {
      send(req, res, service.stats());
    });
    server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      std::string message = res.status == 413 ? "request larger than the limit" : "no such endpoint";
      if (res.status != 404 && res.status != 413) message = "request failed";
      send(req, res, error_response(res.status, message));
    });
    server.set_exception_handler([this](const httplib::Request& req, httplib::Response& res, std::exception_ptr) {
      send(req, res, error_response(500, "internal error"));
    });
  }
};

HttpServer::HttpServer(const SearchService& service, ServiceOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->install();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (impl_->options.port == 0) return impl_->server.bind_to_any_port(impl_->options.host);
  return impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace pathmark
