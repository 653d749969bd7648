#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pathmark/classifier.hpp"
#include "pathmark/eval.hpp"
#include "pathmark/ingest.hpp"
#include "pathmark/service.hpp"
#include "pathmark/store.hpp"

namespace pathmark {

namespace {

using nlohmann::json;

// Bad invocation detected after flag parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + p.string());
  out << text;
}

struct Settings {
  std::string index = "pathmark-index";
  std::string type;
  std::string format;
  std::uint64_t seed = 42;
  double b = 0.75;
  double z = 0.1;

  ScoringParams params() const {
    ScoringParams p{b, z};
    p.check();
    return p;
  }
};

std::string pick_format(const Settings& s, const std::string& fallback) {
  const auto f = s.format.empty() ? fallback : s.format;
  if (f != "json" && f != "csv" && f != "table") throw UsageError("unknown format '" + f + "'");
  return f;
}

std::string csv_cell(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

// Renders a service response; non-200 statuses become errors with the
// response message.
json checked(const HttpResponse& r) {
  if (r.status != 200) {
    std::string message = r.body;
    try {
      message = json::parse(r.body).at("error").get<std::string>();
    } catch (const std::exception&) {
    }
    if (r.status >= 500) throw StorageError(message);
    throw UsageError(message);
  }
  return json::parse(r.body);
}

// Label files may name models by index id, by source path or by file stem.
LabeledCorpus resolve_labels(const std::filesystem::path& index_dir, const LabeledCorpus& raw) {
  std::map<std::string, std::string> alias;
  const auto manifest_path = index_dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    for (const auto& e : CorpusManifest::from_json(read_file(manifest_path)).entries) {
      alias.emplace(e.source_path, e.model_id);
      alias.emplace(std::filesystem::path(e.source_path).stem().string(), e.model_id);
    }
  }
  LabeledCorpus out;
  for (const auto& [key, label] : raw.labels) {
    auto it = alias.find(key);
    out.labels[it == alias.end() ? key : it->second] = label;
  }
  return out;
}

// Every stored model of one type, parsed back from its source bytes, in id order.
std::vector<CorpusModel> load_indexed(const std::filesystem::path& index_dir, const std::string& type) {
  auto dir = IndexDirectory::open_reader(index_dir);
  if (!dir.has_type(type)) throw UsageError("index has no models of type '" + type + "'");
  auto reader = dir.index(type).reader();
  std::vector<CorpusModel> out;
  for (const auto& id : reader.model_ids()) {
    auto stored = reader.model(id);
    if (!stored) continue;
    auto m = parse_model_file_contents(stored->content, stored->meta.format == "json" ? "m.json" : "m.xmi");
    m.source_uri = stored->meta.source_uri;
    out.push_back({id, "", std::move(m)});
  }
  return out;
}

std::string corpus_digest(const std::filesystem::path& index_dir) {
  const auto p = index_dir / "manifest.json";
  if (!std::filesystem::exists(p)) return "";
  return CorpusManifest::from_json(read_file(p)).digest();
}

// Query sets on disk: queries.json lists {id, origin, radius, file, log}
// next to one canonical JSON model per mutant.
void save_mutants(const std::filesystem::path& out_dir, const MutantSet& set) {
  json list = json::array();
  for (const auto& m : set.mutants) {
    const auto file = m.id + ".json";
    write_file(out_dir / file, serialize_model_json(m.query, 2) + "\n");
    list.push_back({{"id", m.id}, {"origin", m.origin}, {"radius", m.radius}, {"file", file}, {"log", m.log}});
  }
  json j = {{"digest", set.digest()},
            {"too_small", set.too_small},
            {"discarded", set.discarded},
            {"mutants", list}};
  write_file(out_dir / "queries.json", j.dump(2) + "\n");
}

std::pair<std::vector<QueryMutant>, std::string> load_mutants(const std::filesystem::path& dir) {
  const auto text = read_file(dir / "queries.json");
  const auto j = json::parse(text);
  std::vector<QueryMutant> out;
  for (const auto& e : j.at("mutants")) {
    QueryMutant m;
    m.id = e.at("id").get<std::string>();
    m.origin = e.at("origin").get<std::string>();
    m.radius = e.at("radius").get<int>();
    m.query = parse_model_json(read_file(dir / e.at("file").get<std::string>()));
    out.push_back(std::move(m));
  }
  return {std::move(out), j.value("digest", sha256_hex(text))};
}

std::vector<int> parse_radii(const std::vector<std::string>& text) {
  std::vector<int> out;
  for (const auto& t : text) {
    if (t == "inf") {
      out.push_back(kUnboundedRadius);
      continue;
    }
    try {
      std::size_t pos = 0;
      const int r = std::stoi(t, &pos);
      if (pos != t.size() || r < 1) throw std::invalid_argument(t);
      out.push_back(r);
    } catch (const std::exception&) {
      throw UsageError("radius must be a positive integer or 'inf', got '" + t + "'");
    }
  }
  return out;
}

void print_search(const json& j, const std::string& format, std::ostream& out) {
  if (format == "json") {
    out << j.dump(2) << "\n";
    return;
  }
  if (format == "csv") {
    out << "rank,id,score\n";
    std::size_t rank = 0;
    for (const auto& r : j["results"]) {
      out << ++rank << "," << csv_cell(r["id"].get<std::string>()) << "," << r["score"].dump() << "\n";
    }
    return;
  }
  std::size_t rank = 0;
  for (const auto& r : j["results"]) {
    out << std::setw(4) << ++rank << "  " << std::setw(10) << number(r["score"].get<double>()) << "  "
        << r["id"].get<std::string>() << "\n";
    if (r.contains("matched_paths")) {
      for (const auto& m : r["matched_paths"]) {
        out << "          " << std::setw(10) << number(m["contribution"].get<double>()) << "  "
            << m["text"].get<std::string>() << "\n";
      }
    }
  }
  const auto& q = j["query"];
  out << "(" << j["results"].size() << " results, " << q["paths"] << " query paths, "
      << number(q["elapsed_ms"].get<double>()) << " ms)\n";
}

HttpServer* active_server = nullptr;

extern "C" void on_stop_signal(int) {
  if (active_server != nullptr) active_server->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure-based search over model repositories"};
  app.name("pathmark");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file with option defaults; flags override it");

  Settings s;
  app.add_option("--index,-i", s.index, "Index directory")->envname("PATHMARK_INDEX")->capture_default_str();
  app.add_option("--format,-f", s.format, "Output format: json, csv or table");
  app.add_option("--b", s.b, "BM25 length normalization")->capture_default_str();
  app.add_option("--z", s.z, "BM25 term-frequency saturation")->capture_default_str();

  auto add_type = [&s](CLI::App* cmd, bool required) {
    auto* o = cmd->add_option("--type,-t", s.type, "Model type (meta-model name)");
    if (required) o->required();
  };
  auto add_seed = [&s](CLI::App* cmd) { cmd->add_option("--seed", s.seed, "Random seed")->capture_default_str(); };

  std::function<void()> action;

  // index
  auto* index_cmd = app.add_subcommand("index", "Crawl a directory and add its models to the index");
  std::string corpus_dir;
  std::vector<std::string> includes{"**/*.json", "**/*.xmi", "**/*.ecore"};
  std::string meta_file;
  IngestOptions ingest;
  add_type(index_cmd, true);
  index_cmd->add_option("corpus", corpus_dir, "Directory to crawl")->required()->check(CLI::ExistingDirectory);
  index_cmd->add_option("--include", includes, "Glob patterns of files to index")->delimiter(',')->capture_default_str();
  index_cmd->add_option("--meta", meta_file, "Tokenizer and filter settings for a new index (meta.json schema)")
      ->check(CLI::ExistingFile);
  index_cmd->add_option("--workers", ingest.workers, "Parser threads (0: all cores)");
  index_cmd->add_option("--batch-size", ingest.batch_size, "Models per write batch")->capture_default_str();
  index_cmd->callback([&] {
    action = [&] {
      IndexMeta defaults;
      if (!meta_file.empty()) defaults = IndexMeta::from_json(read_file(meta_file));
      if (ingest.batch_size == 0) throw UsageError("--batch-size must be positive");
      auto dir = IndexDirectory::open_writer(s.index, defaults);
      auto manifest = crawl_directory(corpus_dir, s.type, includes);
      auto report = index_corpus(dir, manifest, ingest);
      const auto format = pick_format(s, "table");
      if (format == "json") {
        out << report.to_json();
      } else if (format == "csv") {
        out << "indexed,skipped,stop_paths,models,avdl,elapsed_ms\n"
            << report.indexed << "," << report.skipped << "," << report.stop_paths << "," << report.stats.t << ","
            << json(report.stats.avdl()).dump() << "," << json(report.elapsed_ms).dump() << "\n";
      } else {
        out << "indexed " << report.indexed << " models, skipped " << report.skipped << ", " << report.stop_paths
            << " stop paths, " << number(report.elapsed_ms) << " ms\n";
        for (const auto& sk : report.skips) out << "  skipped " << sk.source_path << ": " << sk.reason << "\n";
      }
    };
  });

  // search
  auto* search_cmd = app.add_subcommand("search", "Rank indexed models against a query model");
  std::string query_file;
  std::size_t max_results = kDefaultMaxResults;
  bool explain = false;
  add_type(search_cmd, true);
  search_cmd->add_option("query", query_file, "Query model (.json canonical, otherwise XMI)")
      ->required()
      ->check(CLI::ExistingFile);
  search_cmd->add_option("--max,-n", max_results, "Maximum number of results")->capture_default_str();
  search_cmd->add_flag("--explain", explain, "Show the matched paths of each result");
  search_cmd->callback([&] {
    action = [&] {
      ServiceOptions opt;
      opt.params = s.params();
      auto svc = SearchService::open(s.index, opt);
      auto j = checked(svc.search({read_file(query_file), query_file, s.type, max_results, explain}));
      print_search(j, pick_format(s, "table"), out);
    };
  });

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Label a model by vote of its nearest labeled neighbors");
  std::string labels_file;
  std::size_t k = 5;
  add_type(classify_cmd, true);
  classify_cmd->add_option("query", query_file, "Model to classify")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--labels", labels_file, "CSV of model_id,label")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("-k", k, "Neighbors that vote")->capture_default_str();
  classify_cmd->callback([&] {
    action = [&] {
      if (k == 0) throw UsageError("k must be positive");
      ServiceOptions opt;
      opt.params = s.params();
      auto svc = SearchService::open(s.index, opt);
      svc.set_labels(resolve_labels(s.index, LabeledCorpus::load_csv(labels_file)));
      auto j = checked(svc.classify({read_file(query_file), query_file, s.type, k}));
      const auto format = pick_format(s, "table");
      if (format == "json") {
        out << j.dump(2) << "\n";
      } else if (format == "csv") {
        out << "label,weight\n";
        for (const auto& [label, w] : j["weights"].items()) out << csv_cell(label) << "," << w.dump() << "\n";
      } else {
        out << j["label"].get<std::string>() << "\n";
        for (const auto& n : j["neighbors"]) {
          out << "  " << std::setw(10) << number(n["score"].get<double>()) << "  " << n["label"].get<std::string>()
              << "  " << n["id"].get<std::string>() << "\n";
        }
      }
    };
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API over an index");
  ServiceOptions serve_opt;
  std::string serve_labels;
  serve_cmd->add_option("--host", serve_opt.host, "Listen address")->envname("PATHMARK_HOST")->capture_default_str();
  serve_cmd->add_option("--port,-p", serve_opt.port, "Listen port (0: any free port)")
      ->envname("PATHMARK_PORT")
      ->capture_default_str();
  serve_cmd->add_option("--max-body", serve_opt.max_body, "Largest accepted model in bytes")->capture_default_str();
  serve_cmd->add_option("--cors", serve_opt.cors_origins, "Allowed CORS origins")->delimiter(',')->capture_default_str();
  serve_cmd->add_option("--labels", serve_labels, "CSV of model_id,label enabling /classify")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("-k", serve_opt.default_k, "Default neighbors for /classify")->capture_default_str();
  serve_cmd->callback([&] {
    action = [&] {
      serve_opt.params = s.params();
      auto svc = SearchService::open(s.index, serve_opt);
      if (!serve_labels.empty()) svc.set_labels(resolve_labels(s.index, LabeledCorpus::load_csv(serve_labels)));
      HttpServer server(svc, serve_opt);
      const int port = server.bind();
      if (port < 0) throw UsageError("cannot listen on " + serve_opt.host + ":" + std::to_string(serve_opt.port));
      err << "listening on http://" << serve_opt.host << ":" << port << std::endl;
      active_server = &server;
      std::signal(SIGINT, on_stop_signal);
      std::signal(SIGTERM, on_stop_signal);
      server.listen();
      active_server = nullptr;
    };
  });

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Show index statistics per model type");
  stats_cmd->callback([&] {
    action = [&] {
      auto svc = SearchService::open(s.index);
      auto j = checked(svc.stats());
      const auto format = pick_format(s, "table");
      if (format == "json") {
        out << j.dump(2) << "\n";
        return;
      }
      if (format == "csv") out << "model_type,t,avdl,path_total,unscoreable,stop_paths\n";
      for (const auto& [type, st] : j["model_types"].items()) {
        if (format == "csv") {
          out << csv_cell(type) << "," << st["t"] << "," << st["avdl"].dump() << "," << st["path_total"] << ","
              << st["unscoreable"] << "," << st["stop_paths"] << "\n";
        } else {
          out << type << ": t=" << st["t"] << " avdl=" << number(st["avdl"].get<double>())
              << " stop_paths=" << st["stop_paths"] << " unscoreable=" << st["unscoreable"] << "\n";
        }
      }
      if (format == "table") out << "models: " << j["models"] << "\n";
    };
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluation harness");
  eval_cmd->require_subcommand(1);
  eval_cmd->fallthrough();

  auto* synth_cmd = eval_cmd->add_subcommand("synth", "Write a synthetic Ecore-flavored corpus");
  EcoreCorpusOptions synth_opt;
  std::string out_dir;
  add_seed(synth_cmd);
  synth_cmd->add_option("out", out_dir, "Output directory")->required();
  synth_cmd->add_option("--models", synth_opt.models, "Number of models")->capture_default_str();
  synth_cmd->add_option("--domains", synth_opt.domains, "Number of domains")->capture_default_str();
  synth_cmd->add_option("--variant-rate", synth_opt.variant_rate, "Share of derived models")->capture_default_str();
  synth_cmd->callback([&] {
    action = [&] {
      synth_opt.seed = s.seed;
      LabeledCorpus labels;
      for (const auto& cm : generate_ecore_corpus(synth_opt)) {
        write_file(std::filesystem::path(out_dir) / (cm.id + ".json"), serialize_model_json(cm.model, 2) + "\n");
        labels.labels[cm.id] = cm.label;
      }
      write_file(std::filesystem::path(out_dir) / "labels.csv", labels.to_csv());
      err << "wrote " << labels.size() << " models to " << out_dir << "\n";
    };
  });

  auto* mutate_cmd = eval_cmd->add_subcommand("mutate", "Derive query mutants from the indexed models");
  std::vector<std::string> radii_text{"5", "6", "7"};
  add_type(mutate_cmd, true);
  add_seed(mutate_cmd);
  mutate_cmd->add_option("out", out_dir, "Output directory for the query set")->required();
  mutate_cmd->add_option("--radius", radii_text, "Extraction radii ('inf' for unbounded)")->delimiter(',')->capture_default_str();
  mutate_cmd->callback([&] {
    action = [&] {
      auto corpus = load_indexed(s.index, s.type);
      auto set = generate_mutants(corpus, parse_radii(radii_text), MutationConfig{}, s.seed);
      save_mutants(out_dir, set);
      const auto format = pick_format(s, "table");
      json summary = {{"mutants", set.mutants.size()},
                      {"too_small", set.too_small},
                      {"discarded", set.discarded},
                      {"digest", set.digest()}};
      if (format == "json") {
        out << summary.dump(2) << "\n";
      } else if (format == "csv") {
        out << "mutants,too_small,discarded,digest\n"
            << set.mutants.size() << "," << set.too_small << "," << set.discarded << "," << set.digest() << "\n";
      } else {
        out << set.mutants.size() << " mutants (" << set.too_small << " models too small, " << set.discarded
            << " discarded) written to " << out_dir << "\n";
      }
    };
  });

  auto* mrr_cmd = eval_cmd->add_subcommand("mrr", "Known-item mean reciprocal rank of a query set");
  std::string queries_dir;
  std::string engine_name = "mar";
  std::size_t workers = 0;
  add_type(mrr_cmd, true);
  mrr_cmd->add_option("--queries,-q", queries_dir, "Query set directory")->required()->check(CLI::ExistingDirectory);
  mrr_cmd->add_option("--engine,-e", engine_name, "mar or text")
      ->check(CLI::IsMember({"mar", "text"}))
      ->capture_default_str();
  mrr_cmd->add_option("--workers", workers, "Query threads (0: all cores)");
  mrr_cmd->callback([&] {
    action = [&] {
      auto [mutants, digest] = load_mutants(queries_dir);
      auto dir = IndexDirectory::open_reader(s.index);
      if (!dir.has_type(s.type)) throw UsageError("index has no models of type '" + s.type + "'");
      EvalReport report;
      if (engine_name == "mar") {
        MarSearcher mar(dir.index(s.type), EncodePipeline(dir.meta().filter, dir.meta().tokenizer), s.params());
        report = evaluate_mrr(mutants, mar.engine(), engine_name, workers);
      } else {
        TextBaseline text(load_indexed(s.index, s.type), dir.normalizer(), s.params());
        report = evaluate_mrr(mutants, text.engine(), engine_name, workers);
      }
      report.query_set = digest;
      report.corpus = corpus_digest(s.index);
      const auto format = pick_format(s, "json");
      if (format == "json") {
        out << report.to_json();
      } else if (format == "csv") {
        out << report.to_csv();
      } else {
        out << engine_name << " MRR " << number(report.mrr) << " over " << report.ranks.size() << " queries\n";
        const char* names[] = {"1", "2", "3", "4", "5+", "not found"};
        for (std::size_t i = 0; i < report.histogram.size(); ++i) {
          out << "  " << std::setw(9) << names[i] << "  " << report.histogram[i] << "\n";
        }
      }
    };
  });

  auto* bench_cmd = eval_cmd->add_subcommand("bench", "Query latency as the index grows");
  std::vector<std::size_t> sizes;
  std::string bench_store = "sqlite";
  add_type(bench_cmd, true);
  bench_cmd->add_option("--sizes", sizes, "Index sizes to measure at, ascending (default: whole corpus)")->delimiter(',');
  bench_cmd->add_option("--queries,-q", queries_dir, "Query set directory (default: every tenth corpus model)")
      ->check(CLI::ExistingDirectory);
  bench_cmd->add_option("--store", bench_store, "sqlite or memory")
      ->check(CLI::IsMember({"sqlite", "memory"}))
      ->capture_default_str();
  bench_cmd->callback([&] {
    action = [&] {
      auto corpus = load_indexed(s.index, s.type);
      if (sizes.empty()) sizes = {corpus.size()};
      std::vector<Model> queries;
      if (!queries_dir.empty()) {
        for (auto& m : load_mutants(queries_dir).first) queries.push_back(std::move(m.query));
      } else {
        for (std::size_t i = 0; i < corpus.size(); i += 10) queries.push_back(corpus[i].model);
      }
      auto meta = IndexDirectory::open_reader(s.index).meta();
      std::shared_ptr<OrderedStore> store;
      std::filesystem::path scratch;
      if (bench_store == "memory") {
        store = std::make_shared<MemoryStore>();
      } else {
        scratch = std::filesystem::temp_directory_path() /
                  ("pathmark-bench-" + std::to_string(::getpid()));
        std::filesystem::create_directories(scratch);
        store = std::make_shared<SqliteStore>(scratch / "bench.sqlite", SqliteStore::Mode::read_write);
      }
      LatencyReport report;
      try {
        report = benchmark_latency(corpus, sizes, queries, store, EncodePipeline(meta.filter, meta.tokenizer),
                                   s.params());
      } catch (...) {
        store.reset();
        if (!scratch.empty()) std::filesystem::remove_all(scratch);
        throw;
      }
      store.reset();
      if (!scratch.empty()) std::filesystem::remove_all(scratch);
      const auto format = pick_format(s, "csv");
      if (format == "json") {
        out << report.to_json();
      } else if (format == "csv") {
        out << report.to_csv();
      } else {
        for (const auto& r : report.rows) {
          out << std::setw(7) << r.index_size << "  " << std::setw(6) << to_string(r.bucket) << "  n=" << std::setw(4)
              << r.queries << "  paths " << number(r.paths.mean_ms) << "  get " << number(r.get.mean_ms) << "  score "
              << number(r.score.mean_ms) << "  total " << number(r.total.mean_ms) << " (max "
              << number(r.total.max_ms) << ") ms\n";
        }
      }
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "pathmark: " << e.what() << "\n";
    // Usage of the innermost subcommand that was reached.
    const CLI::App* sub = &app;
    while (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    err << "pathmark: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    err << "pathmark: invalid model: " << e.report().summary() << "\n";
  } catch (const ParseError& e) {
    err << "pathmark: malformed input: " << e.what() << "\n";
  } catch (const UnsupportedFeatureError& e) {
    err << "pathmark: " << e.what() << "\n";
  } catch (const ContractError& e) {
    err << "pathmark: " << e.what() << "\n";
  } catch (const NotFoundError& e) {
    err << "pathmark: " << e.what() << "\n";
  } catch (const UnclassifiableError& e) {
    err << "pathmark: " << e.what() << "\n";
  } catch (const json::exception& e) {
    err << "pathmark: malformed JSON: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "pathmark: internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace pathmark
