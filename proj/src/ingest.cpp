#include "pathmark/ingest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace pathmark {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StorageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_of(std::string_view path) { return path.ends_with(".json") ? "json" : "xmi"; }

bool match_segment(std::string_view pat, std::string_view s) {
  // Iterative wildcard match within one segment.
  std::size_t p = 0, i = 0, star = std::string_view::npos, mark = 0;
  while (i < s.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == s[i])) {
      ++p;
      ++i;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = i;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      i = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

std::vector<std::string_view> segments(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto slash = s.find('/', start);
    out.push_back(s.substr(start, slash == std::string_view::npos ? s.size() - start : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

bool match_segments(const std::vector<std::string_view>& pat, std::size_t pi,
                    const std::vector<std::string_view>& path, std::size_t si) {
  if (pi == pat.size()) return si == path.size();
  if (pat[pi] == "**") {
    for (std::size_t k = si; k <= path.size(); ++k) {
      if (match_segments(pat, pi + 1, path, k)) return true;
    }
    return false;
  }
  if (si == path.size()) return false;
  return match_segment(pat[pi], path[si]) && match_segments(pat, pi + 1, path, si + 1);
}

json entry_json(const ManifestEntry& e) {
  return {{"source_path", e.source_path},
          {"model_type", e.model_type},
          {"model_id", e.model_id},
          {"content_hash", e.content_hash},
          {"size", e.size}};
}

json skips_json(const std::vector<SkipRecord>& skips) {
  json arr = json::array();
  for (const auto& s : skips) arr.push_back({{"source_path", s.source_path}, {"reason", s.reason}});
  return arr;
}

json stats_json(const IndexStats& s) {
  return {{"t", s.t},
          {"avdl", s.avdl()},
          {"path_total", s.path_total},
          {"unscoreable", s.unscoreable},
          {"stop_paths", s.stop_paths}};
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

bool glob_match(std::string_view pattern, std::string_view path) {
  return match_segments(segments(pattern), 0, segments(path), 0);
}

std::string CorpusManifest::to_json() const {
  json entries_json = json::array();
  for (const auto& e : entries) entries_json.push_back(entry_json(e));
  json j = {{"root", root}, {"created", created}, {"entries", entries_json}, {"skipped", skips_json(skipped)}};
  return j.dump(2) + "\n";
}

CorpusManifest CorpusManifest::from_json(std::string_view text) {
  CorpusManifest m;
  try {
    auto j = json::parse(text);
    m.root = j.value("root", "");
    m.created = j.value("created", "");
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("source_path").get<std::string>(), e.at("model_type").get<std::string>(),
                           e.at("model_id").get<std::string>(), e.at("content_hash").get<std::string>(),
                           e.value("size", std::uint64_t{0})});
    }
    for (const auto& s : j.value("skipped", json::array())) {
      m.skipped.push_back({s.at("source_path").get<std::string>(), s.at("reason").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string CorpusManifest::digest() const {
  std::string text;
  for (const auto& e : entries) text += e.model_type + "\t" + e.model_id + "\t" + e.content_hash + "\n";
  return sha256_hex(text);
}

CorpusManifest crawl_directory(const std::filesystem::path& root, const std::string& model_type,
                               const std::vector<std::string>& include_globs) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw NotFoundError("corpus root is not a directory: " + root.string());
  std::vector<std::string> files;
  for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file()) continue;
    auto rel = fs::relative(it->path(), root).generic_string();
    for (const auto& g : include_globs) {
      if (glob_match(g, rel)) {
        files.push_back(rel);
        break;
      }
    }
  }
  std::sort(files.begin(), files.end());

  CorpusManifest m;
  m.root = fs::absolute(root).lexically_normal().string();
  m.created = utc_now();
  std::set<std::string> hashes;
  for (const auto& rel : files) {
    std::error_code ec;
    auto size = fs::file_size(root / rel, ec);
    if (ec) {
      m.skipped.push_back({rel, "unreadable: " + ec.message()});
      continue;
    }
    if (size > kMaxModelBytes) {
      m.skipped.push_back({rel, "larger than 32 MiB"});
      continue;
    }
    std::string bytes;
    try {
      bytes = read_file(root / rel);
    } catch (const StorageError& e) {
      m.skipped.push_back({rel, std::string("unreadable: ") + e.what()});
      continue;
    }
    auto hash = sha256_hex(bytes);
    if (!hashes.insert(hash).second) {
      m.skipped.push_back({rel, "duplicate content"});
      continue;
    }
    auto stem = fs::path(rel).stem().string();
    m.entries.push_back({rel, model_type, hash.substr(0, 12) + "-" + stem, hash, size});
  }
  return m;
}

std::string IndexReport::to_json() const {
  json j = {{"indexed", indexed},
            {"skipped", skipped},
            {"skips", skips_json(skips)},
            {"stop_paths", stop_paths},
            {"elapsed_ms", elapsed_ms},
            {"stats", stats_json(stats)}};
  return j.dump(2) + "\n";
}

IndexReport index_corpus(IndexDirectory& dir, const CorpusManifest& manifest, const IngestOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  IndexReport report;
  report.skips = manifest.skipped;

  // Entries grouped by model type, each type written through its own index.
  std::map<std::string, std::vector<const ManifestEntry*>> by_type;
  for (const auto& e : manifest.entries) by_type[e.model_type].push_back(&e);

  EncodePipeline pipeline(dir.meta().filter, dir.meta().tokenizer);
  const std::filesystem::path root = manifest.root;
  const std::size_t workers = std::max<std::size_t>(
      1, options.workers != 0 ? options.workers : std::thread::hardware_concurrency());
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);

  std::vector<ManifestEntry> indexed_entries;
  for (const auto& [type, entries] : by_type) {
    auto index = dir.index(type);
    std::set<std::string> known;
    for (auto& id : index.reader().model_ids()) known.insert(std::move(id));

    for (std::size_t begin = 0; begin < entries.size(); begin += batch_size) {
      const std::size_t end = std::min(entries.size(), begin + batch_size);
      struct Slot {
        std::optional<InvertedIndex::Entry> entry;
        std::string error;
      };
      std::vector<Slot> slots(end - begin);
      std::atomic<std::size_t> next{begin};
      auto work = [&] {
        for (std::size_t i = next++; i < end; i = next++) {
          const auto& e = *entries[i];
          auto& slot = slots[i - begin];
          if (known.contains(e.model_id)) {
            slot.error = "already indexed: " + e.model_id;
            continue;
          }
          try {
            auto bytes = read_file(root / e.source_path);
            if (sha256_hex(bytes) != e.content_hash) throw Error("content changed since crawl");
            auto model = parse_model_file_contents(bytes, e.source_path);
            ModelMeta meta{e.source_path, type, format_of(e.source_path), e.content_hash};
            slot.entry = InvertedIndex::Entry{e.model_id, pipeline.encode(model), std::move(meta),
                                              std::move(bytes)};
          } catch (const std::exception& ex) {
            slot.error = ex.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (std::size_t w = 1; w < std::min(workers, end - begin); ++w) pool.emplace_back(work);
      work();
      for (auto& t : pool) t.join();

      std::vector<InvertedIndex::Entry> batch;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].entry) {
          known.insert(slots[i].entry->id);
          batch.push_back(std::move(*slots[i].entry));
          indexed_entries.push_back(*entries[begin + i]);
        } else {
          report.skips.push_back({entries[begin + i]->source_path, slots[i].error});
        }
      }
      report.indexed += batch.size();
      index.index_batch(std::move(batch));
    }
    if (options.finalize) dir.finalize(type);
  }
  if (options.finalize && by_type.empty()) dir.write_stop_path_file();

  // Append to the manifest stored with the index.
  const auto manifest_path = dir.path() / "manifest.json";
  CorpusManifest stored;
  if (std::filesystem::exists(manifest_path)) stored = CorpusManifest::from_json(read_file(manifest_path));
  stored.root = manifest.root;
  stored.created = manifest.created;
  stored.entries.insert(stored.entries.end(), indexed_entries.begin(), indexed_entries.end());
  stored.skipped.insert(stored.skipped.end(), report.skips.begin(), report.skips.end());
  {
    auto tmp = manifest_path;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << stored.to_json();
    out.close();
    std::filesystem::rename(tmp, manifest_path);
  }

  report.skipped = report.skips.size();
  for (const auto& [type, entries] : by_type) {
    const auto s = dir.index(type).reader().stats();
    report.stats.t += s.t;
    report.stats.path_total += s.path_total;
    report.stats.unscoreable += s.unscoreable;
    report.stats.stop_paths += s.stop_paths;
  }
  report.stop_paths = report.stats.stop_paths;
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<AuditMismatch> audit_models(IndexDirectory& dir, const std::string& model_type,
                                        const std::vector<std::string>& ids) {
  EncodePipeline pipeline(dir.meta().filter, dir.meta().tokenizer);
  auto reader = dir.index(model_type).reader();
  std::vector<AuditMismatch> out;

  std::map<std::string, std::map<SplitKey, std::uint64_t>> expected;
  std::map<std::string, std::uint64_t> expected_total;
  for (const auto& id : ids) {
    auto stored = reader.model(id);
    if (!stored) {
      out.push_back({id, "not indexed"});
      continue;
    }
    auto bop = filter_stop_paths(
        pipeline.encode(parse_model_file_contents(stored->content, stored->meta.source_uri)),
        reader.stop_paths());
    auto& keys = expected[id];
    for (const auto& [p, n] : bop) keys[split_path(p)] += n;
    expected_total[id] = bop.total();
    if (stored->total != bop.total()) {
      out.push_back({id, "stored total " + std::to_string(stored->total) + " != " + std::to_string(bop.total())});
    }
  }

  std::map<std::string, std::map<SplitKey, Posting>> found;
  reader.for_each_posting([&](const SplitKey& k, const PostingPayload& p) {
    for (const auto& [id, posting] : p.entries) {
      if (expected.contains(id)) found[id][k] = posting;
    }
  });
  for (const auto& [id, keys] : expected) {
    const auto& got = found[id];
    for (const auto& [k, n] : keys) {
      auto it = got.find(k);
      if (it == got.end()) {
        out.push_back({id, "missing posting " + k.joined()});
      } else if (it->second.count != n || it->second.total != expected_total[id]) {
        out.push_back({id, "posting " + k.joined() + " holds (" + std::to_string(it->second.count) + ", " +
                               std::to_string(it->second.total) + ")"});
      }
    }
    for (const auto& [k, posting] : got) {
      if (!keys.contains(k)) out.push_back({id, "unexpected posting " + k.joined()});
    }
  }
  return out;
}

}  // namespace pathmark
