#include "pathmark/index.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "varint.hpp"

namespace pathmark {

using detail::get_bytes;
using detail::get_varint;
using detail::put_bytes;
using detail::put_varint;
using nlohmann::json;

namespace {

constexpr char kSep = '\x1f';
constexpr char kPayloadVersion = 1;

std::string sidecar_row(const std::string& type, std::string_view what) {
  std::string row = "s:" + type;
  row.push_back(kSep);
  row.append(what);
  return row;
}

std::string posting_prefix(const std::string& type) {
  std::string row = "p:" + type;
  row.push_back(kSep);
  return row;
}

std::string encode_model_record(const ModelMeta& meta, std::uint64_t total) {
  json j = {{"uri", meta.source_uri},
            {"type", meta.model_type},
            {"format", meta.format},
            {"hash", meta.content_hash},
            {"total", total}};
  return j.dump();
}

std::pair<ModelMeta, std::uint64_t> decode_model_record(std::string_view bytes) {
  auto j = json::parse(bytes);
  ModelMeta meta{j.at("uri").get<std::string>(), j.at("type").get<std::string>(),
                 j.at("format").get<std::string>(), j.at("hash").get<std::string>()};
  return {std::move(meta), j.at("total").get<std::uint64_t>()};
}

IndexStats decode_stats(const std::vector<Cell>& cells) {
  IndexStats s;
  for (const auto& c : cells) {
    auto v = std::stoull(c.value);
    if (c.qualifier == "t") s.t = v;
    else if (c.qualifier == "path_total") s.path_total = v;
    else if (c.qualifier == "unscoreable") s.unscoreable = v;
    else if (c.qualifier == "stop_paths") s.stop_paths = v;
  }
  return s;
}

void put_stats(WriteBatch& batch, const std::string& type, const IndexStats& s) {
  auto row = sidecar_row(type, "stats");
  batch.put(row, "t", std::to_string(s.t));
  batch.put(row, "path_total", std::to_string(s.path_total));
  batch.put(row, "unscoreable", std::to_string(s.unscoreable));
  batch.put(row, "stop_paths", std::to_string(s.stop_paths));
}

StopPathSet load_stop_set(StoreSnapshot& snap, const std::string& type) {
  auto cells = snap.get(sidecar_row(type, "stoppaths"), {"set"});
  if (cells.empty()) return {};
  return deserialize_stop_paths(cells.front().value);
}

}  // namespace

std::string encode_payload(const PostingPayload& p) {
  std::string out(1, kPayloadVersion);
  put_varint(out, p.entries.size());
  for (const auto& [id, posting] : p.entries) {
    put_bytes(out, id);
    put_varint(out, posting.count);
    put_varint(out, posting.total);
  }
  return out;
}

PostingPayload decode_payload(std::string_view bytes) {
  if (bytes.empty() || bytes[0] != kPayloadVersion) {
    throw ParseError("unsupported posting payload version", 0);
  }
  std::size_t pos = 1;
  PostingPayload p;
  auto n = get_varint(bytes, pos);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string id(get_bytes(bytes, pos));
    Posting posting;
    posting.count = get_varint(bytes, pos);
    posting.total = get_varint(bytes, pos);
    p.entries.emplace(std::move(id), posting);
  }
  if (pos != bytes.size()) throw ParseError("trailing bytes in posting payload", pos);
  return p;
}

// ---------------------------------------------------------------------------
// IndexReader

IndexReader::IndexReader(std::unique_ptr<StoreSnapshot> snap, std::string model_type)
    : snap_(std::move(snap)), type_(std::move(model_type)) {
  stats_ = decode_stats(snap_->get(sidecar_row(type_, "stats"), {}));
  stop_ = load_stop_set(*snap_, type_);
}

std::map<std::string, PostingPayload> IndexReader::get_postings(
    const std::string& row, const std::vector<std::string>& qualifiers) {
  std::map<std::string, PostingPayload> out;
  if (qualifiers.empty()) return out;
  for (auto& cell : snap_->get(posting_prefix(type_) + row, qualifiers)) {
    out.emplace(std::move(cell.qualifier), decode_payload(cell.value));
  }
  return out;
}

void IndexReader::for_each_posting(
    const std::function<void(const SplitKey&, const PostingPayload&)>& visit) {
  const auto prefix = posting_prefix(type_);
  snap_->scan(prefix, [&](std::string_view row, std::string_view qual, std::string_view value) {
    SplitKey key{std::string(row.substr(prefix.size())), std::string(qual)};
    visit(key, decode_payload(value));
    return true;
  });
}

std::map<SplitKey, std::uint64_t> IndexReader::document_frequencies() {
  std::map<SplitKey, std::uint64_t> df;
  for_each_posting([&df](const SplitKey& k, const PostingPayload& p) {
    df.emplace_hint(df.end(), k, p.entries.size());
  });
  return df;
}

std::optional<StoredModel> IndexReader::model(const std::string& id, bool with_content) {
  auto cells = snap_->get(sidecar_row(type_, "model"), {id});
  if (cells.empty()) return std::nullopt;
  StoredModel m;
  m.id = id;
  std::tie(m.meta, m.total) = decode_model_record(cells.front().value);
  if (with_content) {
    auto raw = snap_->get(sidecar_row(type_, "raw"), {id});
    if (!raw.empty()) m.content = std::move(raw.front().value);
  }
  return m;
}

std::map<std::string, std::uint64_t> IndexReader::totals() {
  std::map<std::string, std::uint64_t> out;
  for (const auto& c : snap_->get(sidecar_row(type_, "model"), {})) {
    out.emplace(c.qualifier, decode_model_record(c.value).second);
  }
  return out;
}

std::vector<std::string> IndexReader::model_ids() {
  std::vector<std::string> out;
  for (const auto& c : snap_->get(sidecar_row(type_, "model"), {})) out.push_back(c.qualifier);
  return out;
}

// ---------------------------------------------------------------------------
// InvertedIndex

InvertedIndex::InvertedIndex(std::shared_ptr<OrderedStore> store, std::string model_type)
    : store_(std::move(store)), type_(std::move(model_type)) {
  if (!store_) throw ContractError("InvertedIndex needs a store");
  if (type_.empty() || type_.find(kSep) != std::string::npos) {
    throw ContractError("invalid model type '" + type_ + "'");
  }
}

std::string InvertedIndex::posting_row(const std::string& row_key) const {
  return posting_prefix(type_) + row_key;
}

IndexReader InvertedIndex::reader() const { return IndexReader(store_->snapshot(), type_); }

void InvertedIndex::index_model(const std::string& id, const BagOfPaths& bop, const ModelMeta& meta,
                                std::string content) {
  std::vector<Entry> one;
  one.push_back({id, bop, meta, std::move(content)});
  index_batch(std::move(one));
}

void InvertedIndex::index_batch(std::vector<Entry> entries) {
  if (entries.empty()) return;
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (e.id.empty()) throw ContractError("model id must not be empty");
    if (!ids.insert(e.id).second) throw ContractError("duplicate model id in batch: " + e.id);
  }

  // Postings to add, grouped by row so each row is read once.
  std::map<std::string, std::map<std::string, std::vector<std::pair<std::string, Posting>>>> adds;
  WriteBatch batch;
  IndexStats stats;
  {
    auto snap = store_->snapshot();
    stats = decode_stats(snap->get(sidecar_row(type_, "stats"), {}));
    auto existing = snap->get(sidecar_row(type_, "model"),
                              std::vector<std::string>(ids.begin(), ids.end()));
    if (!existing.empty()) {
      throw ContractError("model already indexed: " + existing.front().qualifier);
    }
    StopPathSet stop = load_stop_set(*snap, type_);

    for (const auto& e : entries) {
      std::vector<std::pair<SplitKey, std::uint64_t>> kept;
      std::uint64_t total = 0;
      for (const auto& [path, count] : e.bop) {
        auto key = split_path(path);
        if (stop.contains(key)) continue;
        kept.emplace_back(std::move(key), count);
        total += count;
      }
      // Distinct paths may share a key when labels coincide across kinds.
      std::map<SplitKey, std::uint64_t> merged;
      for (auto& [k, c] : kept) merged[std::move(k)] += c;
      for (auto& [k, c] : merged) {
        adds[k.row][k.qualifier].emplace_back(e.id, Posting{c, total});
      }
      batch.put(sidecar_row(type_, "model"), e.id, encode_model_record(e.meta, total));
      batch.put(sidecar_row(type_, "raw"), e.id, e.content);
      stats.t += 1;
      stats.path_total += total;
      if (total == 0) stats.unscoreable += 1;
    }

    for (auto& [row, quals] : adds) {
      std::vector<std::string> wanted;
      wanted.reserve(quals.size());
      for (const auto& q : quals) wanted.push_back(q.first);
      std::map<std::string, PostingPayload> current;
      for (auto& cell : snap->get(posting_row(row), wanted)) {
        current.emplace(std::move(cell.qualifier), decode_payload(cell.value));
      }
      for (auto& [qual, postings] : quals) {
        auto& payload = current[qual];
        for (auto& [id, posting] : postings) payload.entries[id] = posting;
        batch.put(posting_row(row), qual, encode_payload(payload));
      }
    }
  }
  put_stats(batch, type_, stats);
  store_->write(batch);
}

void InvertedIndex::remove_model(const std::string& id) {
  WriteBatch batch;
  {
    auto snap = store_->snapshot();
    auto cells = snap->get(sidecar_row(type_, "model"), {id});
    if (cells.empty()) throw NotFoundError("model not indexed: " + id);
    auto total = decode_model_record(cells.front().value).second;
    IndexStats stats = decode_stats(snap->get(sidecar_row(type_, "stats"), {}));

    const auto prefix = posting_prefix(type_);
    snap->scan(prefix, [&](std::string_view row, std::string_view qual, std::string_view value) {
      auto payload = decode_payload(value);
      if (payload.entries.erase(id) == 0) return true;
      if (payload.entries.empty()) {
        batch.erase(std::string(row), std::string(qual));
      } else {
        batch.put(std::string(row), std::string(qual), encode_payload(payload));
      }
      return true;
    });
    batch.erase(sidecar_row(type_, "model"), id);
    batch.erase(sidecar_row(type_, "raw"), id);
    stats.t -= 1;
    stats.path_total -= total;
    if (total == 0 && stats.unscoreable > 0) stats.unscoreable -= 1;
    put_stats(batch, type_, stats);
  }
  store_->write(batch);
}

StopPathSet InvertedIndex::apply_stop_paths(double threshold) {
  WriteBatch batch;
  StopPathSet result;
  {
    auto snap = store_->snapshot();
    IndexStats stats = decode_stats(snap->get(sidecar_row(type_, "stats"), {}));
    StopPathSet previous = load_stop_set(*snap, type_);
    const auto prefix = posting_prefix(type_);

    std::map<SplitKey, std::uint64_t> df;
    snap->scan(prefix, [&](std::string_view row, std::string_view qual, std::string_view value) {
      // Only the entry count is needed here.
      std::size_t pos = 1;
      if (value.empty() || value[0] != kPayloadVersion) throw ParseError("bad posting payload", 0);
      df.emplace_hint(df.end(), SplitKey{std::string(row.substr(prefix.size())), std::string(qual)},
                      get_varint(value, pos));
      return true;
    });
    result = compute_stop_paths(df, stats.t, threshold);

    // Counts removed per model.
    std::unordered_map<std::string, std::uint64_t> removed;
    for (const auto& key : result.paths) {
      auto cells = snap->get(prefix + key.row, {key.qualifier});
      for (const auto& [id, posting] : decode_payload(cells.front().value).entries) {
        removed[id] += posting.count;
      }
      batch.erase(prefix + key.row, key.qualifier);
    }

    if (!removed.empty()) {
      std::map<std::string, std::uint64_t> new_total;
      for (const auto& c : snap->get(sidecar_row(type_, "model"), {})) {
        auto [meta, total] = decode_model_record(c.value);
        auto it = removed.find(c.qualifier);
        if (it == removed.end()) continue;
        std::uint64_t t = total - it->second;
        new_total.emplace(c.qualifier, t);
        stats.path_total -= it->second;
        if (t == 0 && total != 0) stats.unscoreable += 1;
        batch.put(sidecar_row(type_, "model"), c.qualifier, encode_model_record(meta, t));
      }
      snap->scan(prefix, [&](std::string_view row, std::string_view qual, std::string_view value) {
        SplitKey key{std::string(row.substr(prefix.size())), std::string(qual)};
        if (result.contains(key)) return true;
        auto payload = decode_payload(value);
        bool changed = false;
        for (auto& [id, posting] : payload.entries) {
          auto it = new_total.find(id);
          if (it != new_total.end()) {
            posting.total = it->second;
            changed = true;
          }
        }
        if (changed) batch.put(std::string(row), std::string(qual), encode_payload(payload));
        return true;
      });
    }

    // Earlier stop paths stay stopped; their postings are already gone.
    for (const auto& k : previous.paths) result.paths.insert(k);
    stats.stop_paths = result.paths.size();
    batch.put(sidecar_row(type_, "stoppaths"), "set", serialize_stop_paths(result));
    put_stats(batch, type_, stats);
  }
  store_->write(batch);
  return result;
}

// ---------------------------------------------------------------------------
// IndexMeta

std::string IndexMeta::to_json() const {
  auto names = [](const std::set<std::string, std::less<>>& s) {
    return json(std::vector<std::string>(s.begin(), s.end()));
  };
  json j = {{"format_version", format_version},
            {"tokenizer", tokenizer.id()},
            {"stopword_list", tokenizer.stopword_list_id},
            {"stop_path_threshold", stop_path_threshold},
            {"max_path_length", filter.max_path_length},
            {"excluded_classes", names(filter.excluded_classes)},
            {"excluded_attributes", names(filter.excluded_attributes)},
            {"excluded_references", names(filter.excluded_references)},
            {"model_types", model_types}};
  return j.dump(2) + "\n";
}

IndexMeta IndexMeta::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("meta.json: ") + e.what(), e.byte);
  }
  IndexMeta m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != 1) {
      throw ParseError("unsupported index format version " + std::to_string(m.format_version));
    }
    m.tokenizer = TokenizerConfig::from_id(j.at("tokenizer").get<std::string>());
    if (j.at("stopword_list").get<std::string>() != m.tokenizer.stopword_list_id) {
      throw ParseError("meta.json: stop-word list disagrees with tokenizer id");
    }
    m.stop_path_threshold = j.at("stop_path_threshold").get<double>();
    m.filter.max_path_length = j.value("max_path_length", 4);
    for (const auto& s : j.value("excluded_classes", std::vector<std::string>{})) m.filter.excluded_classes.insert(s);
    for (const auto& s : j.value("excluded_attributes", std::vector<std::string>{})) m.filter.excluded_attributes.insert(s);
    for (const auto& s : j.value("excluded_references", std::vector<std::string>{})) m.filter.excluded_references.insert(s);
    m.model_types = j.value("model_types", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("meta.json: ") + e.what());
  }
  m.filter.check();
  return m;
}

// ---------------------------------------------------------------------------
// IndexDirectory

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StorageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& p, std::string_view bytes) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StorageError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

constexpr std::string_view kStopFileMagic = "PMSF";

}  // namespace

IndexDirectory IndexDirectory::open_writer(const std::filesystem::path& dir, const IndexMeta& defaults) {
  IndexDirectory d;
  d.dir_ = dir;
  std::filesystem::create_directories(dir / "store");
  auto lock_path = dir / "LOCK";
  d.lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (d.lock_fd_ < 0) throw StorageError("cannot open " + lock_path.string());
  if (::flock(d.lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(d.lock_fd_);
    d.lock_fd_ = -1;
    throw StorageError("index " + dir.string() + " is locked by another writer");
  }
  if (std::filesystem::exists(dir / "meta.json")) {
    d.meta_ = IndexMeta::from_json(read_file(dir / "meta.json"));
  } else {
    defaults.filter.check();
    d.meta_ = defaults;
    d.save_meta();
  }
  d.store_ = std::make_shared<SqliteStore>(dir / "store" / "index.sqlite", SqliteStore::Mode::read_write);
  return d;
}

IndexDirectory IndexDirectory::open_reader(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "meta.json")) {
    throw NotFoundError("no index at " + dir.string());
  }
  IndexDirectory d;
  d.dir_ = dir;
  d.meta_ = IndexMeta::from_json(read_file(dir / "meta.json"));
  d.store_ = std::make_shared<SqliteStore>(dir / "store" / "index.sqlite", SqliteStore::Mode::read_only);
  return d;
}

IndexDirectory::IndexDirectory(IndexDirectory&& o) noexcept
    : dir_(std::move(o.dir_)), meta_(std::move(o.meta_)), store_(std::move(o.store_)), lock_fd_(o.lock_fd_) {
  o.lock_fd_ = -1;
}

IndexDirectory& IndexDirectory::operator=(IndexDirectory&& o) noexcept {
  if (this != &o) {
    if (lock_fd_ >= 0) ::close(lock_fd_);
    dir_ = std::move(o.dir_);
    meta_ = std::move(o.meta_);
    store_ = std::move(o.store_);
    lock_fd_ = o.lock_fd_;
    o.lock_fd_ = -1;
  }
  return *this;
}

IndexDirectory::~IndexDirectory() {
  store_.reset();
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

bool IndexDirectory::has_type(std::string_view model_type) const {
  return std::find(meta_.model_types.begin(), meta_.model_types.end(), model_type) !=
         meta_.model_types.end();
}

InvertedIndex IndexDirectory::index(const std::string& model_type) {
  if (!has_type(model_type)) {
    if (!writable()) throw NotFoundError("unknown model type '" + model_type + "'");
    InvertedIndex idx(store_, model_type);  // validates the name
    meta_.model_types.push_back(model_type);
    save_meta();
    return idx;
  }
  return InvertedIndex(store_, model_type);
}

Normalizer IndexDirectory::normalizer() const { return Normalizer(meta_.tokenizer); }

void IndexDirectory::save_meta() { write_file_atomic(dir_ / "meta.json", meta_.to_json()); }

StopPathSet IndexDirectory::finalize(const std::string& model_type) {
  auto set = index(model_type).apply_stop_paths(meta_.stop_path_threshold);
  write_stop_path_file();
  return set;
}

void IndexDirectory::write_stop_path_file() {
  std::string out(kStopFileMagic);
  out.push_back(1);
  put_varint(out, meta_.model_types.size());
  for (const auto& type : meta_.model_types) {
    put_bytes(out, type);
    put_bytes(out, serialize_stop_paths(InvertedIndex(store_, type).reader().stop_paths()));
  }
  write_file_atomic(dir_ / "stoppaths.bin", out);
}

std::map<std::string, StopPathSet> read_stop_path_file(const std::filesystem::path& file) {
  auto bytes = read_file(file);
  std::string_view in(bytes);
  if (!in.starts_with(kStopFileMagic) || in.size() < kStopFileMagic.size() + 1) {
    throw ParseError("not a stop-path file", 0);
  }
  std::size_t pos = kStopFileMagic.size();
  if (in[pos++] != 1) throw ParseError("unsupported stop-path file version", pos - 1);
  std::map<std::string, StopPathSet> out;
  auto n = get_varint(in, pos);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string type(get_bytes(in, pos));
    out.emplace(std::move(type), deserialize_stop_paths(get_bytes(in, pos)));
  }
  if (pos != in.size()) throw ParseError("trailing bytes in stop-path file", pos);
  return out;
}

}  // namespace pathmark
