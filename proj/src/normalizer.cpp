#include "pathmark/normalizer.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <unordered_map>

#include "varint.hpp"

namespace pathmark {

namespace detail {
extern const char kDefaultStopwords[];
}

namespace {

bool is_ascii_space(unsigned char c) { return std::isspace(c) != 0 && c < 0x80; }

// Non-ASCII bytes are treated as word characters.
bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

void split_camel(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t start = 0;
  for (std::size_t i = 1; i < chunk.size(); ++i) {
    const char prev = chunk[i - 1];
    const char cur = chunk[i];
    bool boundary = false;
    if (is_upper(cur) && (is_lower(prev) || is_digit(prev))) boundary = true;
    // "XMLParser": split before the last capital of an acronym.
    if (is_upper(cur) && is_upper(prev) && i + 1 < chunk.size() && is_lower(chunk[i + 1])) {
      boundary = true;
    }
    if (boundary) {
      out.emplace_back(chunk.substr(start, i - start));
      start = i;
    }
  }
  out.emplace_back(chunk.substr(start));
}

}  // namespace

std::string TokenizerConfig::id() const {
  std::string out = lowercase ? "lc" : "keep";
  out += split_camel_case ? "+camel" : "";
  out += splitter == Splitter::whitespace_punctuation ? "+punct" : "+ws";
  out += "/" + stopword_list_id;
  return out;
}

TokenizerConfig TokenizerConfig::from_id(std::string_view id) {
  TokenizerConfig cfg;
  auto slash = id.find('/');
  if (slash == std::string_view::npos) throw ParseError("tokenizer id lacks a stop-word list");
  std::string_view flags = id.substr(0, slash);
  cfg.stopword_list_id = std::string(id.substr(slash + 1));
  cfg.lowercase = flags.starts_with("lc");
  cfg.split_camel_case = flags.find("+camel") != std::string_view::npos;
  cfg.splitter = flags.find("+punct") != std::string_view::npos ? Splitter::whitespace_punctuation
                                                               : Splitter::whitespace;
  if (cfg.id() != id) throw ParseError("unrecognised tokenizer id '" + std::string(id) + "'");
  return cfg;
}

StopWordList StopWordList::parse(std::string id, std::string_view text) {
  StopWordList list;
  list.id_ = std::move(id);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (!line.empty() && !line.starts_with('#')) list.words_.emplace(line);
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return list;
}

std::string_view StopWordList::default_list_text() { return detail::kDefaultStopwords; }

const StopWordList& StopWordList::builtin(std::string_view id) {
  static const StopWordList en = parse(std::string(kDefaultStopwordListId), default_list_text());
  if (id == kDefaultStopwordListId) return en;
  throw NotFoundError("unknown stop-word list '" + std::string(id) + "'");
}

std::vector<std::string> tokenize(std::string_view value, const TokenizerConfig& cfg) {
  std::vector<std::string> chunks;
  std::size_t i = 0;
  auto separator = [&cfg](unsigned char c) {
    if (cfg.splitter == Splitter::whitespace) return is_ascii_space(c);
    return !is_word_byte(c);
  };
  while (i < value.size()) {
    while (i < value.size() && separator(static_cast<unsigned char>(value[i]))) ++i;
    std::size_t j = i;
    while (j < value.size() && !separator(static_cast<unsigned char>(value[j]))) ++j;
    if (j > i) {
      auto chunk = value.substr(i, j - i);
      if (cfg.split_camel_case) {
        split_camel(chunk, chunks);
      } else {
        chunks.emplace_back(chunk);
      }
    }
    i = j;
  }
  if (cfg.lowercase) {
    for (auto& t : chunks) {
      for (auto& c : t) {
        if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
      }
    }
  }
  return chunks;
}

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                          const StopWordList& list) {
  std::erase_if(tokens, [&list](const std::string& t) { return list.contains(t); });
  return tokens;
}

Normalizer::Normalizer(TokenizerConfig cfg)
    : cfg_(std::move(cfg)),
      list_(std::shared_ptr<const StopWordList>(&StopWordList::builtin(cfg_.stopword_list_id),
                                                [](const StopWordList*) {})) {}

Normalizer::Normalizer(TokenizerConfig cfg, std::shared_ptr<const StopWordList> list)
    : cfg_(std::move(cfg)), list_(std::move(list)) {
  if (!list_) throw ContractError("Normalizer needs a stop-word list");
}

std::vector<std::string> Normalizer::normalize_label(std::string_view value) const {
  std::vector<std::string> out;
  for (auto& token : remove_stopwords(tokenize(value, cfg_), *list_)) {
    std::string s = stem(token);
    for (int round = 0; round < 8; ++round) {
      std::string next = stem(s);
      if (next == s) break;
      s = std::move(next);
    }
    if (!s.empty() && !list_->contains(s)) out.push_back(std::move(s));
  }
  return out;
}

BagOfPaths Normalizer::normalize_bop(const BagOfPaths& bop) const {
  std::unordered_map<std::string, std::vector<std::string>> cache;
  auto tokens_of = [&](const std::string& label) -> const std::vector<std::string>& {
    auto it = cache.find(label);
    if (it == cache.end()) it = cache.emplace(label, normalize_label(label)).first;
    return it->second;
  };

  BagOfPaths out;
  std::vector<std::size_t> attr_positions;
  std::vector<std::vector<std::string>> options;
  for (const auto& [path, count] : bop) {
    attr_positions.clear();
    options.clear();
    bool dropped = false;
    for (std::size_t v = 0; v < path.kinds.size(); ++v) {
      if (path.kinds[v] != VertexKind::attribute) continue;
      const auto& toks = tokens_of(path.labels[2 * v]);
      if (toks.empty()) {
        dropped = true;
        break;
      }
      attr_positions.push_back(2 * v);
      options.push_back(toks);
    }
    if (dropped) continue;
    if (options.empty()) {
      out.add(path, count);
      continue;
    }

    // Trim the longest token list until the product fits the replica cap.
    auto product = [&options] {
      std::size_t p = 1;
      for (const auto& o : options) p *= o.size();
      return p;
    };
    while (product() > kMaxPathReplicas) {
      auto longest = std::max_element(options.begin(), options.end(),
                                      [](const auto& a, const auto& b) { return a.size() < b.size(); });
      longest->pop_back();
    }

    std::vector<std::size_t> idx(options.size(), 0);
    while (true) {
      PathString replica = path;
      for (std::size_t a = 0; a < options.size(); ++a) {
        replica.labels[attr_positions[a]] = options[a][idx[a]];
      }
      out.add(std::move(replica), count);
      std::size_t a = 0;
      while (a < idx.size() && ++idx[a] == options[a].size()) idx[a++] = 0;
      if (a == idx.size()) break;
    }
  }
  return out;
}

BagOfPaths normalize_bop(const BagOfPaths& bop, const TokenizerConfig& cfg) {
  return Normalizer(cfg).normalize_bop(bop);
}

StopPathSet compute_stop_paths(const std::map<SplitKey, std::uint64_t>& df,
                               std::uint64_t corpus_size, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ContractError("stop-path threshold must lie in (0, 1]");
  }
  StopPathSet s;
  s.threshold = threshold;
  s.corpus_size = corpus_size;
  if (corpus_size == 0) return s;
  const double cut = threshold * static_cast<double>(corpus_size);
  for (const auto& [key, n] : df) {
    // Tolerate rounding in threshold * size (0.7 * 10 is 6.999...).
    if (static_cast<double>(n) >= cut - 1e-9) s.paths.insert(key);
  }
  return s;
}

BagOfPaths filter_stop_paths(const BagOfPaths& bop, const StopPathSet& stop) {
  if (stop.paths.empty()) return bop;
  BagOfPaths out;
  for (const auto& [path, count] : bop) {
    if (!stop.contains(split_path(path))) out.add(path, count);
  }
  return out;
}

namespace {

using detail::get_bytes;
using detail::get_varint;
using detail::put_bytes;
using detail::put_varint;

constexpr std::string_view kStopPathMagic = "PMSP";

}  // namespace

std::string serialize_stop_paths(const StopPathSet& s) {
  std::string out(kStopPathMagic);
  out.push_back(1);
  std::uint64_t bits = 0;
  static_assert(sizeof(double) == sizeof(bits));
  std::memcpy(&bits, &s.threshold, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  put_varint(out, s.corpus_size);
  put_varint(out, s.paths.size());
  for (const auto& k : s.paths) {
    put_bytes(out, k.row);
    put_bytes(out, k.qualifier);
  }
  return out;
}

StopPathSet deserialize_stop_paths(std::string_view bytes) {
  if (!bytes.starts_with(kStopPathMagic) || bytes.size() < kStopPathMagic.size() + 9) {
    throw ParseError("not a stop-path file", 0);
  }
  std::size_t pos = kStopPathMagic.size();
  if (bytes[pos++] != 1) throw ParseError("unsupported stop-path file version", pos - 1);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * i);
  }
  StopPathSet s;
  std::memcpy(&s.threshold, &bits, sizeof bits);
  s.corpus_size = get_varint(bytes, pos);
  auto n = get_varint(bytes, pos);
  for (std::uint64_t i = 0; i < n; ++i) {
    SplitKey k;
    k.row = std::string(get_bytes(bytes, pos));
    k.qualifier = std::string(get_bytes(bytes, pos));
    s.paths.insert(std::move(k));
  }
  if (pos != bytes.size()) throw ParseError("trailing bytes in stop-path file", pos);
  return s;
}

}  // namespace pathmark
