#include "pathmark/paths.hpp"

#include <unordered_map>

namespace pathmark {

bool ModelGraph::attributeless(std::uint32_t v) const {
  if (vertices[v].kind != VertexKind::object_class) return false;
  for (auto e : out[v]) {
    if (vertices[edges[e].target].kind == VertexKind::attribute) return false;
  }
  return true;
}

bool PathString::well_formed() const {
  return labels.size() % 2 == 1 && kinds.size() == labels.size() / 2 + 1;
}

std::string PathString::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i % 2 == 1) {
      out += " -" + labels[i] + "-> ";
    } else if (kinds[i / 2] == VertexKind::attribute) {
      out += '"' + labels[i] + '"';
    } else {
      out += labels[i];
    }
  }
  return out;
}

PathString PathString::of(std::initializer_list<std::string_view> parts) {
  PathString p;
  std::size_t i = 0;
  for (auto part : parts) {
    if (i++ % 2 == 0) {
      bool attr = part.starts_with('@');
      if (attr) part.remove_prefix(1);
      p.kinds.push_back(attr ? VertexKind::attribute : VertexKind::object_class);
    }
    p.labels.emplace_back(part);
  }
  if (!p.well_formed()) throw ContractError("path must alternate vertex/edge labels");
  return p;
}

void BagOfPaths::add(const PathString& p, std::uint64_t n) {
  if (n == 0) return;
  counts_[p] += n;
  total_ += n;
}

void BagOfPaths::add(PathString&& p, std::uint64_t n) {
  if (n == 0) return;
  counts_[std::move(p)] += n;
  total_ += n;
}

std::uint64_t BagOfPaths::erase(const PathString& p) {
  auto it = counts_.find(p);
  if (it == counts_.end()) return 0;
  auto n = it->second;
  total_ -= n;
  counts_.erase(it);
  return n;
}

std::uint64_t BagOfPaths::count(const PathString& p) const {
  auto it = counts_.find(p);
  return it == counts_.end() ? 0 : it->second;
}

void FilterConfig::check() const {
  if (max_path_length < 1) throw ContractError("max_path_length must be >= 1");
}

ModelGraph build_graph(const Model& m, const FilterConfig& cfg) {
  cfg.check();
  ModelGraph g;
  std::unordered_map<std::string_view, std::uint32_t> class_vertex;

  auto add_edge = [&g](std::uint32_t s, std::uint32_t t, const std::string& label, EdgeKind k) {
    g.out[s].push_back(static_cast<std::uint32_t>(g.edges.size()));
    g.edges.push_back({s, t, label, k});
  };

  for (const auto& o : m.objects) {
    if (cfg.excluded_classes.contains(o.class_name)) continue;
    auto v = static_cast<std::uint32_t>(g.vertices.size());
    g.vertices.push_back({VertexKind::object_class, o.class_name, o.id, {}});
    g.out.emplace_back();
    class_vertex.emplace(o.id, v);
  }
  for (const auto& o : m.objects) {
    auto owner = class_vertex.find(o.id);
    if (owner == class_vertex.end()) continue;
    for (const auto& [name, values] : o.attributes) {
      if (cfg.excluded_attributes.contains(name)) continue;
      for (const auto& value : values) {
        auto a = static_cast<std::uint32_t>(g.vertices.size());
        g.vertices.push_back({VertexKind::attribute, value, o.id, name});
        g.out.emplace_back();
        add_edge(owner->second, a, name, EdgeKind::attribute);
        add_edge(a, owner->second, name, EdgeKind::attribute);
      }
    }
  }
  for (const auto& o : m.objects) {
    auto source = class_vertex.find(o.id);
    if (source == class_vertex.end()) continue;
    for (const auto& [name, targets] : o.references) {
      if (cfg.excluded_references.contains(name)) continue;
      for (const auto& t : targets) {
        auto target = class_vertex.find(t);
        if (target == class_vertex.end()) continue;
        add_edge(source->second, target->second, name, EdgeKind::reference);
      }
    }
  }
  return g;
}

namespace {

// Paths are first collected as sequences of interned label ids and turned
// into PathStrings once per distinct sequence.
struct IdSeqHash {
  std::size_t operator()(const std::vector<std::uint32_t>& s) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto x : s) {
      h ^= x;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

class PathCollector {
 public:
  PathCollector(const ModelGraph& g, int max_len) : g_(g), max_len_(max_len) {
    vertex_label_.reserve(g.vertices.size());
    for (const auto& v : g.vertices) {
      vertex_label_.push_back(intern(v.label, v.kind == VertexKind::attribute ? 1 : 2));
    }
    edge_label_.reserve(g.edges.size());
    for (const auto& e : g.edges) edge_label_.push_back(intern(e.label, 0));
    endpoint_.resize(g.vertices.size());
    for (std::uint32_t v = 0; v < g.vertices.size(); ++v) {
      endpoint_[v] = g.vertices[v].kind == VertexKind::attribute || g.attributeless(v);
    }
    on_path_.assign(g.vertices.size(), false);
  }

  BagOfPaths run() {
    for (std::uint32_t v = 0; v < g_.vertices.size(); ++v) {
      const bool is_attr = g_.vertices[v].kind == VertexKind::attribute;
      if (!is_attr && endpoint_[v]) {
        seq_ = {vertex_label_[v]};
        ++found_[seq_];
      }
      if (is_attr) {
        // Attribute value -> owning class.
        for (auto e : g_.out[v]) {
          seq_ = {vertex_label_[v], edge_label_[e], vertex_label_[g_.edges[e].target]};
          ++found_[seq_];
        }
      }
      if (endpoint_[v]) {
        seq_ = {vertex_label_[v]};
        on_path_[v] = true;
        extend(v, 0);
        on_path_[v] = false;
      }
    }

    BagOfPaths bop;
    for (const auto& [ids, n] : found_) {
      PathString p;
      p.labels.reserve(ids.size());
      p.kinds.reserve(ids.size() / 2 + 1);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& [label, tag] = labels_[ids[i]];
        p.labels.push_back(label);
        if (i % 2 == 0) p.kinds.push_back(tag == 1 ? VertexKind::attribute : VertexKind::object_class);
      }
      bop.add(std::move(p), n);
    }
    return bop;
  }

 private:
  const ModelGraph& g_;
  int max_len_;
  std::vector<std::pair<std::string, int>> labels_;
  std::unordered_map<std::string, std::uint32_t> label_ids_;
  std::vector<std::uint32_t> vertex_label_;
  std::vector<std::uint32_t> edge_label_;
  std::vector<bool> endpoint_;
  std::vector<bool> on_path_;
  std::vector<std::uint32_t> seq_;
  std::unordered_map<std::vector<std::uint32_t>, std::uint64_t, IdSeqHash> found_;

  std::uint32_t intern(const std::string& label, int tag) {
    std::string key(1, static_cast<char>('0' + tag));
    key += label;
    auto [it, fresh] = label_ids_.emplace(std::move(key), static_cast<std::uint32_t>(labels_.size()));
    if (fresh) labels_.emplace_back(label, tag);
    return it->second;
  }

  // Depth-first extension of the simple path in seq_ ending at `v`.
  void extend(std::uint32_t v, int depth) {
    if (depth == max_len_) return;
    for (auto e : g_.out[v]) {
      auto u = g_.edges[e].target;
      if (on_path_[u]) continue;
      seq_.push_back(edge_label_[e]);
      seq_.push_back(vertex_label_[u]);
      if (endpoint_[u]) ++found_[seq_];
      on_path_[u] = true;
      extend(u, depth + 1);
      on_path_[u] = false;
      seq_.resize(seq_.size() - 2);
    }
  }
};

}  // namespace

BagOfPaths extract_paths(const ModelGraph& g, const FilterConfig& cfg) {
  cfg.check();
  return PathCollector(g, cfg.max_path_length).run();
}

BagOfPaths model_to_bop(const Model& m, const FilterConfig& cfg) {
  return extract_paths(build_graph(m, cfg), cfg);
}

}  // namespace pathmark
