#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "pathmark/eval.hpp"
#include "pathmark/ingest.hpp"
#include "pathmark/rng.hpp"

namespace pathmark {

namespace {

// References through which an Ecore object owns other objects.
const std::set<std::string, std::less<>> kContainment = {
    "eStructuralFeatures", "eLiterals", "eClassifiers", "eSubpackages", "eOperations", "eParameters",
    "eAnnotations",        "details",   "contents",     "eGenericType", "eTypeArguments"};

const std::vector<std::string> kRenamable = {"EClass", "EAttribute", "EReference"};

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

const std::string* name_of(const ModelObject& o) {
  const auto* v = o.attribute("name");
  return v != nullptr && !v->empty() ? &v->front() : nullptr;
}

void set_name(ModelObject& o, const std::string& name) {
  for (auto& [attr, values] : o.attributes) {
    if (attr == "name") {
      values = {name};
      return;
    }
  }
  o.add_attribute("name", name);
}

// Mutable view over the model being mutated.
class Work {
 public:
  explicit Work(Model m) : m_(std::move(m)) {}

  Model& model() { return m_; }

  std::vector<ModelObject*> of_class(std::string_view cls) {
    std::vector<ModelObject*> out;
    for (auto& o : m_.objects) {
      if (o.class_name == cls) out.push_back(&o);
    }
    return out;
  }

  std::size_t count(std::string_view cls) const {
    return static_cast<std::size_t>(
        std::count_if(m_.objects.begin(), m_.objects.end(), [&](const ModelObject& o) { return o.class_name == cls; }));
  }

  ModelObject* find(const std::string& id) {
    for (auto& o : m_.objects) {
      if (o.id == id) return &o;
    }
    return nullptr;
  }

  /// Deletes objects with everything they contain, drops references to them
  /// and removes references left without a type.
  void remove(std::set<std::string> ids) {
    while (!ids.empty()) {
      // Close over containment.
      std::deque<std::string> queue(ids.begin(), ids.end());
      while (!queue.empty()) {
        auto* o = find(queue.front());
        queue.pop_front();
        if (o == nullptr) continue;
        for (const auto& [ref, targets] : o->references) {
          if (!kContainment.contains(ref)) continue;
          for (const auto& t : targets) {
            if (ids.insert(t).second) queue.push_back(t);
          }
        }
      }
      std::erase_if(m_.objects, [&](const ModelObject& o) { return ids.contains(o.id); });
      for (auto& o : m_.objects) {
        for (auto& [ref, targets] : o.references) std::erase_if(targets, [&](const std::string& t) { return ids.contains(t); });
        std::erase_if(o.references, [](const auto& kv) { return kv.second.empty(); });
      }
      ids.clear();
      for (const auto& o : m_.objects) {
        if (o.class_name == "EReference" && o.reference("eType") == nullptr) ids.insert(o.id);
      }
    }
  }

  /// Class owning a structural feature, by containment.
  std::map<std::string, std::string> feature_owner() const {
    std::map<std::string, std::string> out;
    for (const auto& o : m_.objects) {
      if (o.class_name != "EClass") continue;
      if (const auto* fs = o.reference("eStructuralFeatures")) {
        for (const auto& f : *fs) out[f] = o.id;
      }
    }
    return out;
  }

 private:
  Model m_;
};

std::size_t up_to(Rng& rng, double rate, std::size_t n) {
  const auto cap = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
  return static_cast<std::size_t>(rng.below(cap + 1));
}

template <typename T>
std::vector<T> take_random(Rng& rng, std::vector<T> pool, std::size_t n) {
  rng.shuffle(pool);
  pool.resize(std::min(n, pool.size()));
  return pool;
}

constexpr int kMeansRuns = 10;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

// One k-means++ seeding followed by Lloyd iterations.
std::vector<std::size_t> kmeans_run(const std::vector<std::vector<double>>& x, std::size_t k, Rng& rng,
                                    double& inertia) {
  const auto n = x.size();
  const auto dim = n == 0 ? 0 : x[0].size();
  const auto& sq = squared_distance;
  // k-means++ seeding.
  std::vector<std::vector<double>> centers;
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  centers.push_back(x[first]);
  chosen[first] = true;
  while (centers.size() < k) {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq(x[i], centers.back()));
      if (!chosen[i]) sum += d2[i];
    }
    std::size_t pick = n;
    if (sum > 0) {
      double r = rng.unit() * sum;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        r -= d2[i];
        pick = i;
        if (r < 0) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) rest.push_back(i);
      }
      pick = rng.pick(rest);
    }
    chosen[pick] = true;
    centers.push_back(x[pick]);
  }

  // Lloyd iterations.
  std::vector<std::size_t> assign(n, k);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = sq(x[i], centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq(x[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += x[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;  // empty clusters keep their center
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
    }
  }

  inertia = 0;
  for (std::size_t i = 0; i < n; ++i) inertia += sq(x[i], centers[assign[i]]);
  return assign;
}

std::string fmt_count(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

}  // namespace

void MutationConfig::check() const {
  if (radius < 1) throw ContractError("radius must be at least 1");
  auto in = [](double v, double hi) { return v >= 0.0 && v <= hi; };
  if (!in(inheritance_rate, 0.20) || !in(class_rate, 0.30) || !in(reference_rate, 0.30) ||
      !in(enum_rate, 0.50) || !in(attribute_rate, 0.30) || !in(rename_rate, 0.30)) {
    throw ContractError("mutation rates outside their bounds");
  }
}

std::map<std::string, std::size_t> name_document_frequency(const std::vector<CorpusModel>& corpus) {
  std::map<std::string, std::size_t> df;
  for (const auto& cm : corpus) {
    std::set<std::string> names;
    for (const auto& o : cm.model.objects) {
      if (const auto* n = name_of(o)) names.insert(lowercase(*n));
    }
    for (const auto& n : names) ++df[n];
  }
  return df;
}

MutationContext mutation_context(const std::vector<CorpusModel>& corpus,
                                 const std::map<std::string, std::size_t>& name_df,
                                 const std::map<std::string, std::size_t>& clusters,
                                 const std::string& origin_id) {
  MutationContext ctx;
  ctx.name_df = name_df;
  auto own = clusters.find(origin_id);
  if (own == clusters.end()) return ctx;
  std::map<std::string, std::set<std::string>> pool;
  for (const auto& cm : corpus) {
    if (cm.id == origin_id) continue;
    auto c = clusters.find(cm.id);
    if (c == clusters.end() || c->second != own->second) continue;
    for (const auto& o : cm.model.objects) {
      if (std::find(kRenamable.begin(), kRenamable.end(), o.class_name) == kRenamable.end()) continue;
      if (const auto* n = name_of(o)) pool[o.class_name].insert(*n);
    }
  }
  for (auto& [cls, names] : pool) ctx.rename_pool[cls].assign(names.begin(), names.end());
  return ctx;
}

QueryMutant mutate(const Model& m, const std::string& origin_id, const MutationConfig& cfg,
                   const MutationContext& ctx) {
  cfg.check();
  Work w(m);
  const auto classes_in = w.count("EClass");
  const auto elements_in = classes_in + w.count("EAttribute") + w.count("EReference");
  if (classes_in < 20 || elements_in < 40) {
    throw MutationRejected(MutationRejected::Reason::too_small,
                           "model too small: " + std::to_string(classes_in) + " classes, " +
                               std::to_string(elements_in) + " elements");
  }
  Rng rng(cfg.seed);
  QueryMutant out;
  out.origin = origin_id;
  out.radius = cfg.radius;

  // 1. Connected subset around the root class; packages renamed.
  std::map<std::string, std::set<std::string>> adj;
  std::map<std::string, std::size_t> degree;
  {
    const auto owner = w.feature_owner();
    for (auto* c : w.of_class("EClass")) {
      adj[c->id];
      degree[c->id];
      if (const auto* sup = c->reference("eSuperTypes")) {
        for (const auto& s : *sup) {
          if (w.find(s) == nullptr || w.find(s)->class_name != "EClass") continue;
          adj[c->id].insert(s);
          adj[s].insert(c->id);
          ++degree[s];
        }
      }
    }
    for (auto* r : w.of_class("EReference")) {
      auto o = owner.find(r->id);
      const auto* type = r->reference("eType");
      if (o == owner.end() || type == nullptr) continue;
      ++degree[o->second];
      for (const auto& t : *type) {
        const auto* target = w.find(t);
        if (target != nullptr && target->class_name == "EClass") adj[o->second].insert(t);
      }
    }
  }
  std::string root;
  std::string root_name;
  {
    std::size_t best = 0;
    for (auto* c : w.of_class("EClass")) {
      const std::string name = name_of(*c) != nullptr ? *name_of(*c) : c->id;
      const auto d = degree[c->id];
      if (root.empty() || d > best || (d == best && name < root_name)) {
        root = c->id;
        root_name = name;
        best = d;
      }
    }
  }
  std::map<std::string, int> dist{{root, 0}};
  for (std::deque<std::string> q{root}; !q.empty(); q.pop_front()) {
    const auto d = dist[q.front()];
    if (d >= cfg.radius) continue;
    for (const auto& n : adj[q.front()]) {
      if (dist.emplace(n, d + 1).second) q.push_back(n);
    }
  }
  {
    std::set<std::string> drop;
    for (auto* c : w.of_class("EClass")) {
      if (!dist.contains(c->id)) drop.insert(c->id);
    }
    w.remove(drop);
    // Data types and enumerations no remaining feature uses.
    std::set<std::string> used;
    for (const auto& o : w.model().objects) {
      if (const auto* t = o.reference("eType")) used.insert(t->begin(), t->end());
    }
    std::set<std::string> orphans;
    for (const auto& o : w.model().objects) {
      if ((o.class_name == "EEnum" || o.class_name == "EDataType") && !used.contains(o.id)) orphans.insert(o.id);
    }
    w.remove(orphans);
    std::size_t p = 0;
    for (auto* pkg : w.of_class("EPackage")) set_name(*pkg, "pkg" + std::to_string(p++));
    out.log.push_back("1 extract: root " + root_name + ", kept " + fmt_count(w.count("EClass"), classes_in) + " classes within radius " +
                      (cfg.radius == kUnboundedRadius ? std::string("unbounded") : std::to_string(cfg.radius)) +
                      ", renamed " + std::to_string(p) + " packages");
  }

  // 2. Inheritance links.
  {
    std::vector<std::pair<std::string, std::string>> links;
    for (auto* c : w.of_class("EClass")) {
      if (const auto* sup = c->reference("eSuperTypes")) {
        for (const auto& s : *sup) links.emplace_back(c->id, s);
      }
    }
    auto gone = take_random(rng, links, up_to(rng, cfg.inheritance_rate, links.size()));
    for (const auto& [sub, sup] : gone) {
      auto* c = w.find(sub);
      for (auto& [ref, targets] : c->references) {
        if (ref == "eSuperTypes") std::erase(targets, sup);
      }
      std::erase_if(c->references, [](const auto& kv) { return kv.second.empty(); });
    }
    out.log.push_back("2 remove inheritance: " + fmt_count(gone.size(), links.size()));
  }

  // 3. Classes, farthest from the root first.
  {
    std::vector<std::string> candidates;
    for (auto* c : w.of_class("EClass")) {
      if (c->id != root) candidates.push_back(c->id);
    }
    const auto total = w.count("EClass");
    const auto n = std::min(up_to(rng, cfg.class_rate, total), candidates.size());
    rng.shuffle(candidates);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const std::string& a, const std::string& b) { return dist.at(a) > dist.at(b); });
    std::set<std::string> drop(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n));
    w.remove(drop);
    out.log.push_back("3 remove classes: " + fmt_count(n, total));
  }

  auto remove_kind = [&](std::string_view cls, double rate, bool exact, const std::string& label) {
    std::vector<std::string> ids;
    for (auto* o : w.of_class(cls)) ids.push_back(o->id);
    const auto n = exact ? static_cast<std::size_t>(std::floor(rate * static_cast<double>(ids.size()) + 1e-9))
                         : up_to(rng, rate, ids.size());
    auto gone = take_random(rng, ids, n);
    w.remove({gone.begin(), gone.end()});
    out.log.push_back(label + fmt_count(gone.size(), ids.size()));
  };

  // 4. References.
  remove_kind("EReference", cfg.reference_rate, false, "4 remove references: ");

  // 5. Enumerations and literals.
  {
    std::vector<std::string> ids;
    for (const auto& o : w.model().objects) {
      if (o.class_name == "EEnum" || o.class_name == "EEnumLiteral") ids.push_back(o.id);
    }
    const auto n = static_cast<std::size_t>(std::floor(cfg.enum_rate * static_cast<double>(ids.size()) + 1e-9));
    auto gone = take_random(rng, ids, n);
    w.remove({gone.begin(), gone.end()});
    out.log.push_back("5 remove enumerations: " + fmt_count(gone.size(), ids.size()));
  }

  // 6. Attributes.
  remove_kind("EAttribute", cfg.attribute_rate, false, "6 remove attributes: ");

  // 7. Rarely named elements.
  {
    std::set<std::string> drop;
    for (const auto& o : w.model().objects) {
      if (o.class_name != "EClass" && o.class_name != "EAttribute" && o.class_name != "EReference" &&
          o.class_name != "EEnum" && o.class_name != "EEnumLiteral") {
        continue;
      }
      const auto* n = name_of(o);
      if (n == nullptr) continue;
      auto df = ctx.name_df.find(lowercase(*n));
      if (df != ctx.name_df.end() && df->second <= cfg.low_df_ceiling) drop.insert(o.id);
    }
    const auto n = drop.size();
    w.remove(std::move(drop));
    out.log.push_back("7 remove rare names: " + std::to_string(n));
  }

  // 8. Renaming from the cluster vocabulary.
  {
    std::vector<std::string> ids;
    for (const auto& o : w.model().objects) {
      if (std::find(kRenamable.begin(), kRenamable.end(), o.class_name) != kRenamable.end() && name_of(o) != nullptr) {
        ids.push_back(o.id);
      }
    }
    auto chosen = take_random(rng, ids, up_to(rng, cfg.rename_rate, ids.size()));
    std::size_t renamed = 0;
    for (const auto& id : chosen) {
      auto* o = w.find(id);
      auto pool = ctx.rename_pool.find(o->class_name);
      if (pool == ctx.rename_pool.end() || pool->second.empty()) continue;
      const auto& name = rng.pick(pool->second);
      if (name == *name_of(*o)) continue;
      set_name(*o, name);
      ++renamed;
    }
    out.log.push_back("8 rename from cluster: " + fmt_count(renamed, ids.size()));
  }

  const auto classes = w.count("EClass");
  const auto refs = w.count("EReference");
  if (classes < 3 || 2 * refs < classes) {
    throw MutationRejected(MutationRejected::Reason::discarded,
                           "mutant discarded: " + std::to_string(classes) + " classes, " + std::to_string(refs) +
                               " references");
  }
  out.query = std::move(w.model());
  out.query.source_uri.clear();
  out.id = origin_id + "@r" + (cfg.radius == kUnboundedRadius ? std::string("inf") : std::to_string(cfg.radius));
  return out;
}

std::size_t default_cluster_count(std::size_t corpus_size) {
  const auto k = std::max<std::size_t>(5, (corpus_size + 19) / 20);
  return std::min(k, corpus_size);
}

std::map<std::string, std::size_t> cluster_names(const std::vector<CorpusModel>& corpus, std::size_t k,
                                                 std::uint64_t seed, const Normalizer& normalizer) {
  if (corpus.empty()) throw ContractError("cannot cluster an empty corpus");
  if (k == 0 || k > corpus.size()) throw ContractError("cluster count must lie in [1, corpus size]");
  const auto n = corpus.size();

  // TF-IDF with smoothed idf, rows L2-normalized.
  std::map<std::string, std::size_t> vocab;
  std::vector<std::map<std::size_t, double>> tf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& o : corpus[i].model.objects) {
      const auto* name = name_of(o);
      if (name == nullptr) continue;
      for (const auto& tok : normalizer.normalize_label(*name)) {
        auto [it, _] = vocab.emplace(tok, vocab.size());
        tf[i][it->second] += 1.0;
      }
    }
  }
  const auto dim = vocab.size();
  std::vector<double> df(dim, 0.0);
  for (const auto& row : tf) {
    for (const auto& kv : row) df[kv.first] += 1.0;
  }
  std::vector<std::vector<double>> x(n, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0;
    for (const auto& [t, f] : tf[i]) {
      const double v = f * (std::log((1.0 + static_cast<double>(n)) / (1.0 + df[t])) + 1.0);
      x[i][t] = v;
      norm += v * v;
    }
    if (norm > 0) {
      norm = std::sqrt(norm);
      for (auto& v : x[i]) v /= norm;
    }
  }
  // Several seeded k-means++ runs; the lowest inertia wins.
  Rng rng(seed);
  std::vector<std::size_t> assign;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < kMeansRuns; ++run) {
    double inertia = 0;
    auto a = kmeans_run(x, k, rng, inertia);
    if (inertia < best_inertia - 1e-12) {
      best_inertia = inertia;
      assign = std::move(a);
    }
  }

  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) out[corpus[i].id] = assign[i];
  return out;
}

std::string MutantSet::digest() const {
  std::string text;
  for (const auto& m : mutants) text += m.id + "\t" + m.origin + "\t" + serialize_model_json(m.query) + "\n";
  return sha256_hex(text);
}

MutantSet generate_mutants(const std::vector<CorpusModel>& corpus, const std::vector<int>& radii,
                           MutationConfig base, std::uint64_t seed) {
  MutantSet out;
  if (corpus.empty()) return out;
  out.clusters = cluster_names(corpus, default_cluster_count(corpus.size()), seed);
  const auto df = name_document_frequency(corpus);
  Rng rng(seed);
  for (const auto& cm : corpus) {
    std::optional<MutationContext> ctx;
    for (int radius : radii) {
      MutationConfig cfg = base;
      cfg.radius = radius;
      cfg.seed = rng.next();
      try {
        if (!ctx) ctx = mutation_context(corpus, df, out.clusters, cm.id);
        out.mutants.push_back(mutate(cm.model, cm.id, cfg, *ctx));
      } catch (const MutationRejected& e) {
        ++(e.reason() == MutationRejected::Reason::too_small ? out.too_small : out.discarded);
      }
    }
  }
  return out;
}

}  // namespace pathmark
