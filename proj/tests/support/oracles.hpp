// Independent reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library beyond its
// public data types.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "pathmark/model.hpp"
#include "pathmark/paths.hpp"
#include "pathmark/rng.hpp"

namespace pathmark::testing {

// Every path allowed by the extraction rules, found by trying all vertex
// tuples of each length and every parallel edge between consecutive vertices.
inline BagOfPaths enumerate_paths(const ModelGraph& g, int max_len) {
  const auto n = static_cast<std::uint32_t>(g.vertices.size());
  auto is_attr = [&](std::uint32_t v) { return g.vertices[v].kind == VertexKind::attribute; };
  auto has_attr_neighbour = [&](std::uint32_t v) {
    for (const auto& e : g.edges) {
      if (e.source == v && is_attr(e.target)) return true;
      if (e.target == v && is_attr(e.source)) return true;
    }
    return false;
  };
  auto endpoint = [&](std::uint32_t v) { return is_attr(v) || !has_attr_neighbour(v); };
  auto vertex_path = [&](std::uint32_t v) {
    PathString p;
    p.labels = {g.vertices[v].label};
    p.kinds = {g.vertices[v].kind};
    return p;
  };

  BagOfPaths bop;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!is_attr(v) && endpoint(v)) bop.add(vertex_path(v));
  }

  std::vector<std::uint32_t> tuple;
  // Expands the edge choices along a fixed vertex tuple.
  auto emit = [&](const std::vector<std::uint32_t>& vs) {
    std::vector<PathString> partial{vertex_path(vs[0])};
    for (std::size_t i = 1; i < vs.size(); ++i) {
      std::vector<PathString> next;
      for (const auto& e : g.edges) {
        if (e.source != vs[i - 1] || e.target != vs[i]) continue;
        for (auto p : partial) {
          p.labels.push_back(e.label);
          p.labels.push_back(g.vertices[vs[i]].label);
          p.kinds.push_back(g.vertices[vs[i]].kind);
          next.push_back(std::move(p));
        }
      }
      partial = std::move(next);
    }
    for (auto& p : partial) bop.add(std::move(p));
  };

  for (int len = 1; len <= max_len; ++len) {
    const std::size_t k = static_cast<std::size_t>(len) + 1;
    tuple.assign(k, 0);
    while (true) {
      bool distinct = true;
      for (std::size_t i = 0; i < k && distinct; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          if (tuple[i] == tuple[j]) {
            distinct = false;
            break;
          }
        }
      }
      if (distinct) {
        const bool attr_to_owner = len == 1 && is_attr(tuple[0]) && !is_attr(tuple[1]);
        if (attr_to_owner || (endpoint(tuple.front()) && endpoint(tuple.back()))) emit(tuple);
      }
      std::size_t i = 0;
      while (i < k && ++tuple[i] == n) tuple[i++] = 0;
      if (i == k) break;
    }
  }
  return bop;
}

struct RandomModelOptions {
  std::size_t max_objects = 6;
  std::size_t max_attr_values = 2;
  std::size_t max_refs = 2;
  std::vector<std::string> classes{"State", "Transition", "Region", "Node", "Port"};
  std::vector<std::string> attributes{"name", "kind", "label"};
  std::vector<std::string> references{"source", "target", "owner"};
  std::vector<std::string> words{"alpha", "beta gamma", "Delta", "epsilonZeta", "the", "eta",
                                 "theta", "iota kappa", "lambda", "mu"};
};

inline Model random_model(Rng& rng, const RandomModelOptions& opt, const std::string& type = "toy") {
  Model m;
  m.model_type = type;
  const auto n = 1 + rng.below(opt.max_objects);
  for (std::size_t i = 0; i < n; ++i) {
    ModelObject o;
    o.id = "o" + std::to_string(i);
    o.class_name = rng.pick(opt.classes);
    const auto values = rng.below(opt.max_attr_values + 1);
    for (std::size_t a = 0; a < values; ++a) o.add_attribute(rng.pick(opt.attributes), rng.pick(opt.words));
    m.objects.push_back(std::move(o));
  }
  for (auto& o : m.objects) {
    const auto refs = rng.below(opt.max_refs + 1);
    for (std::size_t r = 0; r < refs; ++r) {
      o.add_reference(rng.pick(opt.references), "o" + std::to_string(rng.below(n)));
    }
  }
  return m;
}

}  // namespace pathmark::testing
