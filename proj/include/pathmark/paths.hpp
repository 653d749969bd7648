#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pathmark/model.hpp"

namespace pathmark {

enum class VertexKind : std::uint8_t { attribute = 0, object_class = 1 };

enum class EdgeKind : std::uint8_t { attribute = 0, reference = 1 };

struct Vertex {
  VertexKind kind;
  std::string label;      // attribute value or class name
  std::string object_id;  // owning object
  std::string attribute;  // attribute name, empty for class vertices
};

struct Edge {
  std::uint32_t source;
  std::uint32_t target;
  std::string label;  // reference or attribute name
  EdgeKind kind;
};

/// Labeled directed multigraph of a model. Attribute edges exist in both
/// directions; reference edges only in their declared direction.
struct ModelGraph {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<std::vector<std::uint32_t>> out;  // per vertex, outgoing edge indices

  /// True for class vertices with no adjacent attribute vertex.
  bool attributeless(std::uint32_t v) const;
};

/// Alternating vertex/edge labels, starting and ending with a vertex.
struct PathString {
  std::vector<std::string> labels;
  std::vector<VertexKind> kinds;  // one entry per vertex label

  /// Number of edges.
  std::size_t length() const { return labels.size() / 2; }
  const std::string& vertex(std::size_t i) const { return labels[2 * i]; }
  VertexKind vertex_kind(std::size_t i) const { return kinds[i]; }
  const std::string& edge(std::size_t i) const { return labels[2 * i + 1]; }
  bool well_formed() const;

  /// Human-readable form, attribute labels quoted: `"answer" -name-> Transition`.
  std::string to_string() const;

  /// Builds a path from alternating labels; vertex labels prefixed with '@'
  /// are attribute vertices (the '@' is stripped).
  static PathString of(std::initializer_list<std::string_view> parts);

  auto operator<=>(const PathString&) const = default;
  bool operator==(const PathString&) const = default;
};

/// Multiset of paths with cached cardinality.
class BagOfPaths {
 public:
  void add(const PathString& p, std::uint64_t n = 1);
  void add(PathString&& p, std::uint64_t n = 1);
  /// Removes every occurrence of `p`; returns the count removed.
  std::uint64_t erase(const PathString& p);

  std::uint64_t count(const PathString& p) const;
  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  const std::map<PathString, std::uint64_t>& counts() const { return counts_; }

  auto begin() const { return counts_.begin(); }
  auto end() const { return counts_.end(); }

  bool operator==(const BagOfPaths&) const = default;

 private:
  std::map<PathString, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct FilterConfig {
  std::set<std::string, std::less<>> excluded_classes;
  std::set<std::string, std::less<>> excluded_attributes;
  std::set<std::string, std::less<>> excluded_references;
  int max_path_length = 4;

  void check() const;
};

ModelGraph build_graph(const Model& m, const FilterConfig& cfg = {});

/// Bag of paths under the extraction rules:
///  - singleton paths for attribute-less class vertices;
///  - every attribute -> owner-class path of length 1;
///  - every simple path of length 1..max_path_length whose endpoints are each
///    an attribute vertex or an attribute-less class vertex.
BagOfPaths extract_paths(const ModelGraph& g, const FilterConfig& cfg = {});

BagOfPaths model_to_bop(const Model& m, const FilterConfig& cfg = {});

}  // namespace pathmark
