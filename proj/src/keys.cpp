#include "pathmark/keys.hpp"

namespace pathmark {

std::string encode_segment(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  for (char c : label) {
    if (c == '(' || c == ')' || c == ',' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string decode_segment(std::string_view encoded) {
  std::string out;
  out.reserve(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    char c = encoded[i];
    if (c == '\\') {
      if (i + 1 == encoded.size()) throw ParseError("dangling escape in key segment", i);
      char next = encoded[++i];
      if (next != '(' && next != ')' && next != ',' && next != '\\') {
        throw ParseError("unknown escape in key segment", i);
      }
      out.push_back(next);
    } else if (c == '(' || c == ')' || c == ',') {
      throw ParseError("unescaped delimiter in key segment", i);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

SplitKey split_path(const PathString& p) {
  if (!p.well_formed()) throw ContractError("split_path: malformed path");
  const bool attr_start = p.kinds.front() == VertexKind::attribute;
  if (attr_start && p.length() == 0) {
    throw ContractError("split_path: an attribute value cannot form a path alone");
  }
  const std::size_t prefix_labels = attr_start ? 3 : 1;

  SplitKey key;
  key.row = "(";
  for (std::size_t i = 0; i < prefix_labels; ++i) {
    if (i > 0) key.row += ',';
    key.row += encode_segment(p.labels[i]);
  }
  for (std::size_t i = prefix_labels; i < p.labels.size(); ++i) {
    key.qualifier += ',';
    key.qualifier += encode_segment(p.labels[i]);
  }
  key.qualifier += ')';
  return key;
}

std::vector<std::string> split_segments(std::string_view body) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '\\' && i + 1 < body.size()) {
      current.push_back(c);
      current.push_back(body[++i]);
    } else if (c == ',') {
      out.push_back(decode_segment(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(decode_segment(current));
  return out;
}

DecodedPath decode_split_key(const SplitKey& key) {
  std::string_view row = key.row;
  std::string_view qual = key.qualifier;
  if (!row.starts_with('(')) throw ParseError("row key must start with '('", 0);
  if (!qual.ends_with(')')) throw ParseError("qualifier must end with ')'", qual.size());
  if (qual.size() >= 2 && qual[qual.size() - 2] == '\\') {
    // "\)" is an escaped label character, not the terminator.
    std::size_t slashes = 0;
    for (std::size_t i = qual.size() - 1; i-- > 0 && qual[i] == '\\';) ++slashes;
    if (slashes % 2 == 1) throw ParseError("qualifier must end with an unescaped ')'", qual.size());
  }

  DecodedPath out;
  out.labels = split_segments(row.substr(1));
  if (out.labels.size() == 3) {
    out.starts_with_attribute = true;
  } else if (out.labels.size() != 1) {
    throw ParseError("row key must hold one or three segments", 0);
  }
  qual.remove_suffix(1);
  if (!qual.empty()) {
    if (!qual.starts_with(',')) throw ParseError("qualifier must start with ','", 0);
    auto rest = split_segments(qual.substr(1));
    out.labels.insert(out.labels.end(), rest.begin(), rest.end());
  }
  if (out.labels.size() % 2 == 0) throw ParseError("split key holds an even number of labels", 0);
  return out;
}

}  // namespace pathmark
