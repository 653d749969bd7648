#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "pathmark/paths.hpp"

namespace pathmark {

/// Backslash-escapes the delimiters `(`, `)`, `,` and `\`.
std::string encode_segment(std::string_view label);
/// Inverse of encode_segment; throws ParseError on a dangling or unknown escape.
std::string decode_segment(std::string_view encoded);

/// A path split into a row key (prefix) and a column qualifier (rest).
///
/// Paths starting at an attribute value use their first length-1 sub-path as
/// prefix, `(hang,name,Transition`; paths starting at a class use the class
/// alone, `(Region`. The qualifier holds the remaining labels and the closing
/// parenthesis, or just `)` when nothing remains.
struct SplitKey {
  std::string row;
  std::string qualifier;

  std::string joined() const { return row + qualifier; }

  auto operator<=>(const SplitKey&) const = default;
  bool operator==(const SplitKey&) const = default;
};

SplitKey split_path(const PathString& p);

/// Labels recovered from a split key. Kinds are not encoded in keys; only
/// whether the first vertex is an attribute value follows from the row shape.
struct DecodedPath {
  std::vector<std::string> labels;
  bool starts_with_attribute = false;
};

DecodedPath decode_split_key(const SplitKey& key);

/// Splits a key segment list on unescaped commas (no outer parentheses).
std::vector<std::string> split_segments(std::string_view body);

}  // namespace pathmark
