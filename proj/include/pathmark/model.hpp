#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pathmark/error.hpp"

namespace pathmark {

/// Name-ordered list of multi-valued features. Insertion order is kept for
/// serialization; equality ignores it.
using FeatureList = std::vector<std::pair<std::string, std::vector<std::string>>>;

struct ModelObject {
  std::string id;
  std::string class_name;
  FeatureList attributes;  // attribute name -> values
  FeatureList references;  // reference name -> target object ids

  const std::vector<std::string>* attribute(std::string_view name) const;
  const std::vector<std::string>* reference(std::string_view name) const;
  /// Appends to the value list of `name`, creating the entry if needed.
  void add_attribute(const std::string& name, std::string value);
  void add_reference(const std::string& name, std::string target);

  friend bool operator==(const ModelObject& a, const ModelObject& b);
};

/// A typed object graph conforming to some meta-model.
struct Model {
  std::string model_type;
  std::vector<ModelObject> objects;
  std::string source_uri;

  const ModelObject* find(std::string_view id) const;

  /// Source URI is provenance, not content; it does not take part.
  friend bool operator==(const Model& a, const Model& b);
};

struct ValidationIssue {
  std::string object_id;
  std::string message;
  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool valid() const { return errors.empty(); }
  std::string summary() const;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Checks every structural invariant of `m`. Never throws.
ValidationReport validate_model(const Model& m);

/// Reads the canonical JSON model format. Throws ParseError on malformed
/// JSON or shape errors, ValidationError when the result is not valid.
Model parse_model_json(std::string_view bytes);

/// Writes the canonical JSON model format; inverse of parse_model_json.
std::string serialize_model_json(const Model& m, int indent = -1);

/// Reads the supported XMI subset:
///  - an optional `xmi:XMI` wrapper whose children are root objects;
///  - class from `xsi:type`/`xmi:type`, the tag of a root element, or a small
///    table of well-known Ecore containments;
///  - nested elements become containment references named after their tag;
///  - XML attributes whose tokens all resolve to objects (xmi:id, `#//...`
///    fragments, positional `//@ref.n` paths) become references, everything
///    else becomes attribute values;
///  - elements without `xmi:id` get the containment path as id
///    (`/0/@region.0/@subvertex.2`).
/// Cross-document references (`href`, `uri#fragment`) raise
/// UnsupportedFeatureError.
Model parse_model_xmi(std::string_view bytes);

/// Picks a parser by file extension (`.json` canonical, anything else XMI).
Model parse_model_file_contents(std::string_view bytes, std::string_view filename);

}  // namespace pathmark
