#include "pathmark/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace pathmark {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string>* find_feature(const FeatureList& list,
                                             std::string_view name) {
  for (const auto& [key, values] : list) {
    if (key == name) return &values;
  }
  return nullptr;
}

void add_feature(FeatureList& list, const std::string& name, std::string value) {
  for (auto& [key, values] : list) {
    if (key == name) {
      values.push_back(std::move(value));
      return;
    }
  }
  list.emplace_back(name, std::vector<std::string>{std::move(value)});
}

std::map<std::string, std::vector<std::string>> as_map(const FeatureList& list) {
  return {list.begin(), list.end()};
}

// Canonical string rendering of a JSON scalar attribute value.
std::string render_scalar(const ordered_json& v, const std::string& where) {
  switch (v.type()) {
    case ordered_json::value_t::string:
      return v.get<std::string>();
    case ordered_json::value_t::boolean:
      return v.get<bool>() ? "true" : "false";
    case ordered_json::value_t::number_integer:
    case ordered_json::value_t::number_unsigned:
    case ordered_json::value_t::number_float:
      return v.dump();
    default:
      throw ParseError(where + ": attribute values must be scalars");
  }
}

}  // namespace

const std::vector<std::string>* ModelObject::attribute(std::string_view name) const {
  return find_feature(attributes, name);
}

const std::vector<std::string>* ModelObject::reference(std::string_view name) const {
  return find_feature(references, name);
}

void ModelObject::add_attribute(const std::string& name, std::string value) {
  add_feature(attributes, name, std::move(value));
}

void ModelObject::add_reference(const std::string& name, std::string target) {
  add_feature(references, name, std::move(target));
}

bool operator==(const ModelObject& a, const ModelObject& b) {
  return a.id == b.id && a.class_name == b.class_name &&
         as_map(a.attributes) == as_map(b.attributes) &&
         as_map(a.references) == as_map(b.references);
}

const ModelObject* Model::find(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

bool operator==(const Model& a, const Model& b) {
  return a.model_type == b.model_type && a.objects == b.objects;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& e : errors) {
    if (!first) out << "; ";
    first = false;
    out << (e.object_id.empty() ? std::string("<model>") : e.object_id) << ": "
        << e.message;
  }
  return out.str();
}

ValidationError::ValidationError(ValidationReport report)
    : Error("invalid model: " + report.summary()), report_(std::move(report)) {}

ValidationReport validate_model(const Model& m) {
  ValidationReport report;
  if (m.model_type.empty()) report.errors.push_back({"", "model type is empty"});

  std::unordered_set<std::string> ids;
  for (const auto& o : m.objects) {
    if (o.id.empty()) report.errors.push_back({o.id, "object id is empty"});
    if (!ids.insert(o.id).second) {
      report.errors.push_back({o.id, "duplicate object id"});
    }
  }
  for (const auto& o : m.objects) {
    if (o.class_name.empty()) report.errors.push_back({o.id, "class name is empty"});
    std::set<std::string_view> seen;
    for (const auto& [name, values] : o.attributes) {
      if (name.empty()) report.errors.push_back({o.id, "attribute name is empty"});
      if (values.empty()) {
        report.errors.push_back({o.id, "attribute '" + name + "' has no values"});
      }
      if (!seen.insert(name).second) {
        report.errors.push_back({o.id, "attribute '" + name + "' listed twice"});
      }
    }
    seen.clear();
    for (const auto& [name, targets] : o.references) {
      if (name.empty()) report.errors.push_back({o.id, "reference name is empty"});
      if (targets.empty()) {
        report.warnings.push_back({o.id, "reference '" + name + "' has no targets"});
      }
      if (!seen.insert(name).second) {
        report.errors.push_back({o.id, "reference '" + name + "' listed twice"});
      }
      for (const auto& t : targets) {
        if (!ids.contains(t)) {
          report.errors.push_back(
              {o.id, "dangling reference '" + name + "' from '" + o.id + "' to '" + t + "'"});
        }
      }
    }
  }
  return report;
}

Model parse_model_json(std::string_view bytes) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ParseError("model document must be a JSON object");

  Model m;
  auto type = doc.find("modelType");
  if (type == doc.end() || !type->is_string()) {
    throw ParseError("missing string field 'modelType'");
  }
  m.model_type = type->get<std::string>();

  auto objects = doc.find("objects");
  if (objects == doc.end() || !objects->is_array()) {
    throw ParseError("missing array field 'objects'");
  }
  std::size_t index = 0;
  for (const auto& jo : *objects) {
    const std::string where = "objects[" + std::to_string(index++) + "]";
    if (!jo.is_object()) throw ParseError(where + " is not an object");
    ModelObject o;
    auto id = jo.find("id");
    auto cls = jo.find("class");
    if (id == jo.end() || !id->is_string()) throw ParseError(where + ": missing 'id'");
    if (cls == jo.end() || !cls->is_string()) throw ParseError(where + ": missing 'class'");
    o.id = id->get<std::string>();
    o.class_name = cls->get<std::string>();

    if (auto attrs = jo.find("attrs"); attrs != jo.end()) {
      if (!attrs->is_object()) throw ParseError(where + ": 'attrs' must be an object");
      for (const auto& [name, values] : attrs->items()) {
        std::vector<std::string> rendered;
        if (values.is_array()) {
          for (const auto& v : values) rendered.push_back(render_scalar(v, where));
        } else {
          rendered.push_back(render_scalar(values, where));
        }
        o.attributes.emplace_back(name, std::move(rendered));
      }
    }
    if (auto refs = jo.find("refs"); refs != jo.end()) {
      if (!refs->is_object()) throw ParseError(where + ": 'refs' must be an object");
      for (const auto& [name, targets] : refs->items()) {
        std::vector<std::string> ids;
        if (targets.is_string()) {
          ids.push_back(targets.get<std::string>());
        } else if (targets.is_array()) {
          for (const auto& t : targets) {
            if (!t.is_string()) throw ParseError(where + ": reference targets must be ids");
            ids.push_back(t.get<std::string>());
          }
        } else {
          throw ParseError(where + ": reference targets must be ids");
        }
        o.references.emplace_back(name, std::move(ids));
      }
    }
    m.objects.push_back(std::move(o));
  }

  // Empty attribute lists carry no information; drop them instead of failing.
  for (auto& o : m.objects) {
    std::erase_if(o.attributes, [](const auto& kv) { return kv.second.empty(); });
  }

  auto report = validate_model(m);
  if (!report.valid()) throw ValidationError(std::move(report));
  return m;
}

std::string serialize_model_json(const Model& m, int indent) {
  ordered_json doc;
  doc["modelType"] = m.model_type;
  doc["objects"] = ordered_json::array();
  for (const auto& o : m.objects) {
    ordered_json jo;
    jo["id"] = o.id;
    jo["class"] = o.class_name;
    if (!o.attributes.empty()) {
      ordered_json attrs = ordered_json::object();
      for (const auto& [name, values] : o.attributes) attrs[name] = values;
      jo["attrs"] = std::move(attrs);
    }
    if (!o.references.empty()) {
      ordered_json refs = ordered_json::object();
      for (const auto& [name, targets] : o.references) refs[name] = targets;
      jo["refs"] = std::move(refs);
    }
    doc["objects"].push_back(std::move(jo));
  }
  return doc.dump(indent);
}

Model parse_model_file_contents(std::string_view bytes, std::string_view filename) {
  if (filename.ends_with(".json")) return parse_model_json(bytes);
  return parse_model_xmi(bytes);
}

}  // namespace pathmark
