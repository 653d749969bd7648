#include <expat.h>

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathmark/model.hpp"

namespace pathmark {

namespace {

struct XmlNode {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<std::unique_ptr<XmlNode>> children;
  std::string text;
  XmlNode* parent = nullptr;

  const std::string* attr(std::string_view name) const {
    for (const auto& [k, v] : attrs) {
      if (k == name) return &v;
    }
    return nullptr;
  }
};

struct TreeBuilder {
  std::unique_ptr<XmlNode> root;
  XmlNode* current = nullptr;

  static void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<TreeBuilder*>(data);
    auto node = std::make_unique<XmlNode>();
    node->tag = name;
    for (int i = 0; atts[i] != nullptr; i += 2) node->attrs.emplace_back(atts[i], atts[i + 1]);
    node->parent = self->current;
    XmlNode* raw = node.get();
    if (self->current == nullptr) {
      self->root = std::move(node);
    } else {
      self->current->children.push_back(std::move(node));
    }
    self->current = raw;
  }

  static void on_end(void* data, const XML_Char*) {
    auto* self = static_cast<TreeBuilder*>(data);
    self->current = self->current->parent;
  }

  static void on_text(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<TreeBuilder*>(data);
    if (self->current != nullptr) self->current->text.append(s, static_cast<std::size_t>(len));
  }
};

std::unique_ptr<XmlNode> parse_xml(std::string_view bytes) {
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error("cannot allocate XML parser");
  TreeBuilder builder;
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &TreeBuilder::on_start, &TreeBuilder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &TreeBuilder::on_text);
  if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw ParseError(std::string("malformed XML: ") +
                         XML_ErrorString(XML_GetErrorCode(parser.get())),
                     static_cast<std::size_t>(XML_GetCurrentByteIndex(parser.get())));
  }
  if (!builder.root) throw ParseError("XML document has no root element", 0);
  return std::move(builder.root);
}

std::string_view local_name(std::string_view qname) {
  auto colon = qname.find(':');
  return colon == std::string_view::npos ? qname : qname.substr(colon + 1);
}

std::string_view prefix_of(std::string_view qname) {
  auto colon = qname.find(':');
  return colon == std::string_view::npos ? std::string_view{} : qname.substr(0, colon);
}

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_reserved_attr(std::string_view name) {
  return name.starts_with("xmlns") || name.starts_with("xmi:") || name.starts_with("xsi:");
}

// Containments of the Ecore meta-model whose element type is implied.
const std::map<std::string_view, std::string_view>& ecore_defaults() {
  static const std::map<std::string_view, std::string_view> table = {
      {"eLiterals", "EEnumLiteral"},        {"eAnnotations", "EAnnotation"},
      {"details", "EStringToStringMapEntry"}, {"eOperations", "EOperation"},
      {"eParameters", "EParameter"},        {"eSubpackages", "EPackage"},
      {"eGenericType", "EGenericType"},     {"eTypeArguments", "EGenericType"},
      {"eTypeParameters", "ETypeParameter"},
  };
  return table;
}

// An element that only carries text is a serialized attribute value.
bool is_value_element(const XmlNode& n) {
  return n.attrs.empty() && n.children.empty() && !is_blank(n.text);
}

class XmiReader {
 public:
  Model read(std::string_view bytes) {
    root_ = parse_xml(bytes);
    std::vector<XmlNode*> roots;
    if (local_name(root_->tag) == "XMI" && prefix_of(root_->tag) == "xmi") {
      for (auto& c : root_->children) roots.push_back(c.get());
    } else {
      roots.push_back(root_.get());
    }

    Model m;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      assign_ids(*roots[i], "/" + std::to_string(i));
    }
    roots_ = roots;
    m.model_type = detect_model_type(roots);
    for (auto* r : roots) emit(*r, true, m);

    auto report = validate_model(m);
    if (!report.valid()) throw ValidationError(std::move(report));
    return m;
  }

 private:
  std::unique_ptr<XmlNode> root_;
  std::vector<XmlNode*> roots_;
  std::unordered_map<const XmlNode*, std::string> ids_;
  std::unordered_map<std::string, const XmlNode*> by_id_;

  void assign_ids(const XmlNode& n, const std::string& path) {
    if (n.attr("href") != nullptr) {
      throw UnsupportedFeatureError("cross-document reference href=\"" + *n.attr("href") + "\"");
    }
    const std::string* xmi_id = n.attr("xmi:id");
    std::string id = xmi_id != nullptr ? *xmi_id : path;
    ids_[&n] = id;
    by_id_.emplace(id, &n);
    std::map<std::string, int> per_tag;
    for (const auto& c : n.children) {
      if (is_value_element(*c)) continue;
      if (!is_blank(c->text) && !c->children.empty()) {
        throw UnsupportedFeatureError("mixed text content in <" + c->tag + ">");
      }
      int k = per_tag[c->tag]++;
      assign_ids(*c, path + "/@" + c->tag + "." + std::to_string(k));
    }
  }

  static std::string detect_model_type(const std::vector<XmlNode*>& roots) {
    for (const auto* r : roots) {
      for (const char* key : {"xsi:type", "xmi:type"}) {
        if (const auto* t = r->attr(key); t != nullptr && !prefix_of(*t).empty()) {
          return std::string(prefix_of(*t));
        }
      }
      if (!prefix_of(r->tag).empty()) return std::string(prefix_of(r->tag));
    }
    return "xmi";
  }

  static std::string class_of(const XmlNode& n, bool is_root) {
    for (const char* key : {"xsi:type", "xmi:type"}) {
      if (const auto* t = n.attr(key)) return std::string(local_name(*t));
    }
    if (is_root) return std::string(local_name(n.tag));
    auto it = ecore_defaults().find(n.tag);
    if (it != ecore_defaults().end()) return std::string(it->second);
    std::string name(local_name(n.tag));
    if (!name.empty()) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    return name;
  }

  // Walks a fragment path ("/", "//Name/Sub", "//@feat.2/@x.0", "/1/@a.0").
  const XmlNode* resolve_fragment(std::string_view frag) const {
    if (!frag.starts_with("/") || roots_.empty()) return nullptr;
    frag.remove_prefix(1);
    const XmlNode* node = roots_.front();
    if (frag.starts_with("/")) {
      frag.remove_prefix(1);
    } else {
      // "/k" selects root k; "/" alone the first root.
      auto slash = frag.find('/');
      auto head = frag.substr(0, slash);
      if (!head.empty()) {
        std::size_t k = 0;
        for (char c : head) {
          if (!std::isdigit(static_cast<unsigned char>(c))) return nullptr;
          k = k * 10 + static_cast<std::size_t>(c - '0');
        }
        if (k >= roots_.size()) return nullptr;
        node = roots_[k];
      }
      frag = slash == std::string_view::npos ? std::string_view{} : frag.substr(slash + 1);
    }
    while (!frag.empty()) {
      auto slash = frag.find('/');
      auto seg = frag.substr(0, slash);
      frag = slash == std::string_view::npos ? std::string_view{} : frag.substr(slash + 1);
      if (seg.empty()) continue;
      const XmlNode* next = nullptr;
      if (seg.starts_with("@")) {
        auto dot = seg.rfind('.');
        std::string_view feature = seg.substr(1, dot == std::string_view::npos ? seg.size() : dot - 1);
        int index = 0;
        if (dot != std::string_view::npos) {
          index = 0;
          for (char c : seg.substr(dot + 1)) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return nullptr;
            index = index * 10 + (c - '0');
          }
        }
        int seen = 0;
        for (const auto& c : node->children) {
          if (is_value_element(*c) || c->tag != feature) continue;
          if (seen++ == index) {
            next = c.get();
            break;
          }
        }
      } else {
        for (const auto& c : node->children) {
          if (is_value_element(*c)) continue;
          if (const auto* name = c->attr("name"); name != nullptr && *name == seg) {
            next = c.get();
            break;
          }
        }
      }
      if (next == nullptr) return nullptr;
      node = next;
    }
    return node;
  }

  // Returns resolved target ids when `value` is a reference list, nothing
  // when it is a plain attribute value.
  std::optional<std::vector<std::string>> as_references(const std::string& owner,
                                                        const std::string& attr,
                                                        const std::string& value) const {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < value.size()) {
      while (i < value.size() && std::isspace(static_cast<unsigned char>(value[i]))) ++i;
      std::size_t j = i;
      while (j < value.size() && !std::isspace(static_cast<unsigned char>(value[j]))) ++j;
      if (j > i) tokens.push_back(value.substr(i, j - i));
      i = j;
    }
    if (tokens.empty()) return std::nullopt;

    bool fragment_syntax = false;
    for (const auto& t : tokens) {
      auto hash = t.find('#');
      if (hash != std::string::npos && hash > 0 && t.find('/', hash) != std::string::npos) {
        throw UnsupportedFeatureError("cross-document reference \"" + t + "\" in attribute '" +
                                      attr + "' of '" + owner + "'");
      }
      if (t.starts_with("#") || t.starts_with("//")) fragment_syntax = true;
    }

    std::vector<std::string> targets;
    for (const auto& t : tokens) {
      std::string_view ref = t;
      if (ref.starts_with("#")) ref.remove_prefix(1);
      const XmlNode* target = nullptr;
      if (auto it = by_id_.find(std::string(ref)); it != by_id_.end()) {
        target = it->second;
      } else if (t.starts_with("#") || t.starts_with("//")) {
        target = resolve_fragment(ref);
      }
      if (target == nullptr) {
        if (fragment_syntax) {
          ValidationReport report;
          report.errors.push_back({owner, "dangling reference '" + attr + "' from '" + owner +
                                              "' to '" + t + "'"});
          throw ValidationError(std::move(report));
        }
        return std::nullopt;
      }
      targets.push_back(ids_.at(target));
    }
    return targets;
  }

  void emit(const XmlNode& n, bool is_root, Model& m) {
    ModelObject o;
    o.id = ids_.at(&n);
    o.class_name = class_of(n, is_root);
    for (const auto& [name, value] : n.attrs) {
      if (is_reserved_attr(name)) continue;
      if (auto refs = as_references(o.id, name, value)) {
        for (auto& t : *refs) o.add_reference(name, std::move(t));
      } else {
        o.add_attribute(name, value);
      }
    }
    std::vector<const XmlNode*> contained;
    for (const auto& c : n.children) {
      if (is_value_element(*c)) {
        o.add_attribute(c->tag, c->text);
      } else {
        o.add_reference(c->tag, ids_.at(c.get()));
        contained.push_back(c.get());
      }
    }
    m.objects.push_back(std::move(o));
    for (const auto* c : contained) emit(*c, false, m);
  }
};

}  // namespace

Model parse_model_xmi(std::string_view bytes) { return XmiReader{}.read(bytes); }

}  // namespace pathmark
