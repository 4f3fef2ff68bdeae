#include "libpin/profile_io.hpp"

#include <json.hpp>

#include "libpin/error.hpp"

namespace libpin {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::schema_violation, what); }

const json& require(const json& object, const char* key) {
  const auto it = object.find(key);
  if (it == object.end()) {
    schema(std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string require_string(const json& object, const char* key) {
  const json& value = require(object, key);
  if (!value.is_string()) {
    schema(std::string("field '") + key + "' must be a string");
  }
  return value.get<std::string>();
}

MethodKey parse_method(const json& j) {
  if (!j.is_object()) schema("method entry must be an object");
  const std::string kind = require_string(j, "kind");
  if (kind != "-" && kind != "+") schema("method kind must be \"-\" or \"+\"");
  std::string selector = require_string(j, "selector");
  if (selector.empty()) schema("method selector must be non-empty");
  return {kind == "+" ? MethodKind::class_method : MethodKind::instance, std::move(selector)};
}

FeatureVector parse_features(const json& j, const std::string& where) {
  if (!j.is_array()) schema("feature list for " + where + " must be an array");
  std::vector<FeatureVector::Entry> entries;
  entries.reserve(j.size());
  for (const auto& item : j) {
    if (!item.is_object()) schema("feature item must be an object");
    const FeatureKind kind = parse_feature_kind(require_string(item, "kind"));
    std::string value = require_string(item, "value");
    const json& count = require(item, "count");
    if (!count.is_number_integer()) schema("feature count must be an integer");
    const auto n = count.get<std::int64_t>();
    if (n < 0) schema("negative feature count in " + where);
    if (n > UINT32_MAX) schema("feature count out of range in " + where);
    FeatureItem key{kind, std::move(value)};
    for (const auto& existing : entries) {
      if (existing.first == key) schema("repeated feature item in " + where);
    }
    entries.emplace_back(std::move(key), static_cast<std::uint32_t>(n));
  }
  return FeatureVector(std::move(entries));
}

ClassNodePtr parse_class(const json& j, bool code_level) {
  if (!j.is_object()) schema("class entry must be an object");
  std::string base = require_string(j, "name");
  std::optional<std::string> category;
  if (const auto it = j.find("category"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) schema("category must be a string");
    category = it->get<std::string>();
  }
  ClassName name(std::move(base), std::move(category));

  const json& methods_json = require(j, "methods");
  if (!methods_json.is_array()) schema("methods of " + name.str() + " must be an array");
  std::vector<MethodKey> methods;
  methods.reserve(methods_json.size());
  for (const auto& m : methods_json) {
    methods.push_back(parse_method(m));
  }

  std::optional<FeatureMap> features;
  if (const auto it = j.find("features"); it != j.end()) {
    if (!code_level) schema("class-level profile class " + name.str() + " carries features");
    if (!it->is_object()) schema("features of " + name.str() + " must be an object");
    features.emplace();
    for (const auto& [key, value] : it->items()) {
      if (key.size() < 3 || (key[0] != '-' && key[0] != '+') || key[1] != ' ') {
        schema("feature key must be \"<kind> <selector>\": '" + key + "'");
      }
      MethodKey method(key[0] == '+' ? MethodKind::class_method : MethodKind::instance, key.substr(2));
      features->emplace(std::move(method), parse_features(value, name.str() + " " + key));
    }
  } else if (code_level) {
    // A class without methods needs no map; one with methods gets an empty
    // map only if the document gave one explicitly.
    if (!methods.empty()) schema("code-level profile class " + name.str() + " lacks features");
    features.emplace();
  }
  return std::make_shared<const ClassNode>(std::move(name), std::move(methods), std::move(features));
}

json method_json(const MethodKey& key) {
  return json{{"kind", key.kind == MethodKind::class_method ? "+" : "-"}, {"selector", key.selector}};
}

}  // namespace

Profile parse_profile(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_document, e.what());
  }
  if (!root.is_object()) schema("profile document must be an object");
  const json& version = require(root, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kProfileFormatVersion) {
    schema("unsupported format_version");
  }
  const Level level = parse_level(require_string(root, "level"));
  const json& classes_json = require(root, "classes");
  if (!classes_json.is_array()) schema("classes must be an array");
  std::vector<ClassNodePtr> classes;
  classes.reserve(classes_json.size());
  for (const auto& c : classes_json) {
    classes.push_back(parse_class(c, level == Level::code_level));
  }
  return Profile(level, std::move(classes));
}

std::string serialize_profile(const Profile& profile) {
  json classes = json::array();
  for (const auto& node : profile.classes()) {
    json c = json::object();
    c["name"] = node->name().base();
    if (node->name().category()) {
      c["category"] = *node->name().category();
    }
    json methods = json::array();
    for (const auto& m : node->methods()) {
      methods.push_back(method_json(m));
    }
    c["methods"] = std::move(methods);
    if (profile.level() == Level::code_level) {
      json features = json::object();
      static const FeatureMap kNone;
      for (const auto& [key, vec] : node->features() ? *node->features() : kNone) {
        json items = json::array();
        for (const auto& [item, count] : vec.entries()) {
          items.push_back(json{{"count", count}, {"kind", to_string(item.kind)}, {"value", item.value}});
        }
        features[std::string(key.kind == MethodKind::class_method ? "+ " : "- ") + key.selector] =
            std::move(items);
      }
      c["features"] = std::move(features);
    }
    classes.push_back(std::move(c));
  }
  json root = json::object();
  root["format_version"] = kProfileFormatVersion;
  root["level"] = to_string(profile.level());
  root["classes"] = std::move(classes);
  return root.dump();
}

}  // namespace libpin
