#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hearth/error.hpp"
#include "hearth/value.hpp"

namespace hearth {

/// Who may legitimately write a device attribute. READ_ONLY attributes are
/// sensor readings only the device itself reports; DESIGNATED attributes may
/// additionally be set by the platform or the local user (but never by
/// third-party integrations); UNTRUSTED attributes are ordinary writable
/// state anyone with a grant can set.
enum class TrustClass { READ_ONLY, DESIGNATED, UNTRUSTED };

inline const char* to_string(TrustClass t) {
  switch (t) {
    case TrustClass::READ_ONLY: return "read_only";
    case TrustClass::DESIGNATED: return "designated";
    case TrustClass::UNTRUSTED: return "untrusted";
  }
  return "?";
}

inline TrustClass trust_class_from_string(const std::string& s) {
  if (s == "read_only") return TrustClass::READ_ONLY;
  if (s == "designated") return TrustClass::DESIGNATED;
  if (s == "untrusted") return TrustClass::UNTRUSTED;
  throw Error(ErrorCode::ParseError, "unknown trust class: " + s);
}

/// Schema for one attribute of a device type: its trust class, the value
/// labels it may take, and an optional neutral label (a reset/idle value
/// that carries no endorsement evidence, e.g. motion INACTIVE).
struct AttributeSchema {
  std::string attribute;
  TrustClass trust = TrustClass::UNTRUSTED;
  std::vector<std::string> values;
  std::optional<std::string> neutral;

  bool endorsement_capable() const {
    return trust == TrustClass::READ_ONLY || trust == TrustClass::DESIGNATED;
  }

  bool allows_label(const std::string& label) const {
    if (values.empty()) return true;
    return std::find(values.begin(), values.end(), label) != values.end();
  }
};

/// The device-attribute map: for every known device type, the attributes it
/// exposes and their trust classes. Built by the spec toolkit from vendor
/// artifacts and loaded by the platform at boot.
class DeviceAttributeMap {
 public:
  void add(const std::string& type, AttributeSchema schema) {
    auto& attrs = types_[type];
    for (auto& existing : attrs) {
      if (existing.attribute == schema.attribute) {
        existing = std::move(schema);
        return;
      }
    }
    attrs.push_back(std::move(schema));
  }

  bool has_type(const std::string& type) const {
    return types_.count(type) > 0;
  }

  const std::vector<AttributeSchema>* attributes(const std::string& type) const {
    auto it = types_.find(type);
    if (it == types_.end()) return nullptr;
    return &it->second;
  }

  const AttributeSchema* schema(const std::string& type,
                                const std::string& attribute) const {
    auto it = types_.find(type);
    if (it == types_.end()) return nullptr;
    for (const auto& a : it->second)
      if (a.attribute == attribute) return &a;
    return nullptr;
  }

  std::vector<std::string> type_names() const {
    std::vector<std::string> out;
    out.reserve(types_.size());
    for (const auto& [name, _] : types_) out.push_back(name);
    return out;
  }

  std::size_t type_count() const { return types_.size(); }

  std::size_t pair_count() const {
    std::size_t n = 0;
    for (const auto& [_, attrs] : types_) n += attrs.size();
    return n;
  }

  std::size_t endorsement_pair_count() const {
    std::size_t n = 0;
    for (const auto& [_, attrs] : types_)
      for (const auto& a : attrs)
        if (a.endorsement_capable()) ++n;
    return n;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["types"] = nlohmann::ordered_json::object();
    for (const auto& [name, attrs] : types_) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& a : attrs) {
        nlohmann::ordered_json ja;
        ja["attribute"] = a.attribute;
        ja["trust"] = to_string(a.trust);
        if (!a.values.empty()) ja["values"] = a.values;
        if (a.neutral) ja["neutral"] = *a.neutral;
        arr.push_back(std::move(ja));
      }
      j["types"][name] = std::move(arr);
    }
    j["summary"] = {{"types", type_count()},
                    {"pairs", pair_count()},
                    {"endorsement_pairs", endorsement_pair_count()}};
    return j;
  }

  static DeviceAttributeMap from_json(const nlohmann::json& j) {
    DeviceAttributeMap m;
    if (!j.contains("types") || !j["types"].is_object())
      throw Error(ErrorCode::InvalidConfig, "device map missing types object");
    for (const auto& [name, attrs] : j["types"].items()) {
      for (const auto& ja : attrs) {
        AttributeSchema s;
        s.attribute = ja.at("attribute").get<std::string>();
        s.trust = trust_class_from_string(ja.at("trust").get<std::string>());
        if (ja.contains("values"))
          s.values = ja["values"].get<std::vector<std::string>>();
        if (ja.contains("neutral"))
          s.neutral = ja["neutral"].get<std::string>();
        m.add(name, std::move(s));
      }
    }
    return m;
  }

 private:
  std::map<std::string, std::vector<AttributeSchema>> types_;
};

}  // namespace hearth
