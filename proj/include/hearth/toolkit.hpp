#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hearth/device_map.hpp"
#include "hearth/error.hpp"
#include "hearth/policy.hpp"
#include "hearth/value.hpp"

namespace hearth {

enum class SourceFormat { AUTO, OCF_JSON, ATTR_LIST, HANDLER_PREAMBLE };

inline SourceFormat source_format_from_string(const std::string& s) {
  if (s == "auto") return SourceFormat::AUTO;
  if (s == "ocf_json") return SourceFormat::OCF_JSON;
  if (s == "attr_list") return SourceFormat::ATTR_LIST;
  if (s == "handler_preamble") return SourceFormat::HANDLER_PREAMBLE;
  throw Error(ErrorCode::ParseError, "unknown source format: " + s);
}

/// "Z-Wave Lock" -> "zwave-lock": lowercase, strip everything but letters,
/// digits and spaces, then hyphenate the spaces.
inline std::string normalize_type_name(const std::string& name) {
  std::string kept;
  for (char ch : name) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c))
      kept += static_cast<char>(std::tolower(c));
    else if (std::isspace(c) && !kept.empty() && kept.back() != ' ')
      kept += ' ';
  }
  while (!kept.empty() && kept.back() == ' ') kept.pop_back();
  for (char& c : kept)
    if (c == ' ') c = '-';
  return kept;
}

struct IngestConflict {
  std::string pair;
  std::string kept;
  std::string dropped;
};

struct IngestResult {
  DeviceAttributeMap map;
  std::vector<IngestConflict> conflicts;

  nlohmann::ordered_json report() const {
    nlohmann::ordered_json j;
    j["types"] = map.type_count();
    j["pairs"] = map.pair_count();
    j["endorsement_pairs"] = map.endorsement_pair_count();
    j["conflicts"] = nlohmann::ordered_json::array();
    for (const auto& c : conflicts)
      j["conflicts"].push_back(
          {{"pair", c.pair}, {"kept", c.kept}, {"dropped", c.dropped}});
    return j;
  }
};

namespace detail {

/// Merge one extracted schema into the map. Sources that disagree on trust
/// are reported; the writable reading wins (claiming more writers is the
/// conservative integrity assumption) until an override settles it.
inline void merge_schema(IngestResult& r, const std::string& type,
                         AttributeSchema schema) {
  const AttributeSchema* existing = r.map.schema(type, schema.attribute);
  if (existing && existing->trust != schema.trust) {
    TrustClass kept = TrustClass::UNTRUSTED;
    TrustClass dropped = existing->trust == TrustClass::UNTRUSTED
                             ? schema.trust
                             : existing->trust;
    r.conflicts.push_back({type + "." + schema.attribute, to_string(kept),
                           to_string(dropped)});
    schema.trust = kept;
  }
  if (existing && schema.values.empty()) schema.values = existing->values;
  if (existing && !schema.neutral) schema.neutral = existing->neutral;
  r.map.add(type, std::move(schema));
}

inline void ingest_ocf(IngestResult& r, const nlohmann::json& doc) {
  for (const auto& [type_name, resources] : doc.items()) {
    std::string type = normalize_type_name(type_name);
    for (const auto& [resource, props] : resources.items()) {
      (void)resource;
      for (const auto& [prop, meta] : props.items()) {
        AttributeSchema s;
        s.attribute = prop;
        bool readonly = meta.contains("readonly") && meta["readonly"].get<bool>();
        s.trust = readonly ? TrustClass::READ_ONLY : TrustClass::UNTRUSTED;
        if (meta.contains("values"))
          s.values = meta["values"].get<std::vector<std::string>>();
        merge_schema(r, type, std::move(s));
      }
    }
  }
}

inline void ingest_attr_list(IngestResult& r, const nlohmann::json& doc) {
  for (const auto& rec : doc) {
    AttributeSchema s;
    s.attribute = rec.at("attribute").get<std::string>();
    bool writable = rec.at("writable").get<bool>();
    s.trust = writable ? TrustClass::UNTRUSTED : TrustClass::READ_ONLY;
    if (rec.contains("values"))
      s.values = rec["values"].get<std::vector<std::string>>();
    merge_schema(r, normalize_type_name(rec.at("type").get<std::string>()),
                 std::move(s));
  }
}

struct CapabilityInfo {
  std::string attribute;
  bool writable;
  std::vector<std::string> values;
};

/// The capability vocabulary handler preambles may declare. Capabilities
/// describe what a device can sense or do; the attribute is the state the
/// platform tracks for it.
inline const std::map<std::string, CapabilityInfo>& capability_table() {
  static const std::map<std::string, CapabilityInfo> table = {
      {"Lock", {"lock", true, {"LOCKED", "UNLOCKED"}}},
      {"Battery", {"battery", false, {"FULL", "OK", "LOW", "CRITICAL"}}},
      {"Switch", {"switch", true, {"ON", "OFF"}}},
      {"Switch Level", {"level", true, {}}},
      {"Motion Sensor", {"motion", false, {"ACTIVE", "INACTIVE"}}},
      {"Contact Sensor", {"contact", false, {"OPEN", "CLOSED"}}},
      {"Presence Sensor", {"presence", false, {"PRESENT", "NOT_PRESENT"}}},
      {"Temperature Measurement", {"temperature", false, {}}},
      {"Illuminance Measurement", {"illuminance", false, {}}},
      {"Relative Humidity Measurement", {"humidity", false, {}}},
      {"Button", {"button", false, {"PRESSED", "HELD", "RELEASED"}}},
      {"Water Sensor", {"water", false, {"DRY", "WET"}}},
      {"Smoke Detector", {"smoke", false, {"CLEAR", "DETECTED"}}},
      {"Valve", {"valve", true, {"OPEN", "CLOSED"}}},
      {"Alarm", {"alarm", true, {"OFF", "SIREN", "STROBE", "BOTH"}}},
      {"Color Control", {"color", true, {}}},
      {"Thermostat Mode", {"thermostatMode", true, {}}},
      {"Energy Meter", {"energy", false, {}}},
      {"Power Meter", {"power", false, {}}},
      {"Refresh", {"", false, {}}},  // no state attribute
  };
  return table;
}

inline void ingest_handler(IngestResult& r, const std::string& text) {
  static const std::regex def_re(R"re(definition\s*\(\s*name:\s*"([^"]+)")re");
  static const std::regex cap_re(R"re(capability\s+"([^"]+)")re");

  std::string current_type;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::smatch m;
    if (std::regex_search(line, m, def_re)) {
      current_type = normalize_type_name(m[1].str());
      continue;
    }
    if (std::regex_search(line, m, cap_re)) {
      if (current_type.empty())
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(lineno) +
                        ": capability outside a definition block");
      auto it = capability_table().find(m[1].str());
      if (it == capability_table().end())
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(lineno) +
                        ": unknown capability \"" + m[1].str() + "\"");
      if (it->second.attribute.empty()) continue;
      AttributeSchema s;
      s.attribute = it->second.attribute;
      s.trust = it->second.writable ? TrustClass::UNTRUSTED
                                    : TrustClass::READ_ONLY;
      s.values = it->second.values;
      merge_schema(r, current_type, std::move(s));
    }
  }
}

inline SourceFormat sniff_format(const std::string& path,
                                 const std::string& text) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".groovy" || ext == ".txt") return SourceFormat::HANDLER_PREAMBLE;
  if (ext == ".json") {
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      return c == '[' ? SourceFormat::ATTR_LIST : SourceFormat::OCF_JSON;
    }
  }
  throw Error(ErrorCode::ParseError, "cannot determine format of " + path);
}

}  // namespace detail

/// Applies the human-curated override file: pairs promoted to DESIGNATED
/// (platform-writable but tamper-denied to integrations) and per-pair
/// neutral reset values.
inline void apply_overrides(DeviceAttributeMap& map, const nlohmann::json& ov) {
  auto split_pair = [](const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == s.size())
      throw Error(ErrorCode::ParseError, "override pair must be type.attribute: " + s);
    return std::pair<std::string, std::string>{s.substr(0, dot), s.substr(dot + 1)};
  };
  if (ov.contains("designated"))
    for (const auto& jp : ov["designated"]) {
      auto [type, attr] = split_pair(jp.get<std::string>());
      const AttributeSchema* s = map.schema(type, attr);
      if (!s)
        throw Error(ErrorCode::UnknownAttribute,
                    "designated override for unknown pair " + type + "." + attr);
      AttributeSchema updated = *s;
      updated.trust = TrustClass::DESIGNATED;
      map.add(type, std::move(updated));
    }
  if (ov.contains("neutral"))
    for (const auto& [pair, label] : ov["neutral"].items()) {
      auto [type, attr] = split_pair(pair);
      const AttributeSchema* s = map.schema(type, attr);
      if (!s)
        throw Error(ErrorCode::UnknownAttribute,
                    "neutral override for unknown pair " + pair);
      AttributeSchema updated = *s;
      updated.neutral = label.get<std::string>();
      map.add(type, std::move(updated));
    }
}

inline void ingest_text(IngestResult& r, const std::string& path,
                        const std::string& text, SourceFormat fmt) {
  if (fmt == SourceFormat::AUTO) fmt = detail::sniff_format(path, text);
  if (fmt == SourceFormat::HANDLER_PREAMBLE) {
    detail::ingest_handler(r, text);
    return;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (fmt == SourceFormat::OCF_JSON)
    detail::ingest_ocf(r, doc);
  else
    detail::ingest_attr_list(r, doc);
}

inline IngestResult ingest_files(const std::vector<std::string>& paths,
                                 SourceFormat fmt,
                                 const std::optional<nlohmann::json>& overrides) {
  IngestResult r;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    ingest_text(r, path, buf.str(), fmt);
  }
  if (overrides) apply_overrides(r.map, *overrides);
  return r;
}

// -- inference tables and template generation ------------------------------

struct Inference {
  std::string device_type;
  std::string attribute;
  AttributeValue value;
  std::string aho;
  std::string target_value;
  bool strong = false;

  std::string pair_str() const { return device_type + "." + attribute; }
};

/// {"aho": ..., "value": ..., "inferences": [{type, attribute, value,
/// strength}, ...]}
inline std::vector<Inference> inferences_from_json(const nlohmann::json& j) {
  std::vector<Inference> out;
  std::string aho = j.at("aho").get<std::string>();
  std::string target = j.at("value").get<std::string>();
  for (const auto& ji : j.at("inferences")) {
    Inference inf;
    inf.device_type = ji.at("type").get<std::string>();
    inf.attribute = ji.at("attribute").get<std::string>();
    inf.value = AttributeValue::parse(ji.at("value").get<std::string>());
    inf.aho = aho;
    inf.target_value = target;
    if (ji.contains("strength"))
      inf.strong = ji["strength"].get<std::string>() == "strong";
    out.push_back(std::move(inf));
  }
  return out;
}

/// One template per non-empty subset of the inference set: 2^n - 1 DNF
/// literals, ids derived from the sorted pair names so regeneration is
/// stable. The optional map rejects inferences over untrusted attributes.
inline std::vector<PolicyTemplate> generate_templates(
    const std::vector<Inference>& inferences,
    const DeviceAttributeMap* map = nullptr) {
  if (inferences.empty())
    throw Error(ErrorCode::InvalidConfig, "empty inference set");
  if (inferences.size() > 16)
    throw Error(ErrorCode::InvalidConfig,
                "inference set too large: " + std::to_string(inferences.size()));

  const std::string& aho = inferences.front().aho;
  const std::string& target = inferences.front().target_value;
  std::set<std::string> pairs;
  for (const auto& inf : inferences) {
    if (inf.aho != aho || inf.target_value != target)
      throw Error(ErrorCode::MixedTarget,
                  inf.aho + "=" + inf.target_value + " vs " + aho + "=" + target);
    if (!pairs.insert(inf.pair_str()).second)
      throw Error(ErrorCode::DuplicateInferencePair, inf.pair_str());
    if (map) {
      const AttributeSchema* s = map->schema(inf.device_type, inf.attribute);
      if (!s) throw Error(ErrorCode::UnknownAttribute, inf.pair_str());
      if (!s->endorsement_capable())
        throw Error(ErrorCode::InvalidConfig,
                    inf.pair_str() + " is not an endorsement attribute");
    }
  }

  std::vector<Inference> sorted = inferences;
  std::sort(sorted.begin(), sorted.end(),
            [](const Inference& a, const Inference& b) {
              return a.pair_str() < b.pair_str();
            });

  std::vector<PolicyTemplate> out;
  const std::size_t n = sorted.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    PolicyTemplate t;
    t.aho = aho;
    t.target_value = target;
    std::string id = aho + "=" + target + ":";
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      if (!first) id += "+";
      first = false;
      id += sorted[i].pair_str();
      t.checks.push_back(
          {sorted[i].device_type, sorted[i].attribute, sorted[i].value});
    }
    t.id = std::move(id);
    t.canonicalize();
    out.push_back(std::move(t));
  }
  return out;
}

// -- template filtering -----------------------------------------------------

struct FilterOptions {
  std::optional<int> min_strong;
  std::optional<std::string> contains_pair;  // "type.attribute"
  std::optional<std::size_t> max_size;
};

struct FilterReport {
  std::size_t input = 0;
  std::size_t output = 0;
};

inline std::vector<PolicyTemplate> filter_templates(
    const std::vector<PolicyTemplate>& templates, const FilterOptions& opt,
    const std::set<std::string>& strong_pairs, FilterReport& report) {
  report.input = templates.size();
  std::vector<PolicyTemplate> out;
  for (const auto& t : templates) {
    if (opt.max_size && t.checks.size() > *opt.max_size) continue;
    if (opt.contains_pair) {
      bool has = false;
      for (const auto& c : t.checks)
        if (c.pair_str() == *opt.contains_pair) has = true;
      if (!has) continue;
    }
    if (opt.min_strong) {
      int strong = 0;
      for (const auto& c : t.checks)
        if (strong_pairs.count(c.pair_str())) ++strong;
      if (strong < *opt.min_strong) continue;
    }
    out.push_back(t);
  }
  report.output = out.size();
  return out;
}

}  // namespace hearth
