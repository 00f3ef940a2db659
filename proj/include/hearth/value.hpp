#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "hearth/error.hpp"

namespace hearth {

/// Logical simulation time in milliseconds.
using TimeMs = std::int64_t;

/// A symbolic device-attribute or AHO state value. The optional qualifier
/// distinguishes otherwise-identical states reached by different methods
/// (UNLOCKED(owner) vs UNLOCKED(manual)); two values compare equal only if
/// both label and qualifier match, and an empty qualifier matches only an
/// empty qualifier.
struct AttributeValue {
  std::string label;
  std::string qualifier;

  AttributeValue() = default;
  AttributeValue(std::string l, std::string q = {})
      : label(std::move(l)), qualifier(std::move(q)) {}

  bool operator==(const AttributeValue&) const = default;
  auto operator<=>(const AttributeValue&) const = default;

  std::string str() const {
    if (qualifier.empty()) return label;
    return label + "(" + qualifier + ")";
  }

  /// Parses the compact "LABEL" or "LABEL(qualifier)" form used in config
  /// files, policy templates, and scenario scripts.
  static AttributeValue parse(const std::string& s) {
    auto open = s.find('(');
    if (open == std::string::npos) {
      if (s.empty()) throw Error(ErrorCode::ParseError, "empty attribute value");
      return AttributeValue(s);
    }
    if (s.back() != ')' || open == 0 || open + 2 > s.size() - 1 + 1)
      throw Error(ErrorCode::ParseError, "malformed attribute value: " + s);
    std::string label = s.substr(0, open);
    std::string qual = s.substr(open + 1, s.size() - open - 2);
    if (qual.empty())
      throw Error(ErrorCode::ParseError, "empty qualifier in: " + s);
    return AttributeValue(std::move(label), std::move(qual));
  }
};

}  // namespace hearth
