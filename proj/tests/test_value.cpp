#include <catch2/catch_amalgamated.hpp>

#include "hearth/error.hpp"
#include "hearth/value.hpp"

using hearth::AttributeValue;
using hearth::Error;

TEST_CASE("plain labels round-trip", "[value]") {
  auto v = AttributeValue::parse("ACTIVE");
  CHECK(v.label == "ACTIVE");
  CHECK(v.qualifier.empty());
  CHECK(v.str() == "ACTIVE");
}

TEST_CASE("qualified values round-trip", "[value]") {
  auto v = AttributeValue::parse("UNLOCKED(owner)");
  CHECK(v.label == "UNLOCKED");
  CHECK(v.qualifier == "owner");
  CHECK(v.str() == "UNLOCKED(owner)");
  CHECK(AttributeValue::parse(v.str()) == v);
}

TEST_CASE("qualifier participates in equality", "[value]") {
  auto owner = AttributeValue::parse("UNLOCKED(owner)");
  auto manual = AttributeValue::parse("UNLOCKED(manual)");
  auto bare = AttributeValue::parse("UNLOCKED");
  CHECK(owner != manual);
  CHECK(owner != bare);
  CHECK(owner == AttributeValue("UNLOCKED", "owner"));
}

TEST_CASE("malformed values are rejected", "[value]") {
  CHECK_THROWS_AS(AttributeValue::parse(""), Error);
  CHECK_THROWS_AS(AttributeValue::parse("X("), Error);
  CHECK_THROWS_AS(AttributeValue::parse("X()"), Error);
  CHECK_THROWS_AS(AttributeValue::parse("(owner)"), Error);
}

TEST_CASE("values order deterministically", "[value]") {
  AttributeValue a("A"), b("A", "x"), c("B");
  CHECK(a < b);
  CHECK(b < c);
}
