#include <catch2/catch_amalgamated.hpp>

#include "hearth/device_map.hpp"

#include "support.hpp"

using namespace hearth;

TEST_CASE("trust class round-trips through strings", "[device_map]") {
  for (auto t : {TrustClass::READ_ONLY, TrustClass::DESIGNATED,
                 TrustClass::UNTRUSTED})
    CHECK(trust_class_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(trust_class_from_string("writable"), Error);
}

TEST_CASE("endorsement capability follows the trust class", "[device_map]") {
  AttributeSchema s;
  s.trust = TrustClass::READ_ONLY;
  CHECK(s.endorsement_capable());
  s.trust = TrustClass::DESIGNATED;
  CHECK(s.endorsement_capable());
  s.trust = TrustClass::UNTRUSTED;
  CHECK_FALSE(s.endorsement_capable());
}

TEST_CASE("empty value domain admits any label", "[device_map]") {
  AttributeSchema s;
  CHECK(s.allows_label("anything"));
  s.values = {"ON", "OFF"};
  CHECK(s.allows_label("ON"));
  CHECK_FALSE(s.allows_label("HALF"));
}

TEST_CASE("adding a schema twice replaces it", "[device_map]") {
  DeviceAttributeMap m;
  m.add("lamp", {"switch", TrustClass::UNTRUSTED, {"ON", "OFF"}, {}});
  m.add("lamp", {"switch", TrustClass::READ_ONLY, {"ON", "OFF"}, {}});
  REQUIRE(m.pair_count() == 1);
  CHECK(m.schema("lamp", "switch")->trust == TrustClass::READ_ONLY);
}

TEST_CASE("counts aggregate across types", "[device_map]") {
  DeviceAttributeMap m;
  m.add("a", {"x", TrustClass::READ_ONLY, {}, {}});
  m.add("a", {"y", TrustClass::UNTRUSTED, {}, {}});
  m.add("b", {"z", TrustClass::DESIGNATED, {}, {}});
  CHECK(m.type_count() == 2);
  CHECK(m.pair_count() == 3);
  CHECK(m.endorsement_pair_count() == 2);
}

TEST_CASE("json serialization round-trips the staged map", "[device_map]") {
  auto m = testsupport::staged_map();
  auto m2 = DeviceAttributeMap::from_json(m.to_json());
  CHECK(m2.type_count() == m.type_count());
  CHECK(m2.pair_count() == m.pair_count());
  CHECK(m2.endorsement_pair_count() == m.endorsement_pair_count());
  const auto* lock = m2.schema("door-lock", "lock");
  REQUIRE(lock != nullptr);
  CHECK(lock->trust == TrustClass::DESIGNATED);
  const auto* motion = m2.schema("motion-sensor", "motion");
  REQUIRE(motion != nullptr);
  CHECK(motion->trust == TrustClass::READ_ONLY);
  REQUIRE(motion->neutral.has_value());
  CHECK(*motion->neutral == "INACTIVE");
}

TEST_CASE("the override settles the engineered trust conflict", "[device_map]") {
  // Sources disagree on blind.openLevel; the merge keeps it writable, then
  // the review override designates it.
  auto m = testsupport::staged_map();
  const auto* blind = m.schema("blind", "openLevel");
  REQUIRE(blind != nullptr);
  CHECK(blind->trust == TrustClass::DESIGNATED);
}
