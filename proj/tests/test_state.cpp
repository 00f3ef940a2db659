#include <algorithm>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "hearth/device_map.hpp"
#include "hearth/state.hpp"

using namespace hearth;

namespace {

DeviceAttributeMap sensor_map() {
  DeviceAttributeMap m;
  m.add("sensor",
        {"motion", TrustClass::READ_ONLY, {"ACTIVE", "INACTIVE"}, "INACTIVE"});
  return m;
}

StateRecord rec(TimeMs t, const std::string& label, bool trusted) {
  return {"s-1", "motion", AttributeValue(label), t, trusted};
}

}  // namespace

TEST_CASE("a change exactly at the threshold age is still fresh", "[state]") {
  auto map = sensor_map();
  StateMachine sm(&map, {60000});
  sm.record_change(rec(1000, "ACTIVE", true), "sensor");

  const auto* hit = sm.snapshot(61000).fresh_change("s-1", "motion");
  REQUIRE(hit != nullptr);
  CHECK(hit->timestamp == 1000);

  CHECK(sm.snapshot(61001).fresh_change("s-1", "motion") == nullptr);
}

TEST_CASE("neutral resets never count as evidence", "[state]") {
  auto map = sensor_map();
  StateMachine sm(&map, {60000});
  sm.record_change(rec(1000, "ACTIVE", true), "sensor");
  sm.record_change(rec(2000, "INACTIVE", true), "sensor");

  auto snap = sm.snapshot(5000);
  CHECK(snap.latest("s-1", "motion")->value.label == "INACTIVE");
  const auto* fresh = snap.fresh_change("s-1", "motion");
  REQUIRE(fresh != nullptr);
  CHECK(fresh->value.label == "ACTIVE");
  CHECK(fresh->timestamp == 1000);
}

TEST_CASE("untrusted writes never count as evidence", "[state]") {
  auto map = sensor_map();
  StateMachine sm(&map, {60000});
  sm.record_change(rec(1000, "ACTIVE", false), "sensor");
  CHECK(sm.snapshot(2000).fresh_change("s-1", "motion") == nullptr);

  sm.record_change(rec(3000, "ACTIVE", true), "sensor");
  sm.record_change(rec(4000, "ACTIVE", false), "sensor");
  const auto* fresh = sm.snapshot(5000).fresh_change("s-1", "motion");
  REQUIRE(fresh != nullptr);
  CHECK(fresh->timestamp == 3000);
  CHECK(sm.latest("s-1", "motion")->timestamp == 4000);
}

TEST_CASE("timestamps may repeat but never rewind", "[state]") {
  auto map = sensor_map();
  StateMachine sm(&map, {60000});
  sm.record_change(rec(1000, "ACTIVE", true), "sensor");
  CHECK_THROWS_AS(sm.record_change(rec(999, "INACTIVE", true), "sensor"),
                  Error);
  sm.record_change(rec(1000, "INACTIVE", true), "sensor");
  CHECK(sm.latest("s-1", "motion")->value.label == "INACTIVE");
}

TEST_CASE("snapshots are frozen copies", "[state]") {
  auto map = sensor_map();
  StateMachine sm(&map, {60000});
  sm.record_change(rec(1000, "ACTIVE", true), "sensor");
  auto snap = sm.snapshot(2000);
  sm.record_change(rec(3000, "INACTIVE", true), "sensor");
  CHECK(snap.latest("s-1", "motion")->value.label == "ACTIVE");
  CHECK(snap.now() == 2000);
}

TEST_CASE("forgetting a device drops its records", "[state]") {
  auto map = sensor_map();
  StateMachine sm(&map, {60000});
  sm.record_change(rec(1000, "ACTIVE", true), "sensor");
  sm.forget_device("s-1");
  CHECK(sm.latest("s-1", "motion") == nullptr);
  CHECK(sm.snapshot(1500).fresh_change("s-1", "motion") == nullptr);
}

TEST_CASE("evidence selection matches a linear-scan oracle", "[state][prop]") {
  // The two-slot store must agree with a full replay of the trace: the
  // freshest trusted non-neutral record, if young enough, and nothing else.
  std::mt19937 rng(20260818);
  const std::vector<std::string> labels = {"ACTIVE", "INACTIVE", "TILT",
                                           "SHAKE"};
  for (int trial = 0; trial < 500; ++trial) {
    auto map = sensor_map();
    TimeMs threshold = 1 + rng() % 5000;
    StateMachine sm(&map, {threshold});

    std::vector<StateRecord> trace;
    TimeMs t = 0;
    int n = 1 + rng() % 30;
    for (int i = 0; i < n; ++i) {
      t += rng() % 1000;
      auto r = rec(t, labels[rng() % labels.size()], rng() % 2 == 0);
      sm.record_change(r, "sensor");
      trace.push_back(r);
    }
    TimeMs now = t + rng() % (2 * threshold);

    const StateRecord* expect = nullptr;
    for (const auto& r : trace)
      if (r.trusted && r.value.label != "INACTIVE") expect = &r;
    if (expect && now - expect->timestamp > threshold) expect = nullptr;

    const auto* got = sm.snapshot(now).fresh_change("s-1", "motion");
    if (expect == nullptr) {
      REQUIRE(got == nullptr);
    } else {
      REQUIRE(got != nullptr);
      CHECK(got->timestamp == expect->timestamp);
      CHECK(got->value == expect->value);
      CHECK(got->trusted);
      CHECK(now - got->timestamp <= threshold);
      CHECK(got->value.label != "INACTIVE");
    }
  }
}
