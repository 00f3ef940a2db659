#include <catch2/catch_amalgamated.hpp>

#include "hearth/bench.hpp"

#include "support.hpp"

using namespace hearth;

namespace {

BenchHarness staged_harness() {
  auto home = testsupport::home_config("benchmark.json");
  auto sets = testsupport::home_templates(home);
  REQUIRE(sets.size() == 1);
  return BenchHarness(testsupport::staged_map(), home, sets.front(),
                      testsupport::staged_interactions());
}

}  // namespace

TEST_CASE("sample statistics", "[bench]") {
  SampleStats s;
  s.samples_ms = {1.0, 2.0, 3.0};
  CHECK(s.mean() == Catch::Approx(2.0));
  CHECK(s.stddev() == Catch::Approx(1.0));
  CHECK(s.ci95() == Catch::Approx(1.96 / std::sqrt(3.0)));
  CHECK(SampleStats{}.mean() == 0.0);
  CHECK(SampleStats{{5.0}}.stddev() == 0.0);
}

TEST_CASE("overhead is the monitored-minus-baseline mean", "[bench]") {
  OpReport r;
  r.op = "x";
  r.baseline.samples_ms = {1.0, 1.0, 1.0};
  r.monitored.samples_ms = {2.0, 2.0, 2.0};
  CHECK(r.overhead_ms() == Catch::Approx(1.0));
  CHECK(r.overhead_pct() == Catch::Approx(100.0));
  CHECK(r.measurable());

  OpReport noise;
  noise.op = "y";
  noise.baseline.samples_ms = {1.0, 3.0, 1.0, 3.0};
  noise.monitored.samples_ms = {2.0, 2.0, 2.0, 2.0};
  CHECK_FALSE(noise.measurable());
  auto j = noise.to_json(true);
  CHECK(j["note"] == "no measurable overhead");
}

TEST_CASE("benchmark rejects unstable configurations", "[bench]") {
  auto h = staged_harness();
  CHECK_THROWS_AS(h.run("micro", 10, true), Error);
  CHECK_THROWS_AS(h.run("nano", 50, true), Error);
}

TEST_CASE("baseline-only micro run shape", "[bench]") {
  auto h = staged_harness();
  auto report = h.run("micro", 50, true);

  CHECK(report.suite == "micro");
  CHECK(report.runs == 50);
  CHECK(report.baseline_only);
  REQUIRE(report.ops.size() == 4);
  CHECK(report.ops[0].op == "boot-instantiation");
  CHECK(report.ops[1].op == "policy-update");
  CHECK(report.ops[2].op == "hook-invocation");
  CHECK(report.ops[3].op == "endorsement-check");
  for (const auto& op : report.ops) {
    CHECK(op.baseline.samples_ms.size() == 50);
    CHECK(op.monitored.samples_ms.empty());
    CHECK(op.baseline.mean() > 0.0);
  }
  CHECK(report.find("policy-update") == &report.ops[1]);
  CHECK(report.find("missing") == nullptr);

  auto j = report.to_json();
  CHECK(j["baseline_only"] == true);
  REQUIRE(j["ops"].size() == 4);
  CHECK_FALSE(j["ops"][0].contains("monitored"));
  CHECK(j["ops"][0]["baseline"].contains("mean_ms"));
}
