#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "hearth/scenario.hpp"

#include "support.hpp"

using namespace hearth;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scripts parse comments, blanks, and parameters", "[scenario]") {
  auto lines = parse_scenario(
      "# arrival\n"
      "\n"
      "at +5000 physical lock-1 unlock method=owner  # keypad code\n"
      "at +8000 api token=tracker set-aho home home\n"
      "at +8000 expect allow\n");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].lineno == 3);
  CHECK(lines[0].at == 5000);
  const auto& phys = std::get<PhysicalStep>(lines[0].step);
  CHECK(phys.device_id == "lock-1");
  CHECK(phys.verb == "unlock");
  CHECK(phys.params.at("method") == "owner");
  CHECK(std::get<ApiAhoStep>(lines[1].step).token == "tracker");
  CHECK(std::get<ExpectStep>(lines[2].step).allow);
}

TEST_CASE("parse errors carry the offending line number", "[scenario]") {
  auto error_of = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string{};
  };

  CHECK(error_of("at 5000 physical lock-1 unlock\n").find("line 1") !=
        std::string::npos);
  CHECK(error_of("at +1000 expect allow\nat +500 expect allow\n")
            .find("line 2") != std::string::npos);
  CHECK_FALSE(error_of("at +1 dance lock-1\n").empty());           // verb
  CHECK_FALSE(error_of("at +1 physical lock-1\n").empty());        // arity
  CHECK_FALSE(error_of("at +1 physical lock-1 unlock =x\n").empty());
  CHECK_FALSE(error_of("at +1 api set-aho home home\n").empty());  // token
  CHECK_FALSE(error_of("at +1 expect deny\n").empty());            // kind
  CHECK_FALSE(error_of("at +1 expect deny because\n").empty());
}

TEST_CASE("expectations bind to the nearest preceding request", "[scenario]") {
  auto p = testsupport::boot_home("two_device.json");
  auto lines = parse_scenario(
      "at +1000 api token=kasa set-aho home home\n"
      "at +1000 expect deny endorsement\n"
      "at +2000 local set-aho home home\n"
      "at +2000 expect allow\n");
  auto result = run_scenario("t", lines, *p);
  REQUIRE(result.expectations.size() == 2);
  CHECK(result.expectations[0].pass);
  CHECK(result.expectations[1].pass);
  CHECK(result.all_passed());
  REQUIRE(result.last_aho_status.has_value());
  CHECK(*result.last_aho_status == MediationStatus::APPLIED);
  CHECK_FALSE(result.audit.empty());
}

TEST_CASE("an expectation before any request is an error", "[scenario]") {
  auto p = testsupport::boot_home("two_device.json");
  auto lines = parse_scenario("at +1000 expect allow\n");
  CHECK_THROWS_AS(run_scenario("t", lines, *p), Error);
}

TEST_CASE("failed expectations report what actually happened", "[scenario]") {
  auto p = testsupport::boot_home("two_device.json");
  auto lines = parse_scenario(
      "at +1000 api token=kasa set-aho home home\n"
      "at +1000 expect allow\n");
  auto result = run_scenario("t", lines, *p);
  REQUIRE(result.expectations.size() == 1);
  CHECK_FALSE(result.expectations[0].pass);
  CHECK(result.expectations[0].expected == "applied");
  CHECK(result.expectations[0].actual.find("denied_endorsement") !=
        std::string::npos);
  CHECK_FALSE(result.all_passed());
}

TEST_CASE("the staged scripts replay as written", "[scenario]") {
  auto p = testsupport::boot_home("entryway.json");
  auto lines =
      parse_scenario(slurp(testsupport::data_path("scenarios/s1.scn")));
  auto result = run_scenario("s1", lines, *p);
  CHECK(result.all_passed());
  REQUIRE(result.last_aho_status.has_value());
  CHECK(*result.last_aho_status == MediationStatus::APPLIED);
}
