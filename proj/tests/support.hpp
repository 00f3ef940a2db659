#pragma once

// Shared fixture loading for the test suites: everything comes from the
// staged data tree the build derives with the spec tool, so tests exercise
// the same artifacts the shipped binaries use.

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hearth/bench.hpp"
#include "hearth/platform.hpp"
#include "hearth/policy.hpp"

namespace testsupport {

inline std::string data_path(const std::string& rel) {
  return std::string(HEARTH_DATA_DIR) + "/" + rel;
}

#ifdef HEARTH_SOURCE_DATA_DIR
inline std::string source_path(const std::string& rel) {
  return std::string(HEARTH_SOURCE_DATA_DIR) + "/" + rel;
}
#endif

inline hearth::DeviceAttributeMap staged_map() {
  return hearth::DeviceAttributeMap::from_json(
      hearth::load_json_file(data_path("device_map.json")));
}

inline nlohmann::json staged_interactions() {
  return hearth::load_json_file(data_path("interactions.json"));
}

inline nlohmann::json home_config(const std::string& name) {
  return hearth::load_json_file(data_path("homes/" + name));
}

/// Template sets referenced by a home config ("policies": ["../x.json"]),
/// resolved against the staged homes directory.
inline std::vector<std::vector<hearth::PolicyTemplate>> home_templates(
    const nlohmann::json& home) {
  std::vector<std::vector<hearth::PolicyTemplate>> sets;
  if (!home.contains("policies")) return sets;
  for (const auto& rel : home["policies"]) {
    auto path = data_path("homes/" + rel.get<std::string>());
    sets.push_back(
        hearth::templates_from_json(hearth::load_json_file(path)));
  }
  return sets;
}

/// Boots a staged home end to end, the same way the he tool does.
inline std::unique_ptr<hearth::Platform> boot_home(const std::string& name,
                                                   bool endorsement = true) {
  auto home = home_config(name);
  auto p = std::make_unique<hearth::Platform>(
      staged_map(), hearth::Platform::Options{endorsement});
  p->load_interactions(staged_interactions());
  p->boot(home, home_templates(home));
  return p;
}

}  // namespace testsupport
