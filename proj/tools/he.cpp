// he: the home-endorsement platform CLI.
//   he serve    --config home.json --policies templates.json --listen :8123
//   he scenario run script.scn --config home.json --policies templates.json
//   he bench    --suite micro --runs 50 --config home.json -o report.json
//   he policy   show --config home.json --policies templates.json

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hearth/api.hpp"
#include "hearth/bench.hpp"
#include "hearth/platform.hpp"
#include "hearth/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

/// Everything needed to boot a platform, loaded once so repeated boots
/// (scenario replays, benchmark runs) share the parsed inputs.
struct World {
  hearth::DeviceAttributeMap map;
  json home;
  json interactions;
  std::vector<std::vector<hearth::PolicyTemplate>> template_sets;
};

/// Relative paths inside the home config ("device_map", "interactions",
/// "policies") resolve against the config file's own directory, so a config
/// directory is relocatable as a unit. CLI flags override the embedded paths.
World load_world(const std::string& config_path, const std::string& map_path,
                 const std::string& interactions_path,
                 std::vector<std::string> policy_files) {
  World w;
  w.home = hearth::load_json_file(config_path);
  fs::path base = fs::path(config_path).parent_path();
  auto resolve = [&base](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q.string() : (base / q).string();
  };

  std::string map_file = map_path;
  if (map_file.empty() && w.home.contains("device_map"))
    map_file = resolve(w.home["device_map"].get<std::string>());
  if (map_file.empty())
    throw hearth::Error(hearth::ErrorCode::InvalidConfig,
                        "no device map: pass --map or add \"device_map\" to " +
                            config_path);
  w.map = hearth::DeviceAttributeMap::from_json(hearth::load_json_file(map_file));

  std::string inter_file = interactions_path;
  if (inter_file.empty() && w.home.contains("interactions"))
    inter_file = resolve(w.home["interactions"].get<std::string>());
  w.interactions = inter_file.empty() ? json{{"types", json::object()}}
                                      : hearth::load_json_file(inter_file);

  if (policy_files.empty() && w.home.contains("policies"))
    for (const auto& p : w.home["policies"])
      policy_files.push_back(resolve(p.get<std::string>()));
  for (const auto& f : policy_files)
    w.template_sets.push_back(
        hearth::templates_from_json(hearth::load_json_file(f)));
  return w;
}

std::unique_ptr<hearth::Platform> boot_world(const World& w, bool endorsement) {
  auto p = std::make_unique<hearth::Platform>(
      w.map, hearth::Platform::Options{endorsement});
  p->load_interactions(w.interactions);
  p->boot(w.home, w.template_sets);
  return p;
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out)
    throw hearth::Error(hearth::ErrorCode::InvalidConfig, "cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw hearth::Error(hearth::ErrorCode::InvalidConfig, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

hearth::ApiService* g_service = nullptr;

int cmd_serve(const World& w, const std::string& listen) {
  auto platform = boot_world(w, true);
  for (const auto& n : platform->monitor().notifications())
    std::cerr << "warning: " << n.message << "\n";

  hearth::ApiService service(*platform);
  auto [host, port] = hearth::ApiService::parse_listen(listen);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });

  std::cout << "serving " << platform->registry().devices().size()
            << " devices, " << platform->policies().active_policies().size()
            << " active policies on "
            << host << ":" << port << "\n";
  bool ok = service.listen(host, port);
  g_service = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

int cmd_scenario_run(const World& w, const std::string& script_path,
                     const std::string& out_path) {
  auto lines = hearth::parse_scenario(read_file(script_path));
  auto platform = boot_world(w, true);
  auto result = hearth::run_scenario(fs::path(script_path).stem().string(),
                                     lines, *platform);

  for (const auto& e : result.expectations)
    std::cout << (e.pass ? "PASS" : "FAIL") << " line " << e.lineno << " at +"
              << e.at << ": expected " << e.expected
              << (e.pass ? "" : ", got " + e.actual) << "\n";
  int passed = 0;
  for (const auto& e : result.expectations) passed += e.pass;
  std::cout << result.script_id << ": " << passed << "/"
            << result.expectations.size() << " expectations passed\n";

  if (!out_path.empty()) {
    ordered_json j;
    j["script"] = result.script_id;
    j["passed"] = result.all_passed();
    j["expectations"] = ordered_json::array();
    for (const auto& e : result.expectations)
      j["expectations"].push_back({{"line", e.lineno},
                                   {"at", e.at},
                                   {"expected", e.expected},
                                   {"actual", e.actual},
                                   {"pass", e.pass}});
    j["audit"] = result.audit;
    write_json(out_path, j);
  }
  return result.all_passed() ? 0 : 1;
}

int cmd_bench(const World& w, const std::string& suite, int runs,
              bool baseline_only, const std::string& out_path) {
  std::vector<hearth::PolicyTemplate> templates;
  for (const auto& set : w.template_sets)
    templates.insert(templates.end(), set.begin(), set.end());
  hearth::BenchHarness harness(w.map, w.home, std::move(templates),
                               w.interactions);
  auto report = harness.run(suite, runs, baseline_only);

  for (const auto& op : report.ops) {
    std::printf("%-24s base %8.4f ms", op.op.c_str(), op.baseline.mean());
    if (!baseline_only) {
      std::printf("  monitored %8.4f ms  overhead %+7.4f ms (%+.2f%%)%s",
                  op.monitored.mean(), op.overhead_ms(), op.overhead_pct(),
                  op.measurable() ? "" : "  [no measurable overhead]");
    }
    std::printf("\n");
  }
  if (!out_path.empty()) write_json(out_path, report.to_json());
  return 0;
}

int cmd_policy_show(const World& w) {
  auto platform = boot_world(w, true);
  for (const auto* pol : platform->policies().active_policies()) {
    std::cout << pol->aho << "=" << pol->target_value << "  template "
              << pol->template_id << "\n";
    for (const auto& pred : pol->predicates) {
      std::cout << "  @" << pred.location << ":";
      for (const auto& bc : pred.checks)
        std::cout << " " << bc.device_id << "." << bc.check.attribute
                  << "==" << bc.check.value.str();
      std::cout << "\n";
    }
  }
  for (const auto& [aho, value] : platform->policies().unprotectable())
    std::cout << aho << "=" << value << "  UNPROTECTABLE (no feasible template)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smart-home platform simulator with endorsement mediation"};
  app.require_subcommand(1);

  std::string config, map_path, interactions_path, listen = ":8123";
  std::vector<std::string> policy_files;
  auto add_world_flags = [&](CLI::App* cmd, bool config_required = true) {
    auto* opt = cmd->add_option("--config", config, "home config JSON");
    if (config_required) opt->required();
    cmd->add_option("--policies", policy_files, "policy template JSON files");
    cmd->add_option("--map", map_path, "device attribute map JSON (overrides config)");
    cmd->add_option("--interactions", interactions_path,
                    "physical interaction table JSON (overrides config)");
  };

  auto* serve = app.add_subcommand("serve", "boot the home and serve the HTTP API");
  add_world_flags(serve);
  serve->add_option("--listen", listen, "listen address, e.g. :8123");

  auto* scenario = app.add_subcommand("scenario", "scenario scripts");
  scenario->require_subcommand(1);
  auto* run = scenario->add_subcommand("run", "replay a script, check expectations");
  std::string script_path, out_path;
  run->add_option("script", script_path, "scenario script")->required();
  add_world_flags(run);
  run->add_option("-o,--out", out_path, "write result JSON here");

  auto* bench = app.add_subcommand("bench", "micro/macro overhead benchmark");
  std::string suite = "micro";
  int runs = 50;
  bool baseline_only = false;
  bench->add_option("--suite", suite, "micro or macro")->required();
  bench->add_option("--runs", runs, "samples per op (min 50)");
  bench->add_flag("--baseline", baseline_only, "measure the disabled-monitor baseline only");
  add_world_flags(bench);
  bench->add_option("-o,--out", out_path, "write report JSON here");

  auto* policy = app.add_subcommand("policy", "policy inspection");
  policy->require_subcommand(1);
  auto* show = policy->add_subcommand("show", "list active instantiated policies");
  add_world_flags(show);

  CLI11_PARSE(app, argc, argv);

  try {
    World w = load_world(config, map_path, interactions_path, policy_files);
    if (serve->parsed()) return cmd_serve(w, listen);
    if (run->parsed()) return cmd_scenario_run(w, script_path, out_path);
    if (bench->parsed()) return cmd_bench(w, suite, runs, baseline_only, out_path);
    if (show->parsed()) return cmd_policy_show(w);
  } catch (const hearth::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
