// Policy specification pipeline: ingest device-attribute sources into a
// unified map, generate endorsement policy templates from inference tables,
// and filter template sets.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hearth/platform.hpp"
#include "hearth/toolkit.hpp"

namespace {

void write_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out)
    throw hearth::Error(hearth::ErrorCode::InvalidConfig, "cannot write " + path);
  out << j.dump(2) << "\n";
}

int cmd_ingest(const std::vector<std::string>& files, const std::string& format,
               const std::string& designated, const std::string& out_path) {
  std::optional<nlohmann::json> overrides;
  if (!designated.empty()) overrides = hearth::load_json_file(designated);
  auto result = hearth::ingest_files(
      files, hearth::source_format_from_string(format), overrides);
  if (!out_path.empty()) write_file(out_path, result.map.to_json());
  std::cout << result.report().dump(2) << "\n";
  return 0;
}

int cmd_gen(const std::string& aho, const std::string& value,
            const std::vector<std::string>& inference_files,
            const std::string& map_path, const std::string& out_path) {
  std::vector<hearth::Inference> inferences;
  for (const auto& f : inference_files) {
    auto batch = hearth::inferences_from_json(hearth::load_json_file(f));
    inferences.insert(inferences.end(), batch.begin(), batch.end());
  }
  for (const auto& inf : inferences)
    if (inf.aho != aho || inf.target_value != value)
      throw hearth::Error(hearth::ErrorCode::MixedTarget,
                          "inference file targets " + inf.aho + "=" +
                              inf.target_value + ", requested " + aho + "=" +
                              value);

  std::optional<hearth::DeviceAttributeMap> map;
  if (!map_path.empty())
    map = hearth::DeviceAttributeMap::from_json(hearth::load_json_file(map_path));

  auto templates =
      hearth::generate_templates(inferences, map ? &*map : nullptr);

  nlohmann::ordered_json j;
  j["aho"] = aho;
  j["value"] = value;
  j["count"] = templates.size();
  j["templates"] = nlohmann::ordered_json::array();
  std::size_t total_checks = 0, max_checks = 0;
  for (const auto& t : templates) {
    total_checks += t.checks.size();
    max_checks = std::max(max_checks, t.checks.size());
    j["templates"].push_back(hearth::template_to_json(t));
  }
  if (!out_path.empty()) write_file(out_path, j);
  std::cout << "generated " << templates.size() << " templates for " << aho
            << "=" << value << " (mean checks "
            << (templates.empty()
                    ? 0.0
                    : double(total_checks) / double(templates.size()))
            << ", max " << max_checks << ")\n";
  return 0;
}

int cmd_filter(const std::string& in_path,
               const std::vector<std::string>& inference_files,
               std::optional<int> min_strong,
               const std::string& contains_pair, std::optional<int> max_size,
               const std::string& out_path) {
  auto templates = hearth::templates_from_json(hearth::load_json_file(in_path));

  std::set<std::string> strong;
  for (const auto& f : inference_files)
    for (const auto& inf :
         hearth::inferences_from_json(hearth::load_json_file(f)))
      if (inf.strong) strong.insert(inf.pair_str());
  if (min_strong && strong.empty())
    throw hearth::Error(hearth::ErrorCode::InvalidConfig,
                        "--min-strong needs --inferences to know the strong pairs");

  hearth::FilterOptions opt;
  opt.min_strong = min_strong;
  if (!contains_pair.empty()) opt.contains_pair = contains_pair;
  if (max_size) opt.max_size = std::size_t(*max_size);

  hearth::FilterReport report;
  auto kept = hearth::filter_templates(templates, opt, strong, report);

  if (!out_path.empty()) {
    nlohmann::ordered_json j;
    j["count"] = kept.size();
    j["templates"] = nlohmann::ordered_json::array();
    for (const auto& t : kept) j["templates"].push_back(hearth::template_to_json(t));
    write_file(out_path, j);
  }
  std::cout << nlohmann::ordered_json{{"input", report.input},
                                      {"output", report.output}}
                   .dump()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"endorsement policy specification toolkit"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand(
      "ingest", "merge device-attribute sources into one map");
  std::vector<std::string> files;
  std::string format = "auto", designated, ingest_out;
  ingest->add_option("files", files, "source files")->required();
  ingest->add_option("--format", format,
                     "auto|ocf_json|attr_list|handler_preamble");
  ingest->add_option("--designated", designated,
                     "override file (designated pairs, neutral values)");
  ingest->add_option("-o,--out", ingest_out, "write the merged map here");

  auto* gen = app.add_subcommand("gen", "generate policy templates");
  std::string aho, value, map_path, gen_out;
  std::vector<std::string> inference_files;
  gen->add_option("--aho", aho, "target AHO")->required();
  gen->add_option("--value", value, "target value")->required();
  gen->add_option("--inferences", inference_files, "inference table files")
      ->required();
  gen->add_option("--map", map_path, "device map, to reject untrusted pairs");
  gen->add_option("-o,--out", gen_out, "write templates here");

  auto* filter = app.add_subcommand("filter", "filter a template set");
  std::string filter_in, contains_pair, filter_out;
  std::vector<std::string> filter_inferences;
  std::optional<int> min_strong, max_size;
  filter->add_option("--in", filter_in, "template file")->required();
  filter->add_option("--min-strong", min_strong,
                     "keep templates with at least this many strong pairs");
  filter->add_option("--inferences", filter_inferences,
                     "inference tables defining the strong pairs");
  filter->add_option("--contains-pair", contains_pair,
                     "keep templates containing type.attribute");
  filter->add_option("--max-size", max_size, "keep templates up to this size");
  filter->add_option("-o,--out", filter_out, "write the kept templates here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(files, format, designated, ingest_out);
    if (*gen) return cmd_gen(aho, value, inference_files, map_path, gen_out);
    if (*filter)
      return cmd_filter(filter_in, filter_inferences, min_strong, contains_pair,
                        max_size, filter_out);
  } catch (const hearth::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
