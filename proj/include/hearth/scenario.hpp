#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hearth/error.hpp"
#include "hearth/monitor.hpp"
#include "hearth/platform.hpp"
#include "hearth/value.hpp"

namespace hearth {

// Script lines, one step per line:
//   at +5000 physical lock-1 unlock method=owner
//   at +8000 api token=tracker set-aho home home
//   at +8000 expect deny endorsement
//   at +9000 local set-aho home away
// '#' starts a comment; blank lines are skipped; offsets are milliseconds
// from scenario start and must not decrease.

struct PhysicalStep {
  std::string device_id;
  std::string verb;
  std::map<std::string, std::string> params;
};
struct ApiAhoStep {
  std::string token;
  std::string aho;
  std::string value;
};
struct ApiAttrStep {
  std::string token;
  std::string device_id;
  std::string attribute;
  AttributeValue value;
};
struct LocalAhoStep {
  std::string aho;
  std::string value;
};
struct ExpectStep {
  bool allow = false;
  std::optional<MediationStatus> deny_status;
};

using ScenarioStep =
    std::variant<PhysicalStep, ApiAhoStep, ApiAttrStep, LocalAhoStep, ExpectStep>;

struct ScenarioLine {
  int lineno = 0;
  TimeMs at = 0;
  ScenarioStep step;
};

struct ExpectationResult {
  int lineno = 0;
  TimeMs at = 0;
  std::string expected;
  std::string actual;
  bool pass = false;
};

struct ScenarioResult {
  std::string script_id;
  std::vector<ExpectationResult> expectations;
  std::optional<MediationStatus> last_aho_status;
  std::vector<nlohmann::ordered_json> audit;

  bool all_passed() const {
    for (const auto& e : expectations)
      if (!e.pass) return false;
    return true;
  }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] inline void bad_line(int lineno, const std::string& why) {
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(lineno) + ": " + why);
}

}  // namespace detail

inline std::vector<ScenarioLine> parse_scenario(const std::string& text) {
  std::vector<ScenarioLine> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  TimeMs last_at = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto toks = detail::split_ws(raw);
    if (toks.empty()) continue;
    if (toks.size() < 3 || toks[0] != "at" || toks[1].empty() ||
        toks[1][0] != '+')
      detail::bad_line(lineno, "expected: at +<ms> <step>");

    ScenarioLine line;
    line.lineno = lineno;
    try {
      line.at = std::stoll(toks[1].substr(1));
    } catch (const std::exception&) {
      detail::bad_line(lineno, "bad offset " + toks[1]);
    }
    if (line.at < last_at)
      detail::bad_line(lineno, "offsets must not decrease");
    last_at = line.at;

    const std::string& kind = toks[2];
    if (kind == "physical") {
      if (toks.size() < 5) detail::bad_line(lineno, "physical <dev> <verb> [k=v]...");
      PhysicalStep s;
      s.device_id = toks[3];
      s.verb = toks[4];
      for (std::size_t i = 5; i < toks.size(); ++i) {
        auto eq = toks[i].find('=');
        if (eq == std::string::npos || eq == 0)
          detail::bad_line(lineno, "bad parameter " + toks[i]);
        s.params[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
      }
      line.step = std::move(s);
    } else if (kind == "api") {
      if (toks.size() < 4 || toks[3].rfind("token=", 0) != 0)
        detail::bad_line(lineno, "api token=<t> ...");
      std::string token = toks[3].substr(6);
      if (toks.size() >= 7 && toks[4] == "set-aho") {
        line.step = ApiAhoStep{token, toks[5], toks[6]};
      } else if (toks.size() >= 8 && toks[4] == "set-attr") {
        line.step =
            ApiAttrStep{token, toks[5], toks[6], AttributeValue::parse(toks[7])};
      } else {
        detail::bad_line(lineno, "api supports set-aho / set-attr");
      }
    } else if (kind == "local") {
      if (toks.size() < 6 || toks[3] != "set-aho")
        detail::bad_line(lineno, "local set-aho <aho> <value>");
      line.step = LocalAhoStep{toks[4], toks[5]};
    } else if (kind == "expect") {
      if (toks.size() < 4) detail::bad_line(lineno, "expect allow|deny <why>");
      ExpectStep s;
      if (toks[3] == "allow") {
        s.allow = true;
      } else if (toks[3] == "deny") {
        if (toks.size() < 5)
          detail::bad_line(lineno, "deny needs permission|endorsement|tamper");
        if (toks[4] == "permission")
          s.deny_status = MediationStatus::DENIED_PERMISSION;
        else if (toks[4] == "endorsement")
          s.deny_status = MediationStatus::DENIED_ENDORSEMENT;
        else if (toks[4] == "tamper")
          s.deny_status = MediationStatus::DENIED_TAMPER;
        else
          detail::bad_line(lineno, "unknown denial kind " + toks[4]);
      } else {
        detail::bad_line(lineno, "expect allow or deny");
      }
      line.step = s;
    } else {
      detail::bad_line(lineno, "unknown step " + kind);
    }
    out.push_back(std::move(line));
  }
  return out;
}

/// Replays a parsed script on a freshly booted platform. Each expect line is
/// checked against the outcome of the nearest preceding request step.
inline ScenarioResult run_scenario(const std::string& script_id,
                                   const std::vector<ScenarioLine>& lines,
                                   Platform& platform) {
  ScenarioResult result;
  result.script_id = script_id;
  std::optional<MediationOutcome> last;
  int last_lineno = 0;

  for (const auto& line : lines) {
    if (const auto* p = std::get_if<PhysicalStep>(&line.step)) {
      platform.apply_physical(p->device_id, p->verb, p->params, line.at);
      continue;
    }
    if (const auto* a = std::get_if<ApiAhoStep>(&line.step)) {
      const ApiToken* tok = platform.registry().token(a->token);
      Principal who = tok && tok->local ? Principal{LocalUser{}}
                                        : Principal{ThirdParty{a->token}};
      last = platform.submit(who, AhoChange{a->aho, a->value}, line.at);
      last_lineno = line.lineno;
      result.last_aho_status = last->status;
      continue;
    }
    if (const auto* a = std::get_if<ApiAttrStep>(&line.step)) {
      const ApiToken* tok = platform.registry().token(a->token);
      Principal who = tok && tok->local ? Principal{LocalUser{}}
                                        : Principal{ThirdParty{a->token}};
      last = platform.submit(
          who, DeviceAttributeChange{a->device_id, a->attribute, a->value},
          line.at);
      last_lineno = line.lineno;
      continue;
    }
    if (const auto* a = std::get_if<LocalAhoStep>(&line.step)) {
      last = platform.submit(LocalUser{}, AhoChange{a->aho, a->value}, line.at);
      last_lineno = line.lineno;
      result.last_aho_status = last->status;
      continue;
    }
    const auto& e = std::get<ExpectStep>(line.step);
    if (!last)
      detail::bad_line(line.lineno, "expect before any request");
    ExpectationResult er;
    er.lineno = line.lineno;
    er.at = line.at;
    er.expected = e.allow ? "applied" : to_string(*e.deny_status);
    er.actual = to_string(last->status);
    er.pass = e.allow ? last->applied() : last->status == *e.deny_status;
    if (!er.pass)
      er.actual += " (request at line " + std::to_string(last_lineno) +
                   (last->code.empty() ? "" : ", " + last->code) + ")";
    result.expectations.push_back(std::move(er));
  }
  result.audit = platform.monitor().audit_log();
  return result;
}

}  // namespace hearth
