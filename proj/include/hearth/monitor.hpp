#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hearth/error.hpp"
#include "hearth/events.hpp"
#include "hearth/home.hpp"
#include "hearth/policy.hpp"
#include "hearth/state.hpp"
#include "hearth/value.hpp"

namespace hearth {

struct AhoChange {
  std::string aho;
  std::string value;
};

struct DeviceAttributeChange {
  std::string device_id;
  std::string attribute;
  AttributeValue value;
};

/// A state report from the device itself (the simulator's stand-in for the
/// physical world). Only these writes become trusted records.
struct DeviceStateReport {
  std::string device_id;
  std::string attribute;
  AttributeValue value;
};

using ChangeTarget =
    std::variant<AhoChange, DeviceAttributeChange, DeviceStateReport>;

struct StateChangeRequest {
  Principal principal;
  ChangeTarget target;
  TimeMs request_time = 0;
};

enum class MediationStatus {
  APPLIED,
  DENIED_PERMISSION,
  DENIED_TAMPER,
  DENIED_ENDORSEMENT,
};

inline const char* to_string(MediationStatus s) {
  switch (s) {
    case MediationStatus::APPLIED: return "applied";
    case MediationStatus::DENIED_PERMISSION: return "denied_permission";
    case MediationStatus::DENIED_TAMPER: return "denied_tamper";
    case MediationStatus::DENIED_ENDORSEMENT: return "denied_endorsement";
  }
  return "?";
}

/// `code` is a stable machine-readable slug (unknown_aho, no_grant,
/// read_only_attribute, checks_unsatisfied, ...) the API layer maps onto
/// HTTP statuses and tests match against.
struct MediationOutcome {
  MediationStatus status = MediationStatus::DENIED_PERMISSION;
  std::string code;
  std::string message;
  std::optional<Decision> decision;

  bool applied() const { return status == MediationStatus::APPLIED; }
};

struct Notification {
  enum class Kind { DENIAL, WARNING };
  Kind kind;
  TimeMs at = 0;
  std::string aho;
  std::string value;
  std::string message;
  std::vector<std::string> failed_checks;
};

/// The integrity reference monitor. Every state mutation funnels through
/// mediate(); nothing else may touch AHO values or the state machine.
/// Endorsed AHO transitions requested by third parties are allowed only when
/// the active policy is satisfied by fresh trusted device evidence; endorsed
/// transitions whose templates are all infeasible fail closed.
class ReferenceMonitor {
 public:
  ReferenceMonitor(HomeRegistry* registry, StateMachine* states,
                   PolicyManager* policies, EventBus* bus)
      : registry_(registry), states_(states), policies_(policies), bus_(bus) {}

  /// Baseline mode for benchmarking: endorsement machinery inert, endorsed
  /// AHO writes behave like non-endorsed ones. Everything else unchanged.
  void set_endorsement_enabled(bool on) { endorsement_enabled_ = on; }
  bool endorsement_enabled() const { return endorsement_enabled_; }

  void init_aho(const std::string& name) {
    const Aho* a = registry_->aho(name);
    if (!a) throw Error(ErrorCode::UnknownAho, name);
    aho_values_[name] = a->initial;
  }

  const std::string* aho_value(const std::string& name) const {
    auto it = aho_values_.find(name);
    return it == aho_values_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, std::string>& aho_values() const {
    return aho_values_;
  }

  MediationOutcome mediate(const StateChangeRequest& req) {
    MediationOutcome out = decide(req);
    if (out.applied()) {
      ++applied_count_;
      apply(req);
    }
    if (out.status == MediationStatus::DENIED_ENDORSEMENT) {
      const auto& t = std::get<AhoChange>(req.target);
      Notification n;
      n.kind = Notification::Kind::DENIAL;
      n.at = req.request_time;
      n.aho = t.aho;
      n.value = t.value;
      n.message = "endorsement denied for " + t.aho + "=" + t.value + " (" +
                  principal_str(req.principal) + ")";
      if (out.decision) n.failed_checks = out.decision->failed_checks();
      notifications_.push_back(std::move(n));
    }
    append_audit(req, out);
    return out;
  }

  /// Surfaces transitions that lost all feasible protection, e.g. after a
  /// device drop.
  void warn_unprotectable(const std::vector<AhoValue>& pairs, TimeMs at) {
    for (const auto& [aho, value] : pairs) {
      Notification n;
      n.kind = Notification::Kind::WARNING;
      n.at = at;
      n.aho = aho;
      n.value = value;
      n.message = "no feasible policy protects " + aho + "=" + value +
                  "; third-party requests will be denied";
      notifications_.push_back(std::move(n));
    }
  }

  const std::vector<Notification>& notifications() const {
    return notifications_;
  }

  const std::vector<nlohmann::ordered_json>& audit_log() const { return audit_; }

  std::uint64_t applied_count() const { return applied_count_; }
  std::uint64_t mutation_count() const { return mutation_count_; }

 private:
  MediationOutcome decide(const StateChangeRequest& req) {
    if (const auto* rep = std::get_if<DeviceStateReport>(&req.target))
      return decide_report(req, *rep);
    if (const auto* w = std::get_if<DeviceAttributeChange>(&req.target))
      return decide_device_write(req, *w);
    return decide_aho_change(req, std::get<AhoChange>(req.target));
  }

  MediationOutcome decide_report(const StateChangeRequest& req,
                                 const DeviceStateReport& rep) {
    const auto* dp = std::get_if<DeviceReport>(&req.principal);
    if (!dp || dp->device_id != rep.device_id)
      return {MediationStatus::DENIED_TAMPER, "spoofed_report",
              "state reports come from the device itself", std::nullopt};
    if (auto bad = check_device_target(rep.device_id, rep.attribute, rep.value))
      return *bad;
    return {MediationStatus::APPLIED, "", "", std::nullopt};
  }

  MediationOutcome decide_device_write(const StateChangeRequest& req,
                                       const DeviceAttributeChange& w) {
    if (auto bad = check_device_target(w.device_id, w.attribute, w.value))
      return *bad;
    if (std::holds_alternative<DeviceReport>(req.principal))
      return {MediationStatus::DENIED_PERMISSION, "wrong_path",
              "device reports use the report path", std::nullopt};

    const DeviceInstance* dev = registry_->device(w.device_id);
    const AttributeSchema* schema =
        registry_->device_map().schema(dev->type, w.attribute);

    // Tamper protection outranks grants: an integration holding a device
    // grant still may not overwrite sensor readings or designated state.
    if (schema->trust == TrustClass::READ_ONLY)
      return {MediationStatus::DENIED_TAMPER, "read_only_attribute",
              w.device_id + "." + w.attribute + " is device-reported only",
              std::nullopt};
    if (schema->trust == TrustClass::DESIGNATED &&
        std::holds_alternative<ThirdParty>(req.principal))
      return {MediationStatus::DENIED_TAMPER, "designated_attribute",
              w.device_id + "." + w.attribute +
                  " is not writable by integrations",
              std::nullopt};

    if (const auto* tp = std::get_if<ThirdParty>(&req.principal)) {
      const ApiToken* tok = registry_->token(tp->token);
      if (!tok)
        return {MediationStatus::DENIED_PERMISSION, "unknown_token", tp->token,
                std::nullopt};
      if (!tok->device_attrs.count(w.device_id + "." + w.attribute))
        return {MediationStatus::DENIED_PERMISSION, "no_grant",
                "no grant for " + w.device_id + "." + w.attribute,
                std::nullopt};
    }
    return {MediationStatus::APPLIED, "", "", std::nullopt};
  }

  MediationOutcome decide_aho_change(const StateChangeRequest& req,
                                     const AhoChange& t) {
    const Aho* aho = registry_->aho(t.aho);
    if (!aho)
      return {MediationStatus::DENIED_PERMISSION, "unknown_aho", t.aho,
              std::nullopt};
    if (!aho->allows_label(t.value))
      return {MediationStatus::DENIED_PERMISSION, "value_out_of_domain",
              t.aho + "=" + t.value, std::nullopt};

    if (std::holds_alternative<DeviceReport>(req.principal))
      return {MediationStatus::DENIED_PERMISSION, "wrong_path",
              "devices do not set AHOs", std::nullopt};

    if (const auto* tp = std::get_if<ThirdParty>(&req.principal)) {
      const ApiToken* tok = registry_->token(tp->token);
      if (!tok)
        return {MediationStatus::DENIED_PERMISSION, "unknown_token", tp->token,
                std::nullopt};
      if (!aho->grants.count(tp->token))
        return {MediationStatus::DENIED_PERMISSION, "no_grant",
                "no grant for " + t.aho, std::nullopt};
      if (aho->endorsed && endorsement_enabled_) return endorse(req, t);
    }
    // Platform apps and local users change AHOs freely; non-endorsed AHOs
    // are open to any granted integration with no policy work at all.
    return {MediationStatus::APPLIED, "", "", std::nullopt};
  }

  MediationOutcome endorse(const StateChangeRequest& req, const AhoChange& t) {
    const InstantiatedPolicy* policy = policies_->active(t.aho, t.value);
    if (!policy) {
      Decision d;
      d.allowed = false;
      bool had = policies_->has_templates(t.aho, t.value);
      return {MediationStatus::DENIED_ENDORSEMENT,
              had ? "no_feasible_policy" : "no_policy",
              (had ? "no feasible policy for " : "no policy defined for ") +
                  t.aho + "=" + t.value,
              std::move(d)};
    }
    Decision d =
        policies_->evaluate(*policy, states_->snapshot(req.request_time));
    if (d.allowed) return {MediationStatus::APPLIED, "", "", std::move(d)};
    return {MediationStatus::DENIED_ENDORSEMENT, "checks_unsatisfied",
            "recent device evidence does not support " + t.aho + "=" + t.value,
            std::move(d)};
  }

  std::optional<MediationOutcome> check_device_target(
      const std::string& device_id, const std::string& attribute,
      const AttributeValue& value) {
    const DeviceInstance* dev = registry_->device(device_id);
    if (!dev)
      return MediationOutcome{MediationStatus::DENIED_PERMISSION,
                              "unknown_device", device_id, std::nullopt};
    if (!dev->online)
      return MediationOutcome{MediationStatus::DENIED_PERMISSION,
                              "device_offline", device_id, std::nullopt};
    const AttributeSchema* schema =
        registry_->device_map().schema(dev->type, attribute);
    if (!schema)
      return MediationOutcome{MediationStatus::DENIED_PERMISSION,
                              "unknown_attribute",
                              dev->type + "." + attribute, std::nullopt};
    if (!schema->allows_label(value.label))
      return MediationOutcome{
          MediationStatus::DENIED_PERMISSION, "value_out_of_domain",
          device_id + "." + attribute + "=" + value.str(), std::nullopt};
    return std::nullopt;
  }

  void apply(const StateChangeRequest& req) {
    ++mutation_count_;
    if (const auto* t = std::get_if<AhoChange>(&req.target)) {
      aho_values_[t->aho] = t->value;
      bus_->publish(AhoChanged{t->aho, AttributeValue(t->value)},
                    req.request_time);
      return;
    }
    std::string device_id, attribute;
    AttributeValue value;
    bool trusted = false;
    if (const auto* rep = std::get_if<DeviceStateReport>(&req.target)) {
      device_id = rep->device_id;
      attribute = rep->attribute;
      value = rep->value;
      trusted = true;
    } else {
      const auto& w = std::get<DeviceAttributeChange>(req.target);
      device_id = w.device_id;
      attribute = w.attribute;
      value = w.value;
    }
    const DeviceInstance* dev = registry_->device(device_id);
    states_->record_change(
        {device_id, attribute, value, req.request_time, trusted}, dev->type);
    bus_->publish(StateChanged{device_id, attribute, value, trusted},
                  req.request_time);
  }

  void append_audit(const StateChangeRequest& req, const MediationOutcome& out) {
    nlohmann::ordered_json j;
    j["seq"] = audit_.size();
    j["t"] = req.request_time;
    j["principal"] = principal_str(req.principal);
    if (const auto* a = std::get_if<AhoChange>(&req.target)) {
      j["target"] = "aho:" + a->aho;
      j["value"] = a->value;
    } else if (const auto* w = std::get_if<DeviceAttributeChange>(&req.target)) {
      j["target"] = "attr:" + w->device_id + "." + w->attribute;
      j["value"] = w->value.str();
    } else {
      const auto& r = std::get<DeviceStateReport>(req.target);
      j["target"] = "report:" + r.device_id + "." + r.attribute;
      j["value"] = r.value.str();
    }
    j["outcome"] = to_string(out.status);
    if (!out.code.empty()) j["code"] = out.code;
    if (out.decision) {
      j["policy"] = out.decision->template_id;
      nlohmann::ordered_json preds = nlohmann::ordered_json::array();
      for (const auto& pe : out.decision->predicates) {
        nlohmann::ordered_json checks = nlohmann::ordered_json::array();
        for (const auto& e : pe.checks)
          checks.push_back({{"check", e.device_id + "." + e.attribute + "==" +
                                          e.expected.str()},
                            {"satisfied", e.satisfied}});
        preds.push_back({{"location", pe.location},
                         {"satisfied", pe.satisfied},
                         {"checks", std::move(checks)}});
      }
      j["predicates"] = std::move(preds);
    }
    audit_.push_back(std::move(j));
  }

  HomeRegistry* registry_;
  StateMachine* states_;
  PolicyManager* policies_;
  EventBus* bus_;
  bool endorsement_enabled_ = true;
  std::map<std::string, std::string> aho_values_;
  std::vector<Notification> notifications_;
  std::vector<nlohmann::ordered_json> audit_;
  std::uint64_t applied_count_ = 0;
  std::uint64_t mutation_count_ = 0;
};

}  // namespace hearth
