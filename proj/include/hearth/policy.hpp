#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hearth/error.hpp"
#include "hearth/events.hpp"
#include "hearth/home.hpp"
#include "hearth/state.hpp"
#include "hearth/value.hpp"

namespace hearth {

/// One conjunct of a policy template: some device of `device_type` must have
/// exhibited `attribute == value` recently.
struct AttributeCheck {
  std::string device_type;
  std::string attribute;
  AttributeValue value;

  bool operator==(const AttributeCheck&) const = default;
  auto operator<=>(const AttributeCheck&) const = default;

  std::string pair_str() const { return device_type + "." + attribute; }
};

/// A device-agnostic conjunction of checks guarding one (aho, value)
/// transition. Instantiation binds the strongest feasible template to the
/// concrete deployment.
struct PolicyTemplate {
  std::string id;
  std::string aho;
  std::string target_value;
  std::vector<AttributeCheck> checks;

  void canonicalize() { std::sort(checks.begin(), checks.end()); }

  void validate() const {
    if (id.empty()) throw Error(ErrorCode::InvalidConfig, "template without id");
    if (checks.empty())
      throw Error(ErrorCode::InvalidConfig, "template " + id + " has no checks");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& c : checks)
      if (!seen.insert({c.device_type, c.attribute}).second)
        throw Error(ErrorCode::DuplicateInferencePair,
                    "template " + id + " repeats " + c.pair_str());
  }
};

inline nlohmann::ordered_json template_to_json(const PolicyTemplate& t) {
  nlohmann::ordered_json j;
  j["id"] = t.id;
  j["aho"] = t.aho;
  j["value"] = t.target_value;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : t.checks)
    j["checks"].push_back({{"type", c.device_type},
                           {"attribute", c.attribute},
                           {"value", c.value.str()}});
  return j;
}

inline PolicyTemplate template_from_json(const nlohmann::json& j) {
  PolicyTemplate t;
  t.id = j.at("id").get<std::string>();
  t.aho = j.at("aho").get<std::string>();
  t.target_value = j.at("value").get<std::string>();
  for (const auto& jc : j.at("checks")) {
    AttributeCheck c;
    c.device_type = jc.at("type").get<std::string>();
    c.attribute = jc.at("attribute").get<std::string>();
    c.value = AttributeValue::parse(jc.at("value").get<std::string>());
    t.checks.push_back(std::move(c));
  }
  t.canonicalize();
  t.validate();
  return t;
}

inline std::vector<PolicyTemplate> templates_from_json(const nlohmann::json& j) {
  std::vector<PolicyTemplate> out;
  const nlohmann::json& arr = j.is_array() ? j : j.at("templates");
  std::set<std::string> ids;
  for (const auto& jt : arr) {
    auto t = template_from_json(jt);
    if (!ids.insert(t.id).second)
      throw Error(ErrorCode::DuplicateId, "template " + t.id);
    out.push_back(std::move(t));
  }
  return out;
}

/// A template check bound to a concrete device.
struct BoundCheck {
  std::string device_id;
  AttributeCheck check;

  bool operator==(const BoundCheck&) const = default;
};

/// The template's conjunction realized at one location.
struct LocationPredicate {
  std::string location;
  std::vector<BoundCheck> checks;

  bool operator==(const LocationPredicate&) const = default;
};

/// The active policy for one (aho, value) transition: the disjunction of the
/// chosen template's predicates, one per feasible location.
struct InstantiatedPolicy {
  std::string template_id;
  std::string aho;
  std::string target_value;
  std::vector<LocationPredicate> predicates;

  bool operator==(const InstantiatedPolicy&) const = default;
};

/// What one bound check saw at evaluation time.
struct CheckEvidence {
  std::string device_id;
  std::string attribute;
  AttributeValue expected;
  bool satisfied = false;
  std::optional<StateRecord> observed;
};

struct PredicateEvidence {
  std::string location;
  bool satisfied = false;
  std::vector<CheckEvidence> checks;
};

struct Decision {
  bool allowed = false;
  std::string template_id;
  std::vector<PredicateEvidence> predicates;

  /// Unsatisfied checks across all predicates, location-qualified.
  std::vector<std::string> failed_checks() const {
    std::vector<std::string> out;
    for (const auto& p : predicates)
      for (const auto& c : p.checks)
        if (!c.satisfied)
          out.push_back(p.location + ":" + c.device_id + "." + c.attribute +
                        "==" + c.expected.str());
    return out;
  }
};

/// Locations where every check of the template can be bound to an online
/// device, counting devices at the location itself or at locations it is
/// declared adjacent to.
inline std::set<std::string> feasible_locations(const PolicyTemplate& t,
                                                const HomeRegistry& registry) {
  std::set<std::string> out;
  for (const auto& loc : registry.location_ids()) {
    auto eligible = registry.devices_for_location(loc);
    bool ok = true;
    for (const auto& c : t.checks) {
      bool found = false;
      for (const auto* d : eligible)
        if (d->type == c.device_type) {
          found = true;
          break;
        }
      if (!found) {
        ok = false;
        break;
      }
    }
    if (ok) out.insert(loc);
  }
  return out;
}

using AhoValue = std::pair<std::string, std::string>;

/// Holds the template library, derives one instantiated policy per endorsed
/// (aho, value) transition, and re-derives them as the deployment changes.
class PolicyManager {
 public:
  explicit PolicyManager(const HomeRegistry* registry) : registry_(registry) {}

  void load_templates(std::vector<PolicyTemplate> templates) {
    const auto& map = registry_->device_map();
    for (auto& t : templates) {
      for (const auto& c : t.checks)
        if (!map.schema(c.device_type, c.attribute))
          throw Error(ErrorCode::UnknownAttribute,
                      "template " + t.id + " references " + c.pair_str());
      by_transition_[{t.aho, t.target_value}].push_back(std::move(t));
    }
    for (auto& [_, ts] : by_transition_)
      std::sort(ts.begin(), ts.end(),
                [](const PolicyTemplate& a, const PolicyTemplate& b) {
                  return a.id < b.id;
                });
  }

  std::size_t template_count() const {
    std::size_t n = 0;
    for (const auto& [_, ts] : by_transition_) n += ts.size();
    return n;
  }

  /// Derives the active policy for one transition: among templates with at
  /// least one feasible location, the one with the most checks (smallest id
  /// breaking ties) is bound at every feasible location. Within a predicate
  /// a check binds to the smallest device id, preferring devices at the
  /// predicate's own location over borrowed adjacent ones.
  std::optional<InstantiatedPolicy> instantiate(const std::string& aho,
                                                const std::string& value) const {
    auto it = by_transition_.find({aho, value});
    if (it == by_transition_.end() || it->second.empty()) return std::nullopt;

    const PolicyTemplate* best = nullptr;
    std::set<std::string> best_locs;
    for (const auto& t : it->second) {
      auto locs = feasible_locations(t, *registry_);
      if (locs.empty()) continue;
      if (!best || t.checks.size() > best->checks.size() ||
          (t.checks.size() == best->checks.size() && t.id < best->id)) {
        best = &t;
        best_locs = std::move(locs);
      }
    }
    if (!best) return std::nullopt;

    InstantiatedPolicy p;
    p.template_id = best->id;
    p.aho = aho;
    p.target_value = value;
    for (const auto& loc : best_locs) {
      LocationPredicate pred;
      pred.location = loc;
      auto eligible = registry_->devices_for_location(loc);
      for (const auto& c : best->checks) {
        const DeviceInstance* chosen = nullptr;
        for (const auto* d : eligible) {
          if (d->type != c.device_type) continue;
          if (!chosen) {
            chosen = d;
            continue;
          }
          bool d_here = d->location == loc;
          bool c_here = chosen->location == loc;
          if (d_here != c_here) {
            if (d_here) chosen = d;
          } else if (d->id < chosen->id) {
            chosen = d;
          }
        }
        pred.checks.push_back({chosen->id, c});
      }
      p.predicates.push_back(std::move(pred));
    }
    return p;
  }

  /// Recomputes the active policy of every endorsed transition. Returns the
  /// transitions that just lost protection (templates exist but none is
  /// feasible) so the caller can surface a warning.
  std::vector<AhoValue> refresh() {
    std::vector<AhoValue> newly_unprotectable;
    for (const auto& [tv, ts] : by_transition_) {
      (void)ts;
      const Aho* aho = registry_->aho(tv.first);
      if (!aho || !aho->endorsed) {
        active_.erase(tv);
        unprotectable_.erase(tv);
        continue;
      }
      auto policy = instantiate(tv.first, tv.second);
      if (policy) {
        active_[tv] = std::move(*policy);
        unprotectable_.erase(tv);
      } else {
        active_.erase(tv);
        if (unprotectable_.insert(tv).second) newly_unprotectable.push_back(tv);
      }
    }
    return newly_unprotectable;
  }

  const InstantiatedPolicy* active(const std::string& aho,
                                   const std::string& value) const {
    auto it = active_.find({aho, value});
    return it == active_.end() ? nullptr : &it->second;
  }

  std::vector<const InstantiatedPolicy*> active_policies() const {
    std::vector<const InstantiatedPolicy*> out;
    for (const auto& [_, p] : active_) out.push_back(&p);
    return out;
  }

  const std::set<AhoValue>& unprotectable() const { return unprotectable_; }

  bool has_templates(const std::string& aho, const std::string& value) const {
    return by_transition_.count({aho, value}) > 0;
  }

  /// DNF evaluation: allowed when at least one predicate has every bound
  /// check backed by a fresh trusted change exactly matching the expected
  /// value. Missing devices simply leave their check unsatisfied.
  Decision evaluate(const InstantiatedPolicy& p, const StateSnapshot& snap) {
    ++evaluation_count_;
    Decision d;
    d.template_id = p.template_id;
    for (const auto& pred : p.predicates) {
      PredicateEvidence pe;
      pe.location = pred.location;
      pe.satisfied = true;
      for (const auto& bc : pred.checks) {
        CheckEvidence ev;
        ev.device_id = bc.device_id;
        ev.attribute = bc.check.attribute;
        ev.expected = bc.check.value;
        const StateRecord* rec =
            snap.fresh_change(bc.device_id, bc.check.attribute);
        if (rec) ev.observed = *rec;
        ev.satisfied = rec && rec->value == bc.check.value;
        if (!ev.satisfied) pe.satisfied = false;
        pe.checks.push_back(std::move(ev));
      }
      if (pe.satisfied) d.allowed = true;
      d.predicates.push_back(std::move(pe));
    }
    return d;
  }

  std::uint64_t evaluation_count() const { return evaluation_count_; }

  /// Deployment changes can alter feasibility; plain state changes cannot.
  std::vector<AhoValue> on_event(const Event& e) {
    if (std::holds_alternative<DeviceAdded>(e) ||
        std::holds_alternative<DeviceRemoved>(e) ||
        std::holds_alternative<DeviceOnline>(e) ||
        std::holds_alternative<DeviceOffline>(e))
      return refresh();
    return {};
  }

 private:
  const HomeRegistry* registry_;
  std::map<AhoValue, std::vector<PolicyTemplate>> by_transition_;
  std::map<AhoValue, InstantiatedPolicy> active_;
  std::set<AhoValue> unprotectable_;
  std::uint64_t evaluation_count_ = 0;
};

}  // namespace hearth
