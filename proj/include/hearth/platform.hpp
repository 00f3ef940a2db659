#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hearth/error.hpp"
#include "hearth/events.hpp"
#include "hearth/home.hpp"
#include "hearth/monitor.hpp"
#include "hearth/policy.hpp"
#include "hearth/state.hpp"
#include "hearth/value.hpp"

namespace hearth {

/// One record produced by a physical interaction verb. The value may carry
/// placeholders filled from the verb's parameters ("UNLOCKED({method})").
/// reset_after_ms schedules the sensor's return to its neutral value.
struct InteractionEffect {
  std::string attribute;
  std::string value_template;
  std::map<std::string, std::string> defaults;
  std::optional<TimeMs> reset_after_ms;
  std::optional<std::string> reset_value;
};

/// device type -> verb -> effects
using InteractionTable =
    std::map<std::string, std::map<std::string, std::vector<InteractionEffect>>>;

struct TriggerAho {
  std::string aho;
  std::string equals;
};
struct TriggerAttr {
  std::string device_id;
  std::string attribute;
  AttributeValue equals;
};
struct ActionAho {
  std::string aho;
  std::string value;
};
struct ActionAttr {
  std::string device_id;
  std::string attribute;
  AttributeValue value;
};

/// A trigger-action automation. Fires with platform authority, so its action
/// bypasses endorsement; protection is transitive because the triggering
/// change itself had to survive mediation.
struct Routine {
  std::string id;
  std::variant<TriggerAho, TriggerAttr> trigger;
  std::variant<ActionAho, ActionAttr> action;
};

/// The simulated smart-home platform: logical clock, scheduled-event queue
/// (sensor auto-resets), automation engine, and the mediation stack. All
/// state flows through the reference monitor.
class Platform {
 public:
  struct Options {
    bool endorsement_enabled = true;
  };

  explicit Platform(DeviceAttributeMap map)
      : Platform(std::move(map), Options()) {}

  Platform(DeviceAttributeMap map, Options opt)
      : registry_(std::move(map)),
        states_(&registry_.device_map()),
        policies_(&registry_),
        monitor_(&registry_, &states_, &policies_, &bus_) {
    monitor_.set_endorsement_enabled(opt.endorsement_enabled);
    bus_.subscribe([this](const Event& e, TimeMs at) {
      auto lost = policies_.on_event(e);
      if (!loading_ && !lost.empty()) monitor_.warn_unprotectable(lost, at);
    });
    bus_.subscribe([this](const Event& e, TimeMs at) { run_routines(e, at); });
  }

  // -- boot ---------------------------------------------------------------

  void load_interactions(const nlohmann::json& j) {
    for (const auto& [type, verbs] : j.at("types").items()) {
      for (const auto& [verb, effects] : verbs.items()) {
        std::vector<InteractionEffect> list;
        for (const auto& je : effects) {
          InteractionEffect e;
          e.attribute = je.at("attribute").get<std::string>();
          e.value_template = je.at("value").get<std::string>();
          if (je.contains("defaults"))
            e.defaults =
                je["defaults"].get<std::map<std::string, std::string>>();
          if (je.contains("reset_after_ms"))
            e.reset_after_ms = je["reset_after_ms"].get<TimeMs>();
          if (je.contains("reset_value"))
            e.reset_value = je["reset_value"].get<std::string>();
          const auto* schema =
              registry_.device_map().schema(type, e.attribute);
          if (!schema)
            throw Error(ErrorCode::UnknownAttribute,
                        "interaction " + type + "." + verb + " targets " +
                            e.attribute);
          if (e.reset_after_ms && !e.reset_value && !schema->neutral)
            throw Error(ErrorCode::InvalidConfig,
                        type + "." + e.attribute +
                            " auto-resets but has no neutral value");
          list.push_back(std::move(e));
        }
        interactions_[type][verb] = std::move(list);
      }
    }
  }

  /// Boots the home: locations, AHOs, tokens, then policy templates, then
  /// devices one at a time (each add re-derives active policies, which is
  /// why boot dominates the benchmark), then routines. Transitions still
  /// unprotectable at the end are warned about exactly once.
  void boot(const nlohmann::json& home,
            std::vector<std::vector<PolicyTemplate>> template_sets) {
    loading_ = true;
    if (home.contains("freshness_s"))
      states_.set_freshness({home["freshness_s"].get<TimeMs>() * 1000});

    if (home.contains("locations"))
      for (const auto& jl : home["locations"]) {
        Location loc;
        loc.id = jl.at("id").get<std::string>();
        if (jl.contains("adjacent_to"))
          loc.adjacent_to = jl["adjacent_to"].get<std::vector<std::string>>();
        registry_.add_location(std::move(loc));
      }

    if (home.contains("ahos"))
      for (const auto& ja : home["ahos"]) {
        Aho a;
        a.name = ja.at("name").get<std::string>();
        a.value_domain = ja.at("values").get<std::vector<std::string>>();
        a.initial = ja.contains("initial") ? ja["initial"].get<std::string>()
                                           : a.value_domain.at(0);
        if (ja.contains("endorsed")) a.endorsed = ja["endorsed"].get<bool>();
        if (ja.contains("grants"))
          for (const auto& g : ja["grants"]) a.grants.insert(g.get<std::string>());
        if (!a.allows_label(a.initial))
          throw Error(ErrorCode::ValueOutOfDomain, a.name + "=" + a.initial);
        registry_.define_aho(a);
        monitor_.init_aho(a.name);
      }

    if (home.contains("tokens"))
      for (const auto& jt : home["tokens"]) {
        ApiToken tok;
        tok.token = jt.at("token").get<std::string>();
        if (jt.contains("label")) tok.label = jt["label"].get<std::string>();
        if (jt.contains("local")) tok.local = jt["local"].get<bool>();
        if (jt.contains("device_attrs"))
          for (const auto& g : jt["device_attrs"])
            tok.device_attrs.insert(g.get<std::string>());
        registry_.add_token(std::move(tok));
      }

    for (const auto* a : registry_.ahos())
      for (const auto& g : a->grants)
        if (!registry_.token(g))
          throw Error(ErrorCode::UnknownToken,
                      "aho " + a->name + " grants undeclared token " + g);

    if (monitor_.endorsement_enabled())
      for (auto& ts : template_sets) policies_.load_templates(std::move(ts));

    if (home.contains("devices"))
      for (const auto& jd : home["devices"]) {
        DeviceInstance d;
        d.id = jd.at("id").get<std::string>();
        d.type = jd.at("type").get<std::string>();
        d.location = jd.at("location").get<std::string>();
        registry_.add_device(std::move(d), bus_, clock_);
      }

    if (home.contains("routines"))
      for (const auto& jr : home["routines"]) add_routine(parse_routine(jr));

    loading_ = false;
    policies_.refresh();
    std::vector<AhoValue> lost(policies_.unprotectable().begin(),
                               policies_.unprotectable().end());
    monitor_.warn_unprotectable(lost, clock_);
  }

  Routine parse_routine(const nlohmann::json& jr) const {
    Routine r;
    r.id = jr.at("id").get<std::string>();
    const auto& w = jr.at("when");
    if (w.contains("aho"))
      r.trigger = TriggerAho{w.at("aho").get<std::string>(),
                             w.at("equals").get<std::string>()};
    else
      r.trigger = TriggerAttr{
          w.at("device").get<std::string>(),
          w.at("attribute").get<std::string>(),
          AttributeValue::parse(w.at("equals").get<std::string>())};
    const auto& th = jr.at("then");
    if (th.contains("aho"))
      r.action = ActionAho{th.at("aho").get<std::string>(),
                           th.at("value").get<std::string>()};
    else
      r.action = ActionAttr{
          th.at("device").get<std::string>(),
          th.at("attribute").get<std::string>(),
          AttributeValue::parse(th.at("value").get<std::string>())};
    return r;
  }

  void add_routine(Routine r) {
    if (const auto* t = std::get_if<TriggerAho>(&r.trigger)) {
      if (!registry_.aho(t->aho)) throw Error(ErrorCode::UnknownAho, t->aho);
    } else {
      const auto& ta = std::get<TriggerAttr>(r.trigger);
      const DeviceInstance* d = registry_.device(ta.device_id);
      if (!d) throw Error(ErrorCode::UnknownDevice, ta.device_id);
      if (!registry_.device_map().schema(d->type, ta.attribute))
        throw Error(ErrorCode::UnknownAttribute, d->type + "." + ta.attribute);
    }
    if (const auto* a = std::get_if<ActionAho>(&r.action)) {
      if (!registry_.aho(a->aho)) throw Error(ErrorCode::UnknownAho, a->aho);
    } else {
      const auto& aa = std::get<ActionAttr>(r.action);
      if (!registry_.device(aa.device_id))
        throw Error(ErrorCode::UnknownDevice, aa.device_id);
    }
    for (const auto& existing : routines_)
      if (existing.id == r.id) throw Error(ErrorCode::DuplicateId, r.id);
    routines_.push_back(std::move(r));
    std::sort(routines_.begin(), routines_.end(),
              [](const Routine& a, const Routine& b) { return a.id < b.id; });
  }

  // -- time ---------------------------------------------------------------

  TimeMs now() const { return clock_; }

  /// Advances the logical clock, firing every scheduled event (sensor
  /// resets) due on the way, in (time, insertion) order.
  void advance_to(TimeMs t) {
    if (t < clock_)
      throw Error(ErrorCode::NonMonotonicTimestamp,
                  "clock cannot rewind to " + std::to_string(t));
    while (!queue_.empty() && queue_.top().at <= t) {
      Scheduled ev = queue_.top();
      queue_.pop();
      clock_ = ev.at;
      ev.fire();
    }
    clock_ = t;
  }

  // -- the three ways state changes ---------------------------------------

  /// A person (or the physical world) acts on a device: resolve the verb via
  /// the device type's interaction table, push the resulting reports through
  /// the monitor, and schedule auto-resets. The built-in verbs go-offline /
  /// go-online change availability instead.
  std::vector<MediationOutcome> apply_physical(
      const std::string& device_id, const std::string& verb,
      const std::map<std::string, std::string>& params, TimeMs at) {
    advance_to(at);
    const DeviceInstance* dev = registry_.device(device_id);
    if (!dev) throw Error(ErrorCode::UnknownDevice, device_id);
    if (verb == "go-offline") {
      registry_.set_online(device_id, false, bus_, clock_);
      return {};
    }
    if (verb == "go-online") {
      registry_.set_online(device_id, true, bus_, clock_);
      return {};
    }
    if (!dev->online) throw Error(ErrorCode::DeviceOffline, device_id);

    auto ti = interactions_.find(dev->type);
    if (ti == interactions_.end() || !ti->second.count(verb))
      throw Error(ErrorCode::UnknownVerb, dev->type + "." + verb);

    std::vector<MediationOutcome> outcomes;
    for (const auto& eff : ti->second.at(verb)) {
      AttributeValue v = AttributeValue::parse(resolve(eff, params));
      outcomes.push_back(monitor_.mediate(
          {DeviceReport{device_id}, DeviceStateReport{device_id, eff.attribute, v},
           clock_}));
      if (eff.reset_after_ms) {
        std::string reset = eff.reset_value.value_or(
            registry_.device_map().schema(dev->type, eff.attribute)->neutral.value_or(""));
        schedule(clock_ + *eff.reset_after_ms,
                 [this, device_id, attr = eff.attribute, reset] {
                   const DeviceInstance* d = registry_.device(device_id);
                   if (!d || !d->online) return;  // vanished mid-flight
                   monitor_.mediate({DeviceReport{device_id},
                                     DeviceStateReport{device_id, attr,
                                                       AttributeValue(reset)},
                                     clock_});
                 });
      }
    }
    return outcomes;
  }

  /// An API-side request (third party, local dashboard, or platform app).
  MediationOutcome submit(Principal principal, ChangeTarget target, TimeMs at) {
    advance_to(at);
    return monitor_.mediate({std::move(principal), std::move(target), clock_});
  }

  // -- deployment changes at runtime ---------------------------------------

  void add_device(DeviceInstance dev, TimeMs at) {
    advance_to(at);
    registry_.add_device(std::move(dev), bus_, clock_);
  }

  void remove_device(const std::string& id, TimeMs at) {
    advance_to(at);
    registry_.remove_device(id, bus_, clock_);
    states_.forget_device(id);
  }

  void set_device_online(const std::string& id, bool online, TimeMs at) {
    advance_to(at);
    registry_.set_online(id, online, bus_, clock_);
  }

  void set_endorsed(const std::string& aho, bool flag) {
    registry_.set_endorsed(aho, flag);
    auto lost = policies_.refresh();
    if (!lost.empty()) monitor_.warn_unprotectable(lost, clock_);
  }

  // -- accessors ------------------------------------------------------------

  HomeRegistry& registry() { return registry_; }
  const HomeRegistry& registry() const { return registry_; }
  StateMachine& states() { return states_; }
  PolicyManager& policies() { return policies_; }
  ReferenceMonitor& monitor() { return monitor_; }
  const ReferenceMonitor& monitor() const { return monitor_; }
  EventBus& bus() { return bus_; }
  const std::vector<Routine>& routines() const { return routines_; }

 private:
  struct Scheduled {
    TimeMs at;
    std::uint64_t seq;
    std::function<void()> fire;
    bool operator>(const Scheduled& o) const {
      return at != o.at ? at > o.at : seq > o.seq;
    }
  };

  void schedule(TimeMs at, std::function<void()> fn) {
    queue_.push({at, next_seq_++, std::move(fn)});
  }

  static std::string resolve(const InteractionEffect& eff,
                             const std::map<std::string, std::string>& params) {
    std::string out = eff.value_template;
    std::size_t open;
    while ((open = out.find('{')) != std::string::npos) {
      std::size_t close = out.find('}', open);
      if (close == std::string::npos)
        throw Error(ErrorCode::ParseError, "unbalanced { in " + eff.value_template);
      std::string key = out.substr(open + 1, close - open - 1);
      auto it = params.find(key);
      const std::string* val = it != params.end() ? &it->second : nullptr;
      if (!val) {
        auto dt = eff.defaults.find(key);
        if (dt == eff.defaults.end())
          throw Error(ErrorCode::ParseError, "missing parameter " + key);
        val = &dt->second;
      }
      out = out.substr(0, open) + *val + out.substr(close + 1);
    }
    return out;
  }

  void run_routines(const Event& e, TimeMs at) {
    for (const auto& r : routines_) {
      if (!matches(r, e)) continue;
      if (routine_depth_ >= 16)
        throw Error(ErrorCode::CascadeDepthExceeded, "routine " + r.id);
      ++routine_depth_;
      try {
        fire_routine(r, at);
      } catch (...) {
        --routine_depth_;
        throw;
      }
      --routine_depth_;
    }
  }

  static bool matches(const Routine& r, const Event& e) {
    if (const auto* ac = std::get_if<AhoChanged>(&e)) {
      const auto* t = std::get_if<TriggerAho>(&r.trigger);
      return t && t->aho == ac->aho && t->equals == ac->value.label;
    }
    if (const auto* sc = std::get_if<StateChanged>(&e)) {
      const auto* t = std::get_if<TriggerAttr>(&r.trigger);
      return t && t->device_id == sc->device_id &&
             t->attribute == sc->attribute && t->equals == sc->value;
    }
    return false;
  }

  void fire_routine(const Routine& r, TimeMs at) {
    if (const auto* a = std::get_if<ActionAho>(&r.action)) {
      monitor_.mediate({PlatformApp{}, AhoChange{a->aho, a->value}, at});
    } else {
      const auto& aa = std::get<ActionAttr>(r.action);
      monitor_.mediate(
          {PlatformApp{},
           DeviceAttributeChange{aa.device_id, aa.attribute, aa.value}, at});
    }
  }

  HomeRegistry registry_;
  StateMachine states_;
  PolicyManager policies_;
  EventBus bus_;
  ReferenceMonitor monitor_;
  InteractionTable interactions_;
  std::vector<Routine> routines_;
  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue_;
  std::uint64_t next_seq_ = 0;
  TimeMs clock_ = 0;
  int routine_depth_ = 0;
  bool loading_ = false;
};

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return j;
}

}  // namespace hearth
