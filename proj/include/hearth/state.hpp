#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hearth/device_map.hpp"
#include "hearth/error.hpp"
#include "hearth/value.hpp"

namespace hearth {

/// One observed state change of a device attribute.
struct StateRecord {
  std::string device_id;
  std::string attribute;
  AttributeValue value;
  TimeMs timestamp = 0;
  bool trusted = false;  // reported by the device itself, not written via API
};

struct FreshnessConfig {
  TimeMs threshold_ms = 60000;
};

/// Frozen view of device state used for one policy evaluation. Exposes, per
/// (device, attribute), the most recent change overall and the most recent
/// trusted non-neutral change; endorsement only ever consults the latter,
/// and only while it is fresh.
class StateSnapshot {
 public:
  using Key = std::pair<std::string, std::string>;

  StateSnapshot(std::map<Key, StateRecord> latest,
                std::map<Key, StateRecord> latest_trusted, TimeMs now,
                FreshnessConfig freshness)
      : latest_(std::move(latest)),
        latest_trusted_(std::move(latest_trusted)),
        now_(now),
        freshness_(freshness) {}

  TimeMs now() const { return now_; }
  TimeMs threshold() const { return freshness_.threshold_ms; }

  const StateRecord* latest(const std::string& device,
                            const std::string& attribute) const {
    auto it = latest_.find({device, attribute});
    return it == latest_.end() ? nullptr : &it->second;
  }

  /// The record endorsement may rely on: the most recent trusted non-neutral
  /// change, provided its age does not exceed the freshness threshold. An
  /// age exactly equal to the threshold still counts as fresh.
  const StateRecord* fresh_change(const std::string& device,
                                  const std::string& attribute) const {
    auto it = latest_trusted_.find({device, attribute});
    if (it == latest_trusted_.end()) return nullptr;
    if (now_ - it->second.timestamp > freshness_.threshold_ms) return nullptr;
    return &it->second;
  }

 private:
  std::map<Key, StateRecord> latest_;
  std::map<Key, StateRecord> latest_trusted_;
  TimeMs now_;
  FreshnessConfig freshness_;
};

/// Tracks device-attribute state over time. Keeps two slots per pair (the
/// latest change and the latest trusted non-neutral change) plus an
/// append-only trace for export and replay.
class StateMachine {
 public:
  explicit StateMachine(const DeviceAttributeMap* map = nullptr,
                        FreshnessConfig freshness = {})
      : map_(map), freshness_(freshness) {}

  FreshnessConfig freshness() const { return freshness_; }
  void set_freshness(FreshnessConfig f) { freshness_ = f; }

  /// Records a change. Timestamps may repeat (the newer record replaces the
  /// older at the same instant) but may never go backwards. `type` is needed
  /// only when a schema is attached, to resolve the neutral label.
  void record_change(const StateRecord& rec, const std::string& type = {}) {
    Key key{rec.device_id, rec.attribute};
    auto it = latest_.find(key);
    if (it != latest_.end() && rec.timestamp < it->second.timestamp)
      throw Error(ErrorCode::NonMonotonicTimestamp,
                  rec.device_id + "." + rec.attribute + " at " +
                      std::to_string(rec.timestamp) + " after " +
                      std::to_string(it->second.timestamp));
    latest_[key] = rec;
    if (rec.trusted && !is_neutral(type, rec)) latest_trusted_[key] = rec;
    trace_.push_back(rec);
  }

  void forget_device(const std::string& device_id) {
    erase_device(latest_, device_id);
    erase_device(latest_trusted_, device_id);
  }

  const StateRecord* latest(const std::string& device,
                            const std::string& attribute) const {
    auto it = latest_.find({device, attribute});
    return it == latest_.end() ? nullptr : &it->second;
  }

  StateSnapshot snapshot(TimeMs now) const {
    return StateSnapshot(latest_, latest_trusted_, now, freshness_);
  }

  const std::vector<StateRecord>& trace() const { return trace_; }

  std::size_t tracked_pairs() const { return latest_.size(); }

 private:
  using Key = StateSnapshot::Key;

  bool is_neutral(const std::string& type, const StateRecord& rec) const {
    if (!map_ || type.empty()) return false;
    const auto* schema = map_->schema(type, rec.attribute);
    return schema && schema->neutral && *schema->neutral == rec.value.label;
  }

  static void erase_device(std::map<Key, StateRecord>& m,
                           const std::string& device_id) {
    for (auto it = m.lower_bound({device_id, ""});
         it != m.end() && it->first.first == device_id;)
      it = m.erase(it);
  }

  const DeviceAttributeMap* map_;
  FreshnessConfig freshness_;
  std::map<Key, StateRecord> latest_;
  std::map<Key, StateRecord> latest_trusted_;
  std::vector<StateRecord> trace_;
};

}  // namespace hearth
