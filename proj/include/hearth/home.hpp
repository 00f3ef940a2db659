#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hearth/device_map.hpp"
#include "hearth/error.hpp"
#include "hearth/events.hpp"
#include "hearth/value.hpp"

namespace hearth {

/// A named place in the home. Adjacency is directed: adjacent_to lists the
/// locations whose devices predicates at this location may borrow (a
/// front-door predicate may rely on the hallway motion sensor just inside;
/// the hallway does not get to borrow porch devices).
struct Location {
  std::string id;
  std::vector<std::string> adjacent_to;
};

struct DeviceInstance {
  std::string id;
  std::string type;
  std::string location;
  bool online = true;
};

/// An abstract home object: platform-level shared state not tied to any one
/// device (home/away, security_state). When endorsed, third-party writes
/// must be backed by recent trusted device evidence.
struct Aho {
  std::string name;
  std::vector<std::string> value_domain;
  std::string initial;
  bool endorsed = false;
  std::set<std::string> grants;  // third-party tokens allowed to write

  bool allows_label(const std::string& label) const {
    if (value_domain.empty()) return true;
    return std::find(value_domain.begin(), value_domain.end(), label) !=
           value_domain.end();
  }
};

// Who is asking for a state change.
struct PlatformApp {};
struct LocalUser {};
struct ThirdParty {
  std::string token;
};
struct DeviceReport {
  std::string device_id;
};

using Principal = std::variant<PlatformApp, LocalUser, ThirdParty, DeviceReport>;

inline std::string principal_str(const Principal& p) {
  if (std::holds_alternative<PlatformApp>(p)) return "platform";
  if (std::holds_alternative<LocalUser>(p)) return "local-user";
  if (auto* t = std::get_if<ThirdParty>(&p)) return "third-party:" + t->token;
  return "device:" + std::get<DeviceReport>(p).device_id;
}

/// A static API credential. `local` marks dashboard tokens that act with the
/// local user's authority; others are third-party integrations whose device
/// writes are limited to the listed "device-id.attribute" grants.
struct ApiToken {
  std::string token;
  std::string label;
  bool local = false;
  std::set<std::string> device_attrs;
};

/// The device/location/AHO registry for one home.
class HomeRegistry {
 public:
  explicit HomeRegistry(DeviceAttributeMap map) : map_(std::move(map)) {}

  const DeviceAttributeMap& device_map() const { return map_; }

  void add_location(Location loc) {
    if (locations_.count(loc.id))
      throw Error(ErrorCode::DuplicateId, "location " + loc.id);
    locations_.emplace(loc.id, std::move(loc));
  }

  const Location* location(const std::string& id) const {
    auto it = locations_.find(id);
    return it == locations_.end() ? nullptr : &it->second;
  }

  std::vector<std::string> location_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : locations_) out.push_back(id);
    return out;
  }

  void define_aho(Aho aho) {
    if (ahos_.count(aho.name))
      throw Error(ErrorCode::DuplicateId, "aho " + aho.name);
    ahos_.emplace(aho.name, std::move(aho));
  }

  const Aho* aho(const std::string& name) const {
    auto it = ahos_.find(name);
    return it == ahos_.end() ? nullptr : &it->second;
  }

  void set_endorsed(const std::string& name, bool flag) {
    auto it = ahos_.find(name);
    if (it == ahos_.end()) throw Error(ErrorCode::UnknownAho, name);
    it->second.endorsed = flag;
  }

  std::vector<const Aho*> ahos() const {
    std::vector<const Aho*> out;
    for (const auto& [_, a] : ahos_) out.push_back(&a);
    return out;
  }

  void add_device(DeviceInstance dev, EventBus& bus, TimeMs at) {
    if (devices_.count(dev.id))
      throw Error(ErrorCode::DuplicateId, "device " + dev.id);
    if (!map_.has_type(dev.type))
      throw Error(ErrorCode::UnknownDeviceType, dev.type);
    if (!locations_.count(dev.location))
      throw Error(ErrorCode::UnknownLocation, dev.location);
    std::string id = dev.id;
    devices_.emplace(id, std::move(dev));
    bus.publish(DeviceAdded{id}, at);
  }

  void remove_device(const std::string& id, EventBus& bus, TimeMs at) {
    auto it = devices_.find(id);
    if (it == devices_.end()) throw Error(ErrorCode::UnknownDevice, id);
    devices_.erase(it);
    bus.publish(DeviceRemoved{id}, at);
  }

  void set_online(const std::string& id, bool online, EventBus& bus, TimeMs at) {
    auto it = devices_.find(id);
    if (it == devices_.end()) throw Error(ErrorCode::UnknownDevice, id);
    if (it->second.online == online) return;
    it->second.online = online;
    if (online)
      bus.publish(DeviceOnline{id}, at);
    else
      bus.publish(DeviceOffline{id}, at);
  }

  const DeviceInstance* device(const std::string& id) const {
    auto it = devices_.find(id);
    return it == devices_.end() ? nullptr : &it->second;
  }

  std::vector<const DeviceInstance*> devices() const {
    std::vector<const DeviceInstance*> out;
    for (const auto& [_, d] : devices_) out.push_back(&d);
    return out;
  }

  std::vector<const DeviceInstance*> devices_at(const std::string& loc) const {
    std::vector<const DeviceInstance*> out;
    for (const auto& [_, d] : devices_)
      if (d.location == loc) out.push_back(&d);
    return out;
  }

  /// Online devices a predicate at `loc` may bind: those at the location
  /// itself plus those at locations it is declared adjacent to.
  std::vector<const DeviceInstance*> devices_for_location(
      const std::string& loc) const {
    std::set<std::string> eligible{loc};
    if (const auto* l = location(loc))
      eligible.insert(l->adjacent_to.begin(), l->adjacent_to.end());
    std::vector<const DeviceInstance*> out;
    for (const auto& [_, d] : devices_)
      if (d.online && eligible.count(d.location)) out.push_back(&d);
    return out;
  }

  void add_token(ApiToken tok) {
    if (tokens_.count(tok.token))
      throw Error(ErrorCode::DuplicateId, "token " + tok.token);
    tokens_.emplace(tok.token, std::move(tok));
  }

  const ApiToken* token(const std::string& t) const {
    auto it = tokens_.find(t);
    return it == tokens_.end() ? nullptr : &it->second;
  }

 private:
  DeviceAttributeMap map_;
  std::map<std::string, Location> locations_;
  std::map<std::string, DeviceInstance> devices_;
  std::map<std::string, Aho> ahos_;
  std::map<std::string, ApiToken> tokens_;
};

}  // namespace hearth
