#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "hearth/value.hpp"

namespace hearth {

// Platform lifecycle and state events. The policy manager subscribes to
// these to keep instantiated policies in sync with the device population.

struct DeviceAdded {
  std::string device_id;
};
struct DeviceRemoved {
  std::string device_id;
};
struct DeviceOnline {
  std::string device_id;
};
struct DeviceOffline {
  std::string device_id;
};
struct StateChanged {
  std::string device_id;
  std::string attribute;
  AttributeValue value;
  bool trusted = false;
};
struct AhoChanged {
  std::string aho;
  AttributeValue value;
};

using Event = std::variant<DeviceAdded, DeviceRemoved, DeviceOnline,
                           DeviceOffline, StateChanged, AhoChanged>;

class EventBus {
 public:
  using Handler = std::function<void(const Event&, TimeMs)>;

  void subscribe(Handler h) { handlers_.push_back(std::move(h)); }

  void publish(const Event& e, TimeMs at) {
    log_.push_back({e, at});
    for (auto& h : handlers_) h(e, at);
  }

  struct LoggedEvent {
    Event event;
    TimeMs at;
  };

  const std::vector<LoggedEvent>& log() const { return log_; }
  void clear_log() { log_.clear(); }

 private:
  std::vector<Handler> handlers_;
  std::vector<LoggedEvent> log_;
};

}  // namespace hearth
