#pragma once

#include <stdexcept>
#include <string>

namespace hearth {

enum class ErrorCode {
  DuplicateId,
  UnknownDeviceType,
  UnknownDevice,
  UnknownAttribute,
  UnknownAho,
  UnknownLocation,
  UnknownToken,
  UnknownVerb,
  DeviceOffline,
  ValueOutOfDomain,
  NonMonotonicTimestamp,
  CascadeDepthExceeded,
  MixedTarget,
  DuplicateInferencePair,
  ParseError,
  InvalidConfig,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownDeviceType: return "UnknownDeviceType";
    case ErrorCode::UnknownDevice: return "UnknownDevice";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::UnknownAho: return "UnknownAho";
    case ErrorCode::UnknownLocation: return "UnknownLocation";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::UnknownVerb: return "UnknownVerb";
    case ErrorCode::DeviceOffline: return "DeviceOffline";
    case ErrorCode::ValueOutOfDomain: return "ValueOutOfDomain";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::CascadeDepthExceeded: return "CascadeDepthExceeded";
    case ErrorCode::MixedTarget: return "MixedTarget";
    case ErrorCode::DuplicateInferencePair: return "DuplicateInferencePair";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hearth
