#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hearth/monitor.hpp"
#include "hearth/platform.hpp"

namespace hearth {

/// Bearer-token HTTP facade over the platform's mediation point. Wire
/// mapping: 200 applied; 401 unknown token; 403 permission denials; 404
/// unknown targets; 400 bad values; 409 integrity denials (endorsement or
/// tamper) with a machine-readable reason. Requests are serialized into the
/// platform's single logical timeline, stamped with wall-clock milliseconds
/// elapsed since service start.
class ApiService {
 public:
  explicit ApiService(Platform& platform)
      : platform_(platform), started_(std::chrono::steady_clock::now()) {
    wire_routes();
  }

  httplib::Server& server() { return server_; }

  bool listen(const std::string& host, int port) {
    return server_.listen(host, port);
  }

  int bind_any_port(const std::string& host) {
    return server_.bind_to_any_port(host);
  }

  bool listen_after_bind() { return server_.listen_after_bind(); }

  void stop() { server_.stop(); }

  /// ":8123" or "127.0.0.1:8123" -> host and port.
  static std::pair<std::string, int> parse_listen(const std::string& spec) {
    auto colon = spec.rfind(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "listen address needs :port");
    std::string host = colon == 0 ? "0.0.0.0" : spec.substr(0, colon);
    int port = 0;
    try {
      port = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad port in " + spec);
    }
    return {host, port};
  }

 private:
  const ApiToken* authenticate(const httplib::Request& req,
                               httplib::Response& res) {
    std::string auth = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (auth.rfind(prefix, 0) != 0) {
      res.status = 401;
      res.set_content(R"({"reason":"missing_token"})", "application/json");
      return nullptr;
    }
    const ApiToken* tok = platform_.registry().token(auth.substr(prefix.size()));
    if (!tok) {
      res.status = 401;
      res.set_content(R"({"reason":"unknown_token"})", "application/json");
      return nullptr;
    }
    return tok;
  }

  TimeMs now_locked() {
    auto elapsed = std::chrono::steady_clock::now() - started_;
    TimeMs t =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    return std::max(t, platform_.now());
  }

  static void fill_response(const MediationOutcome& out, httplib::Response& res) {
    nlohmann::ordered_json body;
    switch (out.status) {
      case MediationStatus::APPLIED:
        res.status = 200;
        body["status"] = "applied";
        break;
      case MediationStatus::DENIED_PERMISSION:
        if (out.code == "unknown_aho" || out.code == "unknown_device" ||
            out.code == "unknown_attribute")
          res.status = 404;
        else if (out.code == "value_out_of_domain")
          res.status = 400;
        else if (out.code == "unknown_token")
          res.status = 401;
        else
          res.status = 403;
        body["reason"] = out.code;
        body["message"] = out.message;
        break;
      case MediationStatus::DENIED_TAMPER:
        res.status = 409;
        body["reason"] = "tamper_denied";
        body["message"] = out.message;
        break;
      case MediationStatus::DENIED_ENDORSEMENT:
        res.status = 409;
        body["reason"] = "endorsement_denied";
        body["message"] = out.message;
        body["failed_checks"] = nlohmann::ordered_json::array();
        if (out.decision)
          for (const auto& f : out.decision->failed_checks())
            body["failed_checks"].push_back(f);
        break;
    }
    res.set_content(body.dump(), "application/json");
  }

  static std::optional<std::string> body_value(const httplib::Request& req,
                                               httplib::Response& res) {
    try {
      auto j = nlohmann::json::parse(req.body);
      if (!j.contains("value") || !j["value"].is_string()) {
        res.status = 400;
        res.set_content(R"({"reason":"missing_value"})", "application/json");
        return std::nullopt;
      }
      return j["value"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content(R"({"reason":"bad_json"})", "application/json");
      return std::nullopt;
    }
  }

  void wire_routes() {
    server_.Post(R"(/api/aho/([A-Za-z0-9_\-]+))",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   std::scoped_lock lock(mu_);
                   const ApiToken* tok = authenticate(req, res);
                   if (!tok) return;
                   auto value = body_value(req, res);
                   if (!value) return;
                   Principal who = tok->local
                                       ? Principal{LocalUser{}}
                                       : Principal{ThirdParty{tok->token}};
                   auto out = platform_.submit(
                       who, AhoChange{req.matches[1].str(), *value},
                       now_locked());
                   fill_response(out, res);
                 });

    server_.Post(
        R"(/api/device/([A-Za-z0-9_\-]+)/([A-Za-z0-9_\-]+))",
        [this](const httplib::Request& req, httplib::Response& res) {
          std::scoped_lock lock(mu_);
          const ApiToken* tok = authenticate(req, res);
          if (!tok) return;
          auto value = body_value(req, res);
          if (!value) return;
          AttributeValue v;
          try {
            v = AttributeValue::parse(*value);
          } catch (const Error&) {
            res.status = 400;
            res.set_content(R"({"reason":"bad_value"})", "application/json");
            return;
          }
          Principal who = tok->local ? Principal{LocalUser{}}
                                     : Principal{ThirdParty{tok->token}};
          auto out = platform_.submit(
              who,
              DeviceAttributeChange{req.matches[1].str(), req.matches[2].str(),
                                    v},
              now_locked());
          fill_response(out, res);
        });

    server_.Get("/api/states", [this](const httplib::Request& req,
                                      httplib::Response& res) {
      std::scoped_lock lock(mu_);
      if (!authenticate(req, res)) return;
      platform_.advance_to(now_locked());
      nlohmann::ordered_json body;
      body["time"] = platform_.now();
      body["ahos"] = nlohmann::ordered_json::object();
      for (const auto& [name, value] : platform_.monitor().aho_values())
        body["ahos"][name] = value;
      body["devices"] = nlohmann::ordered_json::object();
      for (const auto* d : platform_.registry().devices()) {
        nlohmann::ordered_json jd;
        jd["type"] = d->type;
        jd["location"] = d->location;
        jd["online"] = d->online;
        jd["attributes"] = nlohmann::ordered_json::object();
        if (const auto* attrs = platform_.registry().device_map().attributes(d->type))
          for (const auto& a : *attrs)
            if (const auto* rec = platform_.states().latest(d->id, a.attribute)) {
              jd["attributes"][a.attribute] = {
                  {"value", rec->value.str()},
                  {"t", rec->timestamp},
                  {"trusted", rec->trusted}};
            }
        body["devices"][d->id] = std::move(jd);
      }
      res.set_content(body.dump(2), "application/json");
    });

    server_.Get("/api/notifications", [this](const httplib::Request& req,
                                             httplib::Response& res) {
      std::scoped_lock lock(mu_);
      if (!authenticate(req, res)) return;
      nlohmann::ordered_json body = nlohmann::ordered_json::array();
      for (const auto& n : platform_.monitor().notifications()) {
        nlohmann::ordered_json jn;
        jn["kind"] =
            n.kind == Notification::Kind::DENIAL ? "denial" : "warning";
        jn["t"] = n.at;
        jn["aho"] = n.aho;
        jn["value"] = n.value;
        jn["message"] = n.message;
        if (!n.failed_checks.empty()) jn["failed_checks"] = n.failed_checks;
        body.push_back(std::move(jn));
      }
      res.set_content(body.dump(2), "application/json");
    });
  }

  Platform& platform_;
  httplib::Server server_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace hearth
