#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hearth/error.hpp"
#include "hearth/platform.hpp"

namespace hearth {

struct SampleStats {
  std::vector<double> samples_ms;

  double mean() const {
    double s = 0;
    for (double v : samples_ms) s += v;
    return samples_ms.empty() ? 0.0 : s / samples_ms.size();
  }

  double stddev() const {
    if (samples_ms.size() < 2) return 0.0;
    double m = mean(), s = 0;
    for (double v : samples_ms) s += (v - m) * (v - m);
    return std::sqrt(s / (samples_ms.size() - 1));
  }

  double ci95() const {
    if (samples_ms.empty()) return 0.0;
    return 1.96 * stddev() / std::sqrt(double(samples_ms.size()));
  }

  nlohmann::ordered_json to_json() const {
    return {{"mean_ms", mean()}, {"stddev_ms", stddev()}, {"ci95_ms", ci95()}};
  }
};

struct OpReport {
  std::string op;
  std::string description;
  SampleStats baseline;
  SampleStats monitored;

  double overhead_ms() const { return monitored.mean() - baseline.mean(); }
  double overhead_pct() const {
    double b = baseline.mean();
    return b == 0.0 ? 0.0 : overhead_ms() / b * 100.0;
  }
  /// A difference smaller than the combined confidence radii is noise, and
  /// is reported as "no measurable overhead" rather than a negative cost.
  bool measurable() const {
    return std::abs(overhead_ms()) > baseline.ci95() + monitored.ci95();
  }

  nlohmann::ordered_json to_json(bool with_monitored) const {
    nlohmann::ordered_json j;
    j["op"] = op;
    j["description"] = description;
    j["baseline"] = baseline.to_json();
    if (with_monitored) {
      j["monitored"] = monitored.to_json();
      j["overhead_ms"] = overhead_ms();
      j["overhead_pct"] = overhead_pct();
      j["measurable_overhead"] = measurable();
      if (!measurable()) j["note"] = "no measurable overhead";
    }
    return j;
  }
};

struct BenchReport {
  std::string suite;
  int runs = 0;
  bool baseline_only = false;
  std::vector<OpReport> ops;

  const OpReport* find(const std::string& name) const {
    for (const auto& o : ops)
      if (o.op == name) return &o;
    return nullptr;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["suite"] = suite;
    j["runs"] = runs;
    j["baseline_only"] = baseline_only;
    j["ops"] = nlohmann::ordered_json::array();
    for (const auto& o : ops) j["ops"].push_back(o.to_json(!baseline_only));
    return j;
  }
};

/// Measures the mediation stack against a monitor-with-endorsement-disabled
/// baseline on the reference 11-device home. Micro ops: boot instantiation,
/// deployment-change policy update, non-endorsed AHO change (hook path),
/// endorsed AHO change (endorsement path). Macro ops: routine execution
/// triggered by endorsed / non-endorsed AHO changes. Workloads are fixed;
/// only timings vary run to run.
class BenchHarness {
 public:
  /// `home` should match the suite: the micro ops want the reference home
  /// with no routines, the macro ops want it with the two reference routines
  /// installed.
  BenchHarness(DeviceAttributeMap map, nlohmann::json home,
               std::vector<PolicyTemplate> templates,
               nlohmann::json interactions)
      : map_(std::move(map)),
        home_(std::move(home)),
        templates_(std::move(templates)),
        interactions_(std::move(interactions)) {}

  BenchReport run(const std::string& suite, int runs, bool baseline_only) {
    if (runs < 50)
      throw Error(ErrorCode::InvalidConfig,
                  "benchmark needs at least 50 runs, got " +
                      std::to_string(runs));
    BenchReport report;
    report.suite = suite;
    report.runs = runs;
    report.baseline_only = baseline_only;

    if (suite == "micro") {
      report.ops.push_back(measure(
          "boot-instantiation",
          "platform boot: template load plus per-device policy derivation",
          runs, baseline_only, [this](bool endorse) {
            return time_ms([&] { make_home(endorse); });
          }));
      report.ops.push_back(measure(
          "policy-update", "active-policy refresh on device add/remove", runs,
          baseline_only, [this](bool endorse) {
            auto p = make_home(endorse);
            const int k = 10;
            double total = time_ms([&] {
              for (int i = 0; i < k; ++i) {
                p->add_device({"bench-extra", "motion-sensor", "home"}, 10000);
                p->remove_device("bench-extra", 10000);
              }
            });
            return total / (2 * k);
          }));
      report.ops.push_back(measure(
          "hook-invocation", "third-party change of a non-endorsed AHO", runs,
          baseline_only, [this](bool endorse) {
            auto p = make_home(endorse);
            const int k = 5000;
            double total = time_ms([&] {
              for (int i = 0; i < k; ++i)
                p->submit(ThirdParty{"tracker"}, AhoChange{"guest_mode", "on"},
                          10000);
            });
            return total / k;
          }));
      report.ops.push_back(measure(
          "endorsement-check", "third-party change of an endorsed AHO", runs,
          baseline_only, [this](bool endorse) {
            auto p = make_home(endorse);
            seed_evidence(*p);
            const int k = 1000;
            double total = time_ms([&] {
              for (int i = 0; i < k; ++i)
                p->submit(ThirdParty{"tracker"}, AhoChange{"home", "home"},
                          10000);
            });
            return total / k;
          }));
      return report;
    }

    if (suite == "macro") {
      report.ops.push_back(measure(
          "automation-endorsed",
          "routine fired by an endorsed AHO change, end to end", runs,
          baseline_only, [this](bool endorse) {
            auto p = make_home(endorse);
            seed_evidence(*p);
            const int k = 500;
            double total = time_ms([&] {
              for (int i = 0; i < k; ++i)
                p->submit(ThirdParty{"tracker"}, AhoChange{"home", "home"},
                          10000);
            });
            return total / k;
          }));
      report.ops.push_back(measure(
          "automation-non-endorsed",
          "routine fired by a non-endorsed AHO change, end to end", runs,
          baseline_only, [this](bool endorse) {
            auto p = make_home(endorse);
            const int k = 500;
            double total = time_ms([&] {
              for (int i = 0; i < k; ++i)
                p->submit(ThirdParty{"tracker"}, AhoChange{"guest_mode", "on"},
                          10000);
            });
            return total / k;
          }));
      return report;
    }

    throw Error(ErrorCode::InvalidConfig, "unknown suite " + suite);
  }

 private:
  template <typename F>
  static double time_ms(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  }

  /// One sample per run, baseline and monitored interleaved so slow drift
  /// (thermal, scheduler) hits both the same way.
  OpReport measure(const std::string& name, const std::string& desc, int runs,
                   bool baseline_only,
                   const std::function<double(bool)>& sample) {
    OpReport r;
    r.op = name;
    r.description = desc;
    sample(false);  // warm-up, untimed
    if (!baseline_only) sample(true);
    for (int i = 0; i < runs; ++i) {
      r.baseline.samples_ms.push_back(sample(false));
      if (!baseline_only) r.monitored.samples_ms.push_back(sample(true));
    }
    return r;
  }

  std::unique_ptr<Platform> make_home(bool endorsement) {
    auto p = std::make_unique<Platform>(map_, Platform::Options{endorsement});
    p->load_interactions(interactions_);
    p->boot(home_, {templates_});
    return p;
  }

  /// Drives the physical actions that satisfy every check of the reference
  /// home's strongest policy, all inside the freshness window of t=10000.
  void seed_evidence(Platform& p) {
    p.apply_physical("lock-1", "unlock", {{"method", "owner"}}, 1000);
    p.apply_physical("door-1", "open", {}, 1500);
    p.apply_physical("motion-1", "walk-past", {}, 2000);
    p.apply_physical("panel-1", "disarm", {{"method", "keypad"}}, 2500);
    p.apply_physical("presence-1", "arrive", {}, 3000);
    p.apply_physical("beacon-1", "detect", {}, 3500);
    p.apply_physical("thermostat-1", "sense-motion", {}, 4000);
  }

  DeviceAttributeMap map_;
  nlohmann::json home_;
  std::vector<PolicyTemplate> templates_;
  nlohmann::json interactions_;
};

}  // namespace hearth
