#pragma once

// Whole-network run: builds the APs, backhaul and controller from a
// scenario, drives traffic through them and returns the trace and metrics.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "frugal5g/scenario.hpp"
#include "frugal5g/trace.hpp"

namespace f5g::sim {

struct FlowMetrics {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t reordered = 0;
  double mean_latency_ms = 0;
  double p95_latency_ms = 0;
  double throughput_bps = 0;
  std::vector<std::string> serving_history;  // serving AP, one entry per change
};

struct ApSample {
  SimTime t = 0;
  double utilization = 0;
  int stations = 0;
  std::string power;
};

struct Metrics {
  std::string scenario;
  std::uint64_t seed = 0;
  SimTime duration = 0;
  std::map<std::string, FlowMetrics> flows;
  std::map<std::string, std::vector<ApSample>> ap_timeline;
  std::map<std::string, SimTime> asleep_us;  // per node
  SimTime asleep_total_us = 0;
  std::uint64_t handovers = 0;
  std::uint64_t decisions = 0;
  std::string decision_digest;
  std::map<std::string, std::string> ue_modes;  // emulation | standard-nas | none
  std::uint64_t trace_records = 0;
  std::string trace_digest;
};

struct RunOutput {
  Trace trace;
  Metrics metrics;
};

// `seed` overrides the scenario's. Deterministic in (scenario, seed).
// Invariant violations propagate as Error naming the event's node and time.
RunOutput run(const scenario::Scenario& s, std::optional<std::uint64_t> seed = std::nullopt);

// Stable JSON rendering (sorted keys).
std::string metrics_json(const Metrics& m);

}  // namespace f5g::sim
