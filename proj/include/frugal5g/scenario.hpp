#pragma once

// Scenario files: YAML describing topology, radio parameters, traffic,
// policy knobs and timed events. docs/scenario_schema.md has the full
// schema; load_scenario() enforces it and the topology rules.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frugal5g/controller.hpp"
#include "frugal5g/engine.hpp"
#include "frugal5g/interworking.hpp"
#include "frugal5g/link_model.hpp"
#include "frugal5g/lte_stack.hpp"

namespace f5g::scenario {

struct Position {
  double x = 0;
  double y = 0;
};

struct Move {
  SimTime at = 0;
  Position pos;
};

struct NodeSpec {
  std::string id;
  ctrl::NodeKind type = ctrl::NodeKind::Ue;
  Position pos;
  std::optional<double> range_m;  // radio range of APs/eNB; unset = unlimited
  std::uint64_t capacity_bps = 0;
  SimTime latency = 0;            // radio-hop latency of a WLAN AP
  std::string ssid = "frugal5g";
  std::string credential;         // UEs
  lte::ServiceClass service = lte::ServiceClass::Background;
  std::vector<Move> moves;
  SimTime start = 0;              // UE power-on
  int line = 0;
};

struct LinkSpec {
  std::string a;
  std::string b;
  std::uint64_t capacity_bps = 100'000'000;
  SimTime latency = ms(1);
  int line = 0;
};

enum class TrafficKind { Cbr, Poisson };
enum class FlowDirection { Uplink, Downlink };

inline constexpr std::string_view kInternet = "internet";

struct TrafficSpec {
  std::string id;
  std::string ue;
  std::string dst = std::string(kInternet);  // "internet" or a peer UE id
  FlowDirection direction = FlowDirection::Uplink;
  lte::ServiceClass service = lte::ServiceClass::Background;
  TrafficKind kind = TrafficKind::Cbr;
  std::uint64_t rate_bps = 0;
  std::uint32_t packet_size = 200;
  SimTime start = 0;
  SimTime stop = 0;
  int line = 0;

  bool external() const { return dst == kInternet; }
};

struct LteSpec {
  SimTime beacon_period = us(102'400);
  SimTime mcch_period = ms(100);
  bool mrb_enabled = true;
  LinkParams srb{1'000'000, ms(5)};
  LinkParams drb{10'000'000, ms(10)};
  LinkParams mrb{1'000'000, ms(5)};
};

struct WifiSpec {
  SimTime beacon_period = us(102'400);
};

struct PolicySpec {
  SimTime reeval_period = seconds(1);
  double report_delta = 0.1;
  bool energy_saving = false;
  SimTime sync_period = seconds(5);
};

enum class EventAction { Sleep, Wake, Revoke, ApPower };

struct EventSpec {
  SimTime at = 0;
  EventAction action = EventAction::Sleep;
  std::string target;
  std::string state;  // ap_power: "asleep" | "awake"
  int line = 0;
};

struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  SimTime duration = 0;
  iw::NetworkMode mode = iw::NetworkMode::Standalone;
  LteSpec lte;
  WifiSpec wifi;
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<TrafficSpec> traffic;
  std::optional<iw::Registry> registry;  // unset: every UE's own credential
  PolicySpec policy;
  std::vector<EventSpec> events;

  const NodeSpec* node(const std::string& id) const;
  std::vector<const NodeSpec*> nodes_of(ctrl::NodeKind kind) const;
  iw::Registry effective_registry() const;
  ctrl::Topology topology() const;
};

// Throws Error(SchemaError) with "line N: ..." diagnostics.
Scenario load_scenario(std::string_view text);
// Throws Error(Io) when the file cannot be read.
Scenario load_scenario_file(const std::string& path);
// Topology and cross-reference rules; load_scenario() already applies it.
void validate(const Scenario& s);

double distance(const Position& a, const Position& b);

}  // namespace f5g::scenario
