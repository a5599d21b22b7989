#pragma once

// Fog controller decision functions. Every decision is a pure function of a
// RanView snapshot plus the request, so replaying a view replays the
// decision byte for byte.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "frugal5g/access_point.hpp"
#include "frugal5g/lte_stack.hpp"

namespace f5g::ctrl {

using wlan::ApDescriptor;
using wlan::ApKind;
using wlan::PowerState;

enum class NodeKind { Pop, MacroEnb, MiddleMile, WlanAp, Ue, Cn, Gateway };
std::string_view node_kind_name(NodeKind k);
std::optional<NodeKind> parse_node_kind(std::string_view name);

// Wired/middle-mile graph. Radio hops between UEs and APs are not edges;
// they live in RanView::reachability.
struct Topology {
  std::map<std::string, NodeKind> nodes;
  std::map<std::string, std::map<std::string, std::uint64_t>> adj;  // neighbour -> capacity bps

  void add_node(const std::string& id, NodeKind kind);
  void add_link(const std::string& a, const std::string& b, std::uint64_t capacity_bps);
  bool has(const std::string& id) const { return nodes.count(id) != 0; }
  std::optional<NodeKind> kind(const std::string& id) const;
  std::uint64_t capacity(const std::string& a, const std::string& b) const;
  // The single PoP, or empty.
  std::string pop() const;
};

struct FlowSpec {
  std::string flow_id;
  std::string ue_id;
  lte::ServiceClass service = lte::ServiceClass::Background;
  std::uint64_t demand_bps = 0;
  std::optional<std::string> assigned_ap;
  std::optional<std::vector<std::string>> path;

  friend bool operator==(const FlowSpec&, const FlowSpec&) = default;
};

struct RanView {
  std::map<std::string, ApDescriptor> aps;
  std::map<std::string, std::set<std::string>> reachability;  // ue -> APs in radio range
  std::map<std::string, FlowSpec> flows;
  std::map<std::string, std::string> serving;  // ue -> AP it is associated with
  std::set<std::string> asleep;                // sleeping APs and middle-mile nodes
  Topology topology;
};

// Canonical text form of the view; its FNV digest tags decision records.
std::string view_canonical(const RanView& view);
std::uint64_t view_digest(const RanView& view);

// Replaces (or adds) the AP entry. Throws Error(StaleReport) when the report
// is older than the one held.
RanView ingest_report(const RanView& view, const ApDescriptor& report);

// Minimal post-assignment utilization (load + demand) / capacity among
// reachable Awake APs with spare >= demand; ties NativeWifi first, then the
// smallest ap_id. Throws Error(NoCapacity) when no AP qualifies.
std::string select_rat(const RanView& view, const FlowSpec& flow);

// Shortest hop-count path, ties broken by the lexicographically smallest
// node-id sequence. Nodes in `excluded` are treated as absent. Throws
// Error(Disconnected), or Error(InvariantViolation) for an unknown node.
std::vector<std::string> compute_path(const Topology& topo, const std::string& from,
                                      const std::string& to,
                                      const std::set<std::string>& excluded = {});

enum class ActionKind { Associate, Reroute, Deauth };
std::string_view action_kind_name(ActionKind k);

struct HandoverAction {
  ActionKind kind;
  std::string ap;
  std::vector<std::string> flows;  // Reroute only
  std::vector<std::string> path;   // Reroute only: new AP -> PoP route

  friend bool operator==(const HandoverAction&, const HandoverAction&) = default;
};

// Make-before-break: [Associate(to), Reroute(flows), Deauth(source)].
// Empty when the UE is already served by `to_ap`. Throws Error(Unreachable)
// or Error(NoCapacity).
std::vector<HandoverAction> handover(const RanView& view, const std::string& ue,
                                     const std::string& to_ap);

// AN-only path between two associated UEs, UE ids at both ends. Throws
// Error(NotAssociated) or Error(Disconnected).
std::vector<std::string> setup_local_path(const RanView& view, const std::string& ue_a,
                                          const std::string& ue_b);

// ---- energy ----------------------------------------------------------------

// Demand per active flow over the planning horizon; flows absent from the
// map keep their FlowSpec demand, and a zero entry marks the flow idle.
using HorizonDemand = std::map<std::string, std::uint64_t>;

// Nodes the planner may put to sleep: WLAN APs and middle-mile nodes that
// are not asleep already. Never the macro eNB.
std::vector<std::string> sleep_candidates(const RanView& view);

// True when, with `sleeping` added to the view's asleep set, (a) every
// served UE still reaches an Awake AP that is connected to the PoP and (b)
// every active flow has such an AP and the demands fit AP and link
// capacities along the canonical routes. `witness` only tries one greedy
// reassignment; otherwise every assignment is searched.
bool energy_feasible(const RanView& view, const HorizonDemand& demand,
                     const std::set<std::string>& sleeping, bool witness_only);

// Greedy sleep set: candidates ordered by (utilization, id), each kept asleep
// when the set stays feasible. Empty set is always valid.
std::set<std::string> energy_plan(const RanView& view, const HorizonDemand& demand);

}  // namespace f5g::ctrl
