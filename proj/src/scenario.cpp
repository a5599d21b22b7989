#include "frugal5g/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "frugal5g/error.hpp"

namespace f5g::scenario {

namespace {

[[noreturn]] void schema(int line, const std::string& msg) {
  if (line > 0) fail(Errc::SchemaError, "line " + std::to_string(line) + ": " + msg);
  fail(Errc::SchemaError, msg);
}

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

// Typed access to one YAML mapping, rejecting keys outside `allowed`.
class Fields {
 public:
  Fields(const YAML::Node& node, std::string where, std::set<std::string> allowed)
      : node_(node), where_(std::move(where)) {
    if (!node_.IsMap()) schema(line_of(node_), where_ + " must be a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) schema(line_of(kv.first), "unknown field '" + key + "' in " + where_);
    }
  }

  int line() const { return line_of(node_); }
  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  YAML::Node raw(const std::string& key) const { return node_[key]; }

  template <class T>
  T get(const std::string& key, T fallback) const {
    YAML::Node v = node_[key];
    if (!v) return fallback;
    return convert<T>(v, key);
  }

  template <class T>
  T require(const std::string& key) const {
    YAML::Node v = node_[key];
    if (!v) schema(line(), "missing field '" + key + "' in " + where_);
    return convert<T>(v, key);
  }

  template <class T>
  T convert(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) schema(line_of(v), "field '" + key + "' in " + where_ + " must be a scalar");
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      schema(line_of(v), "field '" + key + "' in " + where_ + " has a bad value '" + v.Scalar() + "'");
    }
  }

  SimTime millis(const std::string& key, SimTime fallback) const {
    if (!has(key)) return fallback;
    const double v = get<double>(key, 0.0);
    if (!std::isfinite(v) || v < 0) schema(line_of(raw(key)), "field '" + key + "' must be >= 0");
    return from_ms(v);
  }

  std::uint64_t positive(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const double v = get<double>(key, 0.0);
    if (!std::isfinite(v) || v <= 0 || v > 1e15) schema(line_of(raw(key)), "field '" + key + "' must be > 0");
    return static_cast<std::uint64_t>(std::llround(v));
  }

 private:
  YAML::Node node_;
  std::string where_;
};

Position position(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence() || n.size() != 2) schema(line_of(n), where + ": pos must be [x, y]");
  try {
    return {n[0].as<double>(), n[1].as<double>()};
  } catch (const YAML::Exception&) {
    schema(line_of(n), where + ": pos must hold two numbers");
  }
}

lte::ServiceClass service(const Fields& f, const std::string& where) {
  if (!f.has("service_class")) return lte::ServiceClass::Background;
  auto name = f.get<std::string>("service_class", "");
  auto c = lte::parse_service_class(name);
  if (!c) schema(line_of(f.raw("service_class")), where + ": unknown service_class '" + name + "'");
  return *c;
}

LinkParams link_params(const YAML::Node& n, const std::string& where, LinkParams fallback) {
  if (!n) return fallback;
  Fields f(n, where, {"capacity_bps", "latency_ms"});
  return {f.positive("capacity_bps", fallback.capacity_bps), f.millis("latency_ms", fallback.latency)};
}

NodeSpec parse_node(const YAML::Node& n, std::size_t index) {
  const std::string where = "nodes[" + std::to_string(index) + "]";
  Fields f(n, where, {"id", "type", "pos", "range_m", "capacity_bps", "latency_ms", "ssid",
                      "credential", "service_class", "moves", "start_ms"});
  NodeSpec s;
  s.line = f.line();
  s.id = f.require<std::string>("id");
  auto type = f.require<std::string>("type");
  auto kind = ctrl::parse_node_kind(type);
  if (!kind) schema(line_of(f.raw("type")), where + ": unknown node type '" + type + "'");
  s.type = *kind;
  if (f.has("pos")) s.pos = position(f.raw("pos"), where);
  if (f.has("range_m")) {
    const double r = f.get<double>("range_m", 0.0);
    if (!(r > 0)) schema(line_of(f.raw("range_m")), where + ": range_m must be > 0");
    s.range_m = r;
  }
  const std::uint64_t default_cap = s.type == ctrl::NodeKind::MacroEnb ? 20'000'000 : 50'000'000;
  s.capacity_bps = f.positive("capacity_bps", default_cap);
  s.latency = f.millis("latency_ms", ms(2));
  s.ssid = f.get<std::string>("ssid", "frugal5g");
  if (s.ssid.empty() || s.ssid.size() > 32) schema(line_of(f.raw("ssid")), where + ": ssid must be 1..32 bytes");
  s.credential = f.get<std::string>("credential", "cred-" + s.id);
  s.service = service(f, where);
  s.start = f.millis("start_ms", 0);
  if (f.has("moves")) {
    const auto moves = f.raw("moves");
    if (!moves.IsSequence()) schema(line_of(moves), where + ": moves must be a list");
    for (std::size_t i = 0; i < moves.size(); ++i) {
      const std::string mw = where + ".moves[" + std::to_string(i) + "]";
      Fields mf(moves[i], mw, {"at_ms", "pos"});
      if (!mf.has("pos")) schema(mf.line(), "missing field 'pos' in " + mw);
      s.moves.push_back({mf.millis("at_ms", 0), position(mf.raw("pos"), mw)});
    }
  }
  return s;
}

TrafficSpec parse_traffic(const YAML::Node& n, std::size_t index) {
  const std::string where = "traffic[" + std::to_string(index) + "]";
  Fields f(n, where, {"id", "ue", "dst", "direction", "service_class", "kind", "rate_bps",
                      "packet_size", "start_ms", "stop_ms"});
  TrafficSpec t;
  t.line = f.line();
  t.id = f.require<std::string>("id");
  t.ue = f.require<std::string>("ue");
  t.dst = f.get<std::string>("dst", std::string(kInternet));
  auto dir = f.get<std::string>("direction", "uplink");
  if (dir == "uplink")
    t.direction = FlowDirection::Uplink;
  else if (dir == "downlink")
    t.direction = FlowDirection::Downlink;
  else
    schema(line_of(f.raw("direction")), where + ": direction must be uplink or downlink");
  t.service = service(f, where);
  auto kind = f.get<std::string>("kind", "cbr");
  if (kind == "cbr")
    t.kind = TrafficKind::Cbr;
  else if (kind == "poisson")
    t.kind = TrafficKind::Poisson;
  else
    schema(line_of(f.raw("kind")), where + ": kind must be cbr or poisson");
  if (!f.has("rate_bps")) schema(t.line, "missing field 'rate_bps' in " + where);
  t.rate_bps = f.positive("rate_bps", 0);
  const auto size = f.get<long long>("packet_size", 200);
  if (size < 16 || size > 2304) schema(line_of(f.raw("packet_size")), where + ": packet_size must be 16..2304");
  t.packet_size = static_cast<std::uint32_t>(size);
  t.start = f.millis("start_ms", 0);
  if (!f.has("stop_ms")) schema(t.line, "missing field 'stop_ms' in " + where);
  t.stop = f.millis("stop_ms", 0);
  if (t.start >= t.stop) schema(t.line, where + ": start_ms must be < stop_ms");
  return t;
}

EventSpec parse_event(const YAML::Node& n, std::size_t index) {
  const std::string where = "events[" + std::to_string(index) + "]";
  Fields f(n, where, {"at_ms", "action", "target", "state"});
  EventSpec e;
  e.line = f.line();
  e.at = f.millis("at_ms", 0);
  auto action = f.require<std::string>("action");
  if (action == "sleep")
    e.action = EventAction::Sleep;
  else if (action == "wake")
    e.action = EventAction::Wake;
  else if (action == "revoke")
    e.action = EventAction::Revoke;
  else if (action == "ap_power")
    e.action = EventAction::ApPower;
  else
    schema(line_of(f.raw("action")), where + ": unknown action '" + action + "'");
  e.target = f.require<std::string>("target");
  e.state = f.get<std::string>("state", "");
  if (e.action == EventAction::ApPower && e.state != "asleep" && e.state != "awake")
    schema(e.line, where + ": ap_power needs state asleep or awake");
  return e;
}

bool valid_id(const std::string& id) {
  if (id.empty() || id == kInternet) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

}  // namespace

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

const NodeSpec* Scenario::node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<const NodeSpec*> Scenario::nodes_of(ctrl::NodeKind kind) const {
  std::vector<const NodeSpec*> out;
  for (const auto& n : nodes)
    if (n.type == kind) out.push_back(&n);
  return out;
}

iw::Registry Scenario::effective_registry() const {
  if (registry) return *registry;
  iw::Registry r;
  for (const auto* ue : nodes_of(ctrl::NodeKind::Ue)) r[ue->id] = ue->credential;
  return r;
}

ctrl::Topology Scenario::topology() const {
  ctrl::Topology t;
  for (const auto& n : nodes)
    if (n.type != ctrl::NodeKind::Ue) t.add_node(n.id, n.type);
  for (const auto& l : links) t.add_link(l.a, l.b, l.capacity_bps);
  return t;
}

void validate(const Scenario& s) {
  using ctrl::NodeKind;
  std::set<std::string> ids;
  for (const auto& n : s.nodes) {
    if (!valid_id(n.id)) schema(n.line, "node id '" + n.id + "' must be non-empty [A-Za-z0-9_.-] and not 'internet'");
    if (!ids.insert(n.id).second) schema(n.line, "duplicate node id '" + n.id + "'");
  }
  if (s.nodes_of(NodeKind::Pop).size() > 1) schema(0, "at most one pop node is allowed");
  if (s.nodes_of(NodeKind::MacroEnb).size() > 1) schema(0, "at most one macro_enb node is allowed");
  const auto pops = s.nodes_of(NodeKind::Pop);
  const std::string pop = pops.empty() ? "" : pops.front()->id;

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& l : s.links) {
    const auto* a = s.node(l.a);
    const auto* b = s.node(l.b);
    if (!a) schema(l.line, "link endpoint '" + l.a + "' does not exist");
    if (!b) schema(l.line, "link endpoint '" + l.b + "' does not exist");
    if (l.a == l.b) schema(l.line, "link from '" + l.a + "' to itself");
    if (!seen.insert(l.a < l.b ? std::pair{l.a, l.b} : std::pair{l.b, l.a}).second)
      schema(l.line, "duplicate link " + l.a + " - " + l.b);
    for (const auto* n : {a, b}) {
      const auto* other = n == a ? b : a;
      if (n->type == NodeKind::Ue) schema(l.line, "UE '" + n->id + "' cannot have wired links");
      if (n->type == NodeKind::WlanAp && other->type == NodeKind::Pop)
        schema(l.line, "WLAN AP '" + n->id + "' must reach the PoP through middle-mile nodes, not directly");
      if ((n->type == NodeKind::Cn || n->type == NodeKind::Gateway) && other->type != NodeKind::Pop)
        schema(l.line, "'" + n->id + "' may only link to the PoP");
      if (n->type == NodeKind::MacroEnb && other->type != NodeKind::Pop)
        schema(l.line, "macro eNB '" + n->id + "' links only to the PoP");
    }
  }
  if (!pop.empty()) {
    for (const auto* enb : s.nodes_of(NodeKind::MacroEnb))
      if (!seen.count(enb->id < pop ? std::pair{enb->id, pop} : std::pair{pop, enb->id}))
        schema(enb->line, "macro eNB '" + enb->id + "' must link directly to the PoP");
  } else if (!s.nodes_of(NodeKind::WlanAp).empty() || !s.nodes_of(NodeKind::MiddleMile).empty()) {
    schema(0, "WLAN APs and middle-mile nodes need a pop node");
  }

  if (s.mode == iw::NetworkMode::FiveGCore && s.nodes_of(NodeKind::Cn).size() != 1)
    schema(0, "mode five_g_core needs exactly one cn node");
  if (s.mode == iw::NetworkMode::FixedBroadband && s.nodes_of(NodeKind::Gateway).size() != 1)
    schema(0, "mode fixed_broadband needs exactly one gateway node");
  for (auto kind : {NodeKind::Cn, NodeKind::Gateway})
    for (const auto* n : s.nodes_of(kind))
      if (pop.empty() || !seen.count(n->id < pop ? std::pair{n->id, pop} : std::pair{pop, n->id}))
        schema(n->line, "'" + n->id + "' must link to the PoP");

  std::set<std::string> flow_ids;
  for (const auto& t : s.traffic) {
    if (!valid_id(t.id)) schema(t.line, "flow id '" + t.id + "' is not a valid id");
    if (!flow_ids.insert(t.id).second) schema(t.line, "duplicate flow id '" + t.id + "'");
    const auto* ue = s.node(t.ue);
    if (!ue || ue->type != NodeKind::Ue) schema(t.line, "flow '" + t.id + "': '" + t.ue + "' is not a UE");
    if (!t.external()) {
      const auto* peer = s.node(t.dst);
      if (!peer || peer->type != NodeKind::Ue || peer->id == t.ue)
        schema(t.line, "flow '" + t.id + "': dst must be 'internet' or another UE");
      if (t.direction != FlowDirection::Uplink)
        schema(t.line, "flow '" + t.id + "': UE-to-UE flows are uplink from the sender");
    }
  }

  for (const auto& e : s.events) {
    const auto* n = s.node(e.target);
    if (!n) schema(e.line, "event target '" + e.target + "' does not exist");
    const bool wants_ap = e.action == EventAction::ApPower;
    if (wants_ap && n->type != NodeKind::WlanAp && n->type != NodeKind::MiddleMile)
      schema(e.line, "ap_power targets a WLAN AP or middle-mile node");
    if (!wants_ap && n->type != NodeKind::Ue) schema(e.line, "event target '" + e.target + "' must be a UE");
    if (e.action == EventAction::Revoke && s.mode != iw::NetworkMode::FiveGCore)
      schema(e.line, "revoke events need mode five_g_core");
  }

  if (s.registry)
    for (const auto& [ue, _] : *s.registry)
      if (!valid_id(ue)) schema(0, "registry entry '" + ue + "' is not a valid id");
  if (s.policy.reeval_period <= 0) schema(0, "policy.reeval_period_ms must be > 0");
  if (s.policy.sync_period <= 0) schema(0, "policy.sync_period_ms must be > 0");
  if (s.lte.beacon_period <= 0 || s.wifi.beacon_period <= 0) schema(0, "beacon periods must be > 0");
  if (s.lte.mcch_period <= 0) schema(0, "lte.mcch_period_ms must be > 0");
}

Scenario load_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    schema(e.mark.line >= 0 ? e.mark.line + 1 : 0, "YAML syntax: " + e.msg);
  }

  Scenario s;
  if (!root || root.IsNull()) {
    validate(s);
    return s;
  }
  Fields top(root, "scenario", {"name", "seed", "duration_ms", "mode", "lte", "wifi", "nodes", "links",
                                "traffic", "registry", "policy", "events"});
  s.name = top.get<std::string>("name", "unnamed");
  s.seed = top.get<std::uint64_t>("seed", 1);
  s.duration = top.millis("duration_ms", 0);
  auto mode = top.get<std::string>("mode", "standalone");
  auto m = iw::parse_network_mode(mode);
  if (!m) schema(line_of(top.raw("mode")), "mode must be five_g_core, fixed_broadband or standalone");
  s.mode = *m;

  if (top.has("lte")) {
    Fields f(top.raw("lte"), "lte", {"beacon_period_ms", "mcch_period_ms", "mrb_enabled", "srb", "drb", "mrb"});
    s.lte.beacon_period = f.millis("beacon_period_ms", s.lte.beacon_period);
    s.lte.mcch_period = f.millis("mcch_period_ms", s.lte.mcch_period);
    s.lte.mrb_enabled = f.get<bool>("mrb_enabled", true);
    s.lte.srb = link_params(f.raw("srb"), "lte.srb", s.lte.srb);
    s.lte.drb = link_params(f.raw("drb"), "lte.drb", s.lte.drb);
    s.lte.mrb = link_params(f.raw("mrb"), "lte.mrb", s.lte.mrb);
  }
  if (top.has("wifi")) {
    Fields f(top.raw("wifi"), "wifi", {"beacon_period_ms"});
    s.wifi.beacon_period = f.millis("beacon_period_ms", s.wifi.beacon_period);
  }
  auto list = [&](const char* key) {
    YAML::Node n = top.raw(key);
    if (n && !n.IsSequence() && !n.IsNull()) schema(line_of(n), std::string(key) + " must be a list");
    return n;
  };
  if (auto nodes = list("nodes"); nodes && nodes.IsSequence())
    for (std::size_t i = 0; i < nodes.size(); ++i) s.nodes.push_back(parse_node(nodes[i], i));
  if (auto links = list("links"); links && links.IsSequence())
    for (std::size_t i = 0; i < links.size(); ++i) {
      const std::string where = "links[" + std::to_string(i) + "]";
      Fields f(links[i], where, {"a", "b", "capacity_bps", "latency_ms"});
      LinkSpec l;
      l.line = f.line();
      l.a = f.require<std::string>("a");
      l.b = f.require<std::string>("b");
      l.capacity_bps = f.positive("capacity_bps", l.capacity_bps);
      l.latency = f.millis("latency_ms", l.latency);
      s.links.push_back(l);
    }
  if (auto traffic = list("traffic"); traffic && traffic.IsSequence())
    for (std::size_t i = 0; i < traffic.size(); ++i) s.traffic.push_back(parse_traffic(traffic[i], i));
  if (auto events = list("events"); events && events.IsSequence())
    for (std::size_t i = 0; i < events.size(); ++i) s.events.push_back(parse_event(events[i], i));
  if (top.has("registry")) {
    YAML::Node r = top.raw("registry");
    if (!r.IsMap()) schema(line_of(r), "registry must map UE ids to credentials");
    iw::Registry reg;
    for (const auto& kv : r) reg[kv.first.as<std::string>()] = kv.second.as<std::string>();
    s.registry = reg;
  }
  if (top.has("policy")) {
    Fields f(top.raw("policy"), "policy", {"reeval_period_ms", "report_delta", "energy_saving", "sync_period_ms"});
    s.policy.reeval_period = f.millis("reeval_period_ms", s.policy.reeval_period);
    s.policy.report_delta = f.get<double>("report_delta", s.policy.report_delta);
    if (!(s.policy.report_delta >= 0)) schema(line_of(f.raw("report_delta")), "policy.report_delta must be >= 0");
    s.policy.energy_saving = f.get<bool>("energy_saving", false);
    s.policy.sync_period = f.millis("sync_period_ms", s.policy.sync_period);
  }
  validate(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return load_scenario(os.str());
}

}  // namespace f5g::scenario
