#include "frugal5g/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <memory>
#include <random>
#include <set>

#include "json.hpp"

#include "frugal5g/controller.hpp"
#include "frugal5g/emulated_ap.hpp"
#include "frugal5g/error.hpp"
#include "frugal5g/interworking.hpp"
#include "frugal5g/link_model.hpp"
#include "frugal5g/wlan.hpp"

namespace f5g::sim {

using scenario::FlowDirection;
using scenario::Scenario;
using scenario::TrafficSpec;
using wlan::Bytes;
using wlan::PowerState;

namespace {

// Data SDU header: flow index, sequence number, send time. The rest of the
// SDU is zero padding up to the flow's packet size.
constexpr std::size_t kHeaderBytes = 16;

struct SduHeader {
  std::uint32_t flow = 0;
  std::uint32_t seq = 0;
  SimTime sent_at = 0;
};

Bytes make_sdu(const SduHeader& h, std::size_t size) {
  Bytes b(std::max(size, kHeaderBytes), 0);
  auto put = [&b](std::size_t off, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) b[off + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * (n - 1 - i)));
  };
  put(0, h.flow, 4);
  put(4, h.seq, 4);
  put(8, static_cast<std::uint64_t>(h.sent_at), 8);
  return b;
}

std::optional<SduHeader> parse_sdu(const Bytes& b) {
  if (b.size() < kHeaderBytes) return std::nullopt;
  auto get = [&b](std::size_t off, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
    return v;
  };
  return SduHeader{static_cast<std::uint32_t>(get(0, 4)), static_cast<std::uint32_t>(get(4, 4)),
                   static_cast<SimTime>(get(8, 8))};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out.push_back(sep);
    out += s;
  }
  return out.empty() ? "-" : out;
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

enum class Outcome : std::uint8_t { Live, Delivered, Dropped };

struct FlowRt {
  const TrafficSpec* spec = nullptr;
  std::uint32_t index = 0;
  std::mt19937_64 rng;
  std::deque<std::uint32_t> pending;  // generated, waiting for the UE to be served
  std::vector<SimTime> sent_at;       // by seq
  std::vector<Outcome> outcome;       // by seq
  std::uint64_t live = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t reordered = 0;
  std::int64_t highest_delivered = -1;
  std::vector<SimTime> latencies;
  std::vector<std::string> history;
  std::string local_route;
};

class Runtime {
 public:
  Runtime(const Scenario& s, std::uint64_t seed);

  void run();
  Metrics metrics();
  Trace& trace() { return trace_; }

 private:
  using Key = std::pair<std::string, std::string>;

  // ---- helpers ----
  SimTime now() const { return eng_.now(); }
  void emit(const std::string& node, TraceKind kind, TraceFields fields) {
    trace_.emit(now(), node, kind, std::move(fields));
  }
  void decision(const std::string& name, TraceFields fields, std::uint64_t inputs);
  const scenario::NodeSpec& spec(const std::string& id) const { return *s_.node(id); }
  bool in_range(const std::string& ap, const std::string& ue) const;
  iw::AuthSession session(const std::string& ue) const;
  bool settled(const std::string& ue) const;
  void schedule_every(SimTime first, SimTime period, const std::string& node, std::function<void()> fn);

  // ---- controller side ----
  void refresh_reports();
  bool routable(const std::string& ap) const;
  ctrl::RanView view();
  ctrl::FlowSpec aggregate(const std::string& ue) const;
  std::optional<std::string> choose(const std::string& ue, const ctrl::RanView& v, const std::string& why);
  void place(const std::string& ue);
  bool attach(const std::string& ue, const std::string& ap, std::function<void()> done);
  void attached(const std::string& ue, const std::string& ap);
  bool handover_to(const std::string& ue, const std::string& why);
  void check_serving();
  void reevaluate();
  void energy_pass();
  ctrl::HorizonDemand horizon() const;
  void start_drain(const std::string& node, bool planned);
  void cancel_drain(const std::string& node);
  bool drained(const std::string& node) const;
  void sleep_now(const std::string& node);
  void wake(const std::string& node);
  void schedule_poll();
  void poll();
  void note_serving(const std::string& ue, const std::string& ap);
  void sample_timeline();
  void sample_deltas();

  // ---- UE / network events ----
  void power_on(const std::string& ue);
  void on_deauth(const std::string& ap, const std::string& ue);
  void start_auth(const std::string& ue);
  void finish_auth(const std::string& ue, iw::AuthSession result);
  SimTime auth_latency(const std::string& ap) const;
  void sync_tick();
  void apply_event(const scenario::EventSpec& e);

  // ---- data path ----
  SimTime next_gap(FlowRt& f);
  void generate(std::size_t fi);
  void pump_ue(const std::string& ue);
  void pump(std::size_t fi);
  bool ready(const FlowRt& f) const;
  void dispatch(std::size_t fi, std::uint32_t seq);
  Bytes sdu_of(const FlowRt& f, std::uint32_t seq) const;
  std::optional<std::vector<std::string>> route(const std::string& from, const std::string& to) const;
  void forward(std::size_t fi, std::uint32_t seq, std::vector<std::string> path,
               std::function<void(bool)> done);
  void hop(std::size_t fi, std::uint32_t seq, std::shared_ptr<const std::vector<std::string>> path,
           std::size_t i, std::function<void(bool)> done);
  void at_pop(std::size_t fi, std::uint32_t seq);
  void local_forward(std::size_t fi, std::uint32_t seq, const std::string& ap);
  void radio_deliver(std::size_t fi, std::uint32_t seq, const std::string& ap, const std::string& ue);
  void on_uplink(const std::string& ap, const std::string& ue, const Bytes& sdu);
  void on_downlink(const std::string& ap, const std::string& ue, const Bytes& sdu);
  void on_drop(const std::string& ap, const std::string& ue, const Bytes& sdu);
  FlowRt& flow_of(const SduHeader& h, const std::string& where);
  void inflight_add(const std::string& ue, const std::string& ap, int delta);
  void drop_packet(std::size_t fi, std::uint32_t seq, const std::string& node, const std::string& reason);
  void finalize(FlowRt& f, std::uint32_t seq, Outcome o);

  const Scenario& s_;
  std::uint64_t seed_;
  Engine eng_;
  Trace trace_;
  ctrl::Topology topo_;
  std::string pop_, cn_, gw_;

  std::map<std::string, std::unique_ptr<wlan::AccessPoint>> aps_;
  emu::EmulatedAp* enb_ = nullptr;
  std::map<std::string, frames::MacAddress> macs_;
  std::map<std::string, scenario::Position> pos_;
  std::map<Key, LinkModel> links_;

  std::set<std::string> started_;
  std::map<std::string, std::string> serving_;
  std::map<std::string, std::string> attaching_;
  std::set<std::string> handing_over_;
  std::vector<Key> pending_deauth_;  // (ue, source ap)
  std::map<Key, int> inflight_;      // (ue, ap) -> SDUs on that radio hop or heading to it
  std::map<std::string, int> transit_;
  std::uint64_t handovers_ = 0;

  std::set<std::string> draining_, asleep_, planned_;
  std::map<std::string, SimTime> asleep_since_, asleep_total_;
  bool poll_scheduled_ = false;

  ctrl::RanView reports_;
  std::map<std::string, double> last_util_;
  std::map<std::string, std::vector<ApSample>> timeline_;
  std::uint64_t decision_hash_ = 0xcbf29ce484222325ULL;
  std::uint64_t decisions_ = 0;

  iw::Registry registry_;
  std::map<std::string, iw::AuthSession> sessions_;
  std::set<std::string> auth_running_;
  std::map<std::string, std::uint64_t> auth_attempts_;
  std::set<std::string> an_revoked_;
  iw::NetworkState cn_state_;
  std::uint64_t epoch_ = 0;

  std::vector<FlowRt> flows_;
};

Runtime::Runtime(const Scenario& s, std::uint64_t seed)
    : s_(s), seed_(seed), topo_(s.topology()), registry_(s.effective_registry()) {
  using ctrl::NodeKind;
  pop_ = topo_.pop();
  if (auto v = s.nodes_of(NodeKind::Cn); !v.empty()) cn_ = v.front()->id;
  if (auto v = s.nodes_of(NodeKind::Gateway); !v.empty()) gw_ = v.front()->id;

  for (const auto& l : s.links) {
    links_.emplace(Key{l.a, l.b}, LinkModel({l.capacity_bps, l.latency}));
    links_.emplace(Key{l.b, l.a}, LinkModel({l.capacity_bps, l.latency}));
  }

  std::uint32_t ue_index = 1;
  for (const auto* ue : s.nodes_of(NodeKind::Ue)) {
    macs_[ue->id] = frames::MacAddress::local(ue_index++);
    pos_[ue->id] = ue->pos;
  }

  auto hooks_for = [this](const std::string& ap) {
    wlan::ApHooks h;
    h.in_range = [this, ap](const std::string& ue) { return in_range(ap, ue); };
    h.ues_in_range = [this, ap] {
      std::vector<std::string> out;
      for (const auto& ue : started_)
        if (in_range(ap, ue)) out.push_back(ue);
      return out;
    };
    h.on_uplink = [this](const std::string& a, const std::string& u, const Bytes& b) { on_uplink(a, u, b); };
    h.on_downlink = [this](const std::string& a, const std::string& u, const Bytes& b) { on_downlink(a, u, b); };
    h.on_drop = [this](const std::string& a, const std::string& u, const Bytes& b) { on_drop(a, u, b); };
    h.on_deauthenticated = [this](const std::string& a, const std::string& u) { on_deauth(a, u); };
    return h;
  };

  std::uint32_t ap_index = 0x100000;
  for (const auto* n : s.nodes_of(NodeKind::MacroEnb)) {
    emu::EmulatedApConfig c;
    c.ap_id = n->id;
    c.bssid = frames::MacAddress::local(ap_index++);
    c.ssid = n->ssid;
    c.capacity_bps = n->capacity_bps;
    c.mrb_enabled = s.lte.mrb_enabled;
    c.mcch_period = s.lte.mcch_period;
    c.beacon_period = s.lte.beacon_period;
    c.srb = s.lte.srb;
    c.drb = s.lte.drb;
    c.mrb = s.lte.mrb;
    auto ap = std::make_unique<emu::EmulatedAp>(eng_, trace_, c, hooks_for(n->id));
    enb_ = ap.get();
    aps_[n->id] = std::move(ap);
  }
  for (const auto* n : s.nodes_of(NodeKind::WlanAp)) {
    wlan::WlanApConfig c;
    c.ap_id = n->id;
    c.bssid = frames::MacAddress::local(ap_index++);
    c.ssid = n->ssid;
    c.capacity_bps = n->capacity_bps;
    c.latency = n->latency;
    c.beacon_period = s.wifi.beacon_period;
    auto ap = std::make_unique<wlan::WlanAp>(eng_, trace_, c, hooks_for(n->id));
    for (const auto& [ue, mac] : macs_) ap->register_station_mac(ue, mac);
    aps_[n->id] = std::move(ap);
  }

  flows_.resize(s.traffic.size());
  for (std::size_t i = 0; i < s.traffic.size(); ++i) {
    flows_[i].spec = &s.traffic[i];
    flows_[i].index = static_cast<std::uint32_t>(i);
    flows_[i].rng.seed(splitmix64(seed ^ fnv1a(s.traffic[i].id)));
  }

  for (const auto& [ue, cred] : registry_)
    cn_state_[ue] = iw::SessionSummary{true, hex64(fnv1a(cred)), "", iw::AuthState::Idle};
}

// ---- helpers -----------------------------------------------------------------

void Runtime::decision(const std::string& name, TraceFields fields, std::uint64_t inputs) {
  fields.insert(fields.begin(), {"decision", name});
  fields.emplace_back("inputs", hex64(inputs));
  const auto& rec = trace_.emit(now(), "fog", TraceKind::Ctrl, std::move(fields));
  decision_hash_ = fnv1a(render_record(rec), decision_hash_);
  ++decisions_;
}

bool Runtime::in_range(const std::string& ap, const std::string& ue) const {
  auto p = pos_.find(ue);
  if (p == pos_.end()) return false;
  const auto& a = spec(ap);
  return !a.range_m || scenario::distance(a.pos, p->second) <= *a.range_m;
}

iw::AuthSession Runtime::session(const std::string& ue) const {
  auto it = sessions_.find(ue);
  if (it != sessions_.end()) return it->second;
  iw::AuthSession s;
  s.ue_id = ue;
  return s;
}

bool Runtime::settled(const std::string& ue) const {
  auto st = session(ue).state;
  return st == iw::AuthState::Authenticated || st == iw::AuthState::Failed;
}

void Runtime::schedule_every(SimTime first, SimTime period, const std::string& node, std::function<void()> fn) {
  if (first > s_.duration) return;
  eng_.schedule_at(first, node, [this, first, period, node, fn] {
    fn();
    schedule_every(first + period, period, node, fn);
  });
}

// ---- controller side -----------------------------------------------------------

void Runtime::refresh_reports() {
  for (const auto& [id, ap] : aps_) reports_ = ctrl::ingest_report(reports_, ap->report());
}

bool Runtime::routable(const std::string& ap) const {
  if (pop_.empty()) return true;
  std::set<std::string> excluded(asleep_);
  excluded.insert(draining_.begin(), draining_.end());
  try {
    ctrl::compute_path(topo_, ap, pop_, excluded);
    return true;
  } catch (const Error& e) {
    if (e.code() != Errc::Disconnected) throw;
    return false;
  }
}

ctrl::RanView Runtime::view() {
  refresh_reports();
  ctrl::RanView v;
  v.aps = reports_.aps;
  v.topology = topo_;
  for (const auto& ue : started_) {
    auto& reach = v.reachability[ue];
    for (const auto& [id, _] : aps_)
      if (in_range(id, ue)) reach.insert(id);
  }
  v.serving = serving_;
  for (const auto& f : flows_) {
    const auto& t = *f.spec;
    if (!started_.count(t.ue)) continue;
    ctrl::FlowSpec fs;
    fs.flow_id = t.id;
    fs.ue_id = t.ue;
    fs.service = t.service;
    fs.demand_bps = t.rate_bps;
    if (auto it = serving_.find(t.ue); it != serving_.end()) fs.assigned_ap = it->second;
    v.flows[t.id] = fs;
  }
  v.asleep = asleep_;
  v.asleep.insert(draining_.begin(), draining_.end());
  for (const auto& [id, _] : aps_)
    if (!routable(id)) v.asleep.insert(id);
  return v;
}

ctrl::FlowSpec Runtime::aggregate(const std::string& ue) const {
  ctrl::FlowSpec fs;
  fs.flow_id = "ue:" + ue;
  fs.ue_id = ue;
  fs.service = spec(ue).service;
  for (const auto& f : flows_)
    if (f.spec->ue == ue || f.spec->dst == ue) fs.demand_bps += f.spec->rate_bps;
  fs.demand_bps = std::max<std::uint64_t>(fs.demand_bps, 1);
  return fs;
}

std::optional<std::string> Runtime::choose(const std::string& ue, const ctrl::RanView& v, const std::string& why) {
  const auto req = aggregate(ue);
  const auto inputs = fnv1a(ctrl::view_canonical(v) + "|" + req.flow_id + "|" + std::to_string(req.demand_bps));
  try {
    auto ap = ctrl::select_rat(v, req);
    decision("select_rat", {{"ue", ue}, {"ap", ap}, {"reason", why}}, inputs);
    return ap;
  } catch (const Error& e) {
    if (e.code() != Errc::NoCapacity) throw;
    decision("select_rat", {{"ue", ue}, {"result", "no-capacity"}, {"reason", why}}, inputs);
    return std::nullopt;
  }
}

void Runtime::place(const std::string& ue) {
  if (!started_.count(ue) || serving_.count(ue) || attaching_.count(ue)) return;
  auto ap = choose(ue, view(), "attach");
  if (!ap) return;
  attach(ue, *ap, [this, ue, a = *ap] { attached(ue, a); });
}

bool Runtime::attach(const std::string& ue, const std::string& ap, std::function<void()> done) {
  attaching_[ue] = ap;
  try {
    aps_.at(ap)->associate(ue, [this, ue, ap, done] {
      auto it = attaching_.find(ue);
      if (it == attaching_.end() || it->second != ap) return;
      attaching_.erase(it);
      done();
    });
    return true;
  } catch (const Error& e) {
    attaching_.erase(ue);
    emit(ue, TraceKind::Ctrl, {{"event", "error"}, {"ap", ap}, {"detail", e.what()}});
    return false;
  }
}

void Runtime::note_serving(const std::string& ue, const std::string& ap) {
  for (auto& f : flows_)
    if (f.spec->ue == ue && (f.history.empty() || f.history.back() != ap)) f.history.push_back(ap);
}

void Runtime::attached(const std::string& ue, const std::string& ap) {
  serving_[ue] = ap;
  note_serving(ue, ap);
  emit(ue, TraceKind::Ctrl, {{"event", "associated"}, {"ap", ap}});
  start_auth(ue);
  pump_ue(ue);
}

bool Runtime::handover_to(const std::string& ue, const std::string& why) {
  if (handing_over_.count(ue) || !serving_.count(ue)) return false;
  const std::string source = serving_.at(ue);
  const auto v = view();
  auto target = choose(ue, v, why);
  if (!target) return false;
  std::vector<ctrl::HandoverAction> actions;
  try {
    actions = ctrl::handover(v, ue, *target);
  } catch (const Error& e) {
    emit("fog", TraceKind::Ctrl, {{"event", "error"}, {"ue", ue}, {"detail", e.what()}});
    return false;
  }
  std::vector<std::string> rendered;
  std::vector<std::string> moved;
  for (const auto& a : actions) {
    rendered.push_back(std::string(ctrl::action_kind_name(a.kind)) + ":" + a.ap);
    if (a.kind == ctrl::ActionKind::Reroute) moved = a.flows;
  }
  decision("handover", {{"ue", ue}, {"from", source}, {"to", *target}, {"actions", join(rendered, ';')}},
           ctrl::view_digest(v));
  if (actions.empty()) return true;

  handing_over_.insert(ue);
  const bool ok = attach(ue, *target, [this, ue, source, to = *target, moved] {
    handing_over_.erase(ue);
    serving_[ue] = to;
    note_serving(ue, to);
    ++handovers_;
    emit(ue, TraceKind::Ctrl, {{"event", "reroute"}, {"ap", to}, {"flows", join(moved)}});
    pump_ue(ue);
    pending_deauth_.push_back({ue, source});
    schedule_poll();
  });
  if (!ok) handing_over_.erase(ue);
  return ok;
}

void Runtime::check_serving() {
  const std::vector<Key> snapshot(serving_.begin(), serving_.end());
  bool lost_backhaul = false;
  for (const auto& [ue, ap] : snapshot) {
    if (handing_over_.count(ue)) continue;
    std::string why;
    if (asleep_.count(ap) || draining_.count(ap) || aps_.at(ap)->power() == PowerState::Asleep)
      why = "ap-sleeping";
    else if (!in_range(ap, ue))
      why = "out-of-range";
    else if (!routable(ap))
      why = "no-backhaul";
    if (why.empty()) continue;
    if (handover_to(ue, why)) continue;
    if (draining_.count(ap)) cancel_drain(ap);
    if (why == "no-backhaul") lost_backhaul = true;
  }
  if (lost_backhaul) {
    const std::vector<std::string> drains(draining_.begin(), draining_.end());
    for (const auto& n : drains)
      if (!aps_.count(n)) cancel_drain(n);
  }
}

void Runtime::reevaluate() {
  check_serving();
  for (const auto& ue : std::vector<std::string>(started_.begin(), started_.end())) place(ue);
  energy_pass();
}

ctrl::HorizonDemand Runtime::horizon() const {
  ctrl::HorizonDemand d;
  const SimTime end = now() + s_.policy.reeval_period;
  for (const auto& f : flows_) {
    const auto& t = *f.spec;
    d[t.id] = (t.start < end && t.stop > now()) ? t.rate_bps : 0;
  }
  return d;
}

void Runtime::energy_pass() {
  if (!s_.policy.energy_saving) return;
  bool stranded = false;
  for (const auto& ue : started_)
    if (!serving_.count(ue) && !attaching_.count(ue)) stranded = true;
  if (stranded && !planned_.empty()) {
    const std::vector<std::string> woken(planned_.begin(), planned_.end());
    decision("energy_wake", {{"wake", join(woken)}}, ctrl::view_digest(view()));
    for (const auto& n : woken) wake(n);
    return;
  }
  const auto v = view();
  const auto demand = horizon();
  std::string demand_text;
  for (const auto& [id, bps] : demand) demand_text += id + "=" + std::to_string(bps) + ";";
  const auto plan = ctrl::energy_plan(v, demand);
  decision("energy_plan", {{"sleep", join(std::vector<std::string>(plan.begin(), plan.end()))}},
           fnv1a(ctrl::view_canonical(v) + "|" + demand_text));
  for (const auto& n : plan) start_drain(n, true);
}

void Runtime::start_drain(const std::string& node, bool planned) {
  if (asleep_.count(node) || draining_.count(node)) return;
  draining_.insert(node);
  if (planned) planned_.insert(node);
  emit("fog", TraceKind::Ctrl, {{"event", "drain"}, {"node", node}});
  check_serving();
  schedule_poll();
}

void Runtime::cancel_drain(const std::string& node) {
  if (!draining_.erase(node)) return;
  planned_.erase(node);
  emit("fog", TraceKind::Ctrl, {{"event", "drain-cancelled"}, {"node", node}});
}

bool Runtime::drained(const std::string& node) const {
  if (auto t = transit_.find(node); t != transit_.end() && t->second != 0) return false;
  if (!aps_.count(node)) return true;
  for (const auto& [ue, ap] : serving_)
    if (ap == node) return false;
  for (const auto& [ue, ap] : attaching_)
    if (ap == node) return false;
  for (const auto& [ue, ap] : pending_deauth_)
    if (ap == node) return false;
  for (const auto& [k, n] : inflight_)
    if (k.second == node && n != 0) return false;
  return true;
}

void Runtime::sleep_now(const std::string& node) {
  draining_.erase(node);
  asleep_.insert(node);
  asleep_since_[node] = now();
  if (auto it = aps_.find(node); it != aps_.end())
    it->second->set_power(PowerState::Asleep);
  else
    emit(node, TraceKind::Ctrl, {{"event", "power"}, {"state", "asleep"}});
}

void Runtime::wake(const std::string& node) {
  if (draining_.count(node)) {
    cancel_drain(node);
    return;
  }
  if (!asleep_.erase(node)) return;
  planned_.erase(node);
  asleep_total_[node] += now() - asleep_since_[node];
  asleep_since_.erase(node);
  if (auto it = aps_.find(node); it != aps_.end())
    it->second->set_power(PowerState::Awake);
  else
    emit(node, TraceKind::Ctrl, {{"event", "power"}, {"state", "awake"}});
}

void Runtime::schedule_poll() {
  if (poll_scheduled_) return;
  poll_scheduled_ = true;
  eng_.schedule_in(ms(1), "fog", [this] {
    poll_scheduled_ = false;
    poll();
  });
}

void Runtime::poll() {
  for (auto it = pending_deauth_.begin(); it != pending_deauth_.end();) {
    const auto [ue, ap] = *it;
    if (auto n = inflight_.find({ue, ap}); n != inflight_.end() && n->second != 0) {
      ++it;
      continue;
    }
    it = pending_deauth_.erase(it);
    aps_.at(ap)->deauthenticate(ue);
  }
  for (const auto& n : std::vector<std::string>(draining_.begin(), draining_.end()))
    if (drained(n)) sleep_now(n);
  if (!pending_deauth_.empty() || !draining_.empty()) schedule_poll();
}

void Runtime::sample_timeline() {
  for (const auto& [id, ap] : aps_) {
    const auto r = ap->report();
    const double util = r.capacity_bps ? static_cast<double>(r.current_load_bps) / static_cast<double>(r.capacity_bps) : 0;
    timeline_[id].push_back({now(), util, r.station_count, std::string(wlan::power_state_name(r.power_state))});
    last_util_[id] = util;
  }
}

void Runtime::sample_deltas() {
  bool changed = false;
  for (const auto& [id, ap] : aps_) {
    const auto r = ap->report();
    const double util = r.capacity_bps ? static_cast<double>(r.current_load_bps) / static_cast<double>(r.capacity_bps) : 0;
    if (std::fabs(util - last_util_[id]) > s_.policy.report_delta) changed = true;
  }
  if (!changed) return;
  for (const auto& [id, ap] : aps_) {
    const auto r = ap->report();
    last_util_[id] = r.capacity_bps ? static_cast<double>(r.current_load_bps) / static_cast<double>(r.capacity_bps) : 0;
  }
  reevaluate();
}

// ---- UE / network events ----------------------------------------------------

void Runtime::power_on(const std::string& ue) {
  started_.insert(ue);
  emit(ue, TraceKind::Ctrl, {{"event", "power-on"}});
  if (enb_) enb_->power_on(ue, macs_.at(ue), spec(ue).service);
  place(ue);
}

void Runtime::on_deauth(const std::string& ap, const std::string& ue) {
  if (auto it = attaching_.find(ue); it != attaching_.end() && it->second == ap) attaching_.erase(it);
  auto it = serving_.find(ue);
  if (it == serving_.end() || it->second != ap) return;
  serving_.erase(it);
  handing_over_.erase(ue);
  emit(ue, TraceKind::Ctrl, {{"event", "disassociated"}, {"ap", ap}});
  eng_.schedule_in(0, "fog", [this, ue] { place(ue); });
}

SimTime Runtime::auth_latency(const std::string& ap) const {
  SimTime t = aps_.at(ap)->kind() == wlan::ApKind::LteEmulated ? s_.lte.drb.latency : spec(ap).latency;
  if (auto r = route(ap, pop_); r && !pop_.empty())
    for (std::size_t i = 0; i + 1 < r->size(); ++i) t += links_.at({(*r)[i], (*r)[i + 1]}).params().latency;
  return std::max<SimTime>(t, 1);
}

void Runtime::start_auth(const std::string& ue) {
  if (auth_running_.count(ue) || settled(ue)) return;
  auth_running_.insert(ue);
  const std::string ap = serving_.at(ue);
  const SimTime gap = auth_latency(ap);
  auto result = iw::authenticate(ue, spec(ue).credential, registry_, s_.mode,
                                 iw::auth_nonce(ue, auth_attempts_[ue]++));
  SimTime at = 0;
  for (const auto& m : result.messages) {
    const std::string node = m.from_ue ? ue : "iwf";
    eng_.schedule_in(at, node, [this, node, ue, ap, type = m.type] {
      emit(node, TraceKind::Auth, {{"msg", std::string(iw::eap_type_name(type))}, {"ue", ue}, {"via", ap}});
    });
    at += gap;
  }
  eng_.schedule_in(at, "iwf", [this, ue, s = result.session] { finish_auth(ue, s); });
}

void Runtime::finish_auth(const std::string& ue, iw::AuthSession result) {
  auth_running_.erase(ue);
  if (an_revoked_.count(ue) && result.state == iw::AuthState::Authenticated) result.state = iw::AuthState::Failed;
  sessions_[ue] = result;
  TraceFields f{{"event", "result"},
                {"ue", ue},
                {"state", std::string(iw::auth_state_name(result.state))},
                {"method", std::string(iw::auth_method_name(result.method))}};
  if (result.nas_stub) f.emplace_back("registration", "stub");
  emit("iwf", TraceKind::Auth, std::move(f));
  if (s_.mode == iw::NetworkMode::FiveGCore && result.state == iw::AuthState::Authenticated)
    emit(cn_, TraceKind::Boundary,
         {{"event", "registration"}, {"ue", ue}, {"access", "non-3gpp"}, {"boundary", "pop-external"}});
  pump_ue(ue);
}

void Runtime::sync_tick() {
  iw::NetworkState an;
  auto summary = [this](const std::string& ue, const std::string& digest) {
    auto it = serving_.find(ue);
    return iw::SessionSummary{!an_revoked_.count(ue), digest, it == serving_.end() ? "" : it->second,
                              session(ue).state};
  };
  for (const auto& [ue, cred] : registry_) an[ue] = summary(ue, hex64(fnv1a(cred)));
  for (const auto& [ue, _] : sessions_)
    if (!an.count(ue)) an[ue] = summary(ue, "");
  const auto rec = iw::sync_cn(s_.mode, an, cn_state_, epoch_ + 1, epoch_);
  epoch_ = rec.epoch;
  std::vector<std::string> revoked;
  for (const auto& [ue, sum] : rec.reconciled) {
    if (sum.subscribed || an_revoked_.count(ue)) continue;
    an_revoked_.insert(ue);
    revoked.push_back(ue);
    auto it = sessions_.find(ue);
    if (it != sessions_.end() && it->second.state == iw::AuthState::Authenticated)
      it->second.state = iw::AuthState::Failed;
  }
  cn_state_ = rec.reconciled;
  emit("iwf", TraceKind::Sync,
       {{"epoch", std::to_string(rec.epoch)},
        {"an_digest", hex64(rec.an_digest)},
        {"cn_digest", hex64(rec.cn_digest)},
        {"ues", std::to_string(rec.reconciled.size())},
        {"revoked", join(revoked)}});
}

void Runtime::apply_event(const scenario::EventSpec& e) {
  using scenario::EventAction;
  switch (e.action) {
    case EventAction::Sleep:
    case EventAction::Wake: {
      const bool sleep = e.action == EventAction::Sleep;
      auto it = serving_.find(e.target);
      if (enb_ && it != serving_.end() && it->second == enb_->id()) {
        sleep ? enb_->ue_sleep(e.target) : enb_->ue_wake(e.target);
      } else {
        emit(e.target, TraceKind::Ctrl, {{"event", sleep ? "sleep-ignored" : "wake-ignored"}});
      }
      break;
    }
    case EventAction::Revoke: {
      auto& c = cn_state_[e.target];
      c.subscribed = false;
      emit(cn_, TraceKind::Ctrl, {{"event", "revoke"}, {"ue", e.target}});
      break;
    }
    case EventAction::ApPower:
      if (e.state == "asleep") {
        start_drain(e.target, false);
      } else {
        wake(e.target);
        reevaluate();
      }
      break;
  }
}

// ---- data path ---------------------------------------------------------------

SimTime Runtime::next_gap(FlowRt& f) {
  const auto& t = *f.spec;
  const double mean = static_cast<double>(t.packet_size) * 8.0 * 1e6 / static_cast<double>(t.rate_bps);
  if (t.kind == scenario::TrafficKind::Cbr) return std::max<SimTime>(1, std::llround(mean));
  const double u = static_cast<double>(f.rng() >> 11) * 0x1.0p-53;
  return std::max<SimTime>(1, std::llround(-std::log1p(-u) * mean));
}

void Runtime::generate(std::size_t fi) {
  FlowRt& f = flows_[fi];
  const auto& t = *f.spec;
  if (now() >= t.stop) return;
  const auto seq = static_cast<std::uint32_t>(f.sent_at.size());
  f.sent_at.push_back(now());
  f.outcome.push_back(Outcome::Live);
  ++f.live;
  if (t.external() && t.direction == FlowDirection::Downlink && s_.mode == iw::NetworkMode::Standalone) {
    drop_packet(fi, seq, pop_.empty() ? t.ue : pop_, "no-external-network");
  } else {
    f.pending.push_back(seq);
    pump(fi);
  }
  const SimTime next = now() + next_gap(f);
  if (next < t.stop && next <= s_.duration) eng_.schedule_at(next, t.ue, [this, fi] { generate(fi); });
}

void Runtime::pump_ue(const std::string& ue) {
  for (std::size_t i = 0; i < flows_.size(); ++i)
    if (flows_[i].spec->ue == ue || flows_[i].spec->dst == ue) pump(i);
}

bool Runtime::ready(const FlowRt& f) const {
  const auto& t = *f.spec;
  if (!serving_.count(t.ue) || !settled(t.ue)) return false;
  return t.external() || serving_.count(t.dst) != 0;
}

void Runtime::pump(std::size_t fi) {
  FlowRt& f = flows_[fi];
  while (!f.pending.empty() && ready(f)) {
    const auto seq = f.pending.front();
    f.pending.pop_front();
    dispatch(fi, seq);
  }
}

Bytes Runtime::sdu_of(const FlowRt& f, std::uint32_t seq) const {
  return make_sdu({f.index, seq, f.sent_at[seq]}, f.spec->packet_size);
}

void Runtime::dispatch(std::size_t fi, std::uint32_t seq) {
  FlowRt& f = flows_[fi];
  const auto& t = *f.spec;
  if (t.direction == FlowDirection::Uplink) {
    const std::string ap = serving_.at(t.ue);
    inflight_add(t.ue, ap, 1);
    try {
      aps_.at(ap)->send_uplink(t.ue, sdu_of(f, seq));
    } catch (const Error& e) {
      inflight_add(t.ue, ap, -1);
      drop_packet(fi, seq, t.ue, "not-associated");
    }
    return;
  }
  // Downlink from the external network.
  if (session(t.ue).state != iw::AuthState::Authenticated) {
    drop_packet(fi, seq, pop_.empty() ? t.ue : pop_, "not-authenticated");
    return;
  }
  const bool core = s_.mode == iw::NetworkMode::FiveGCore;
  const std::string edge = core ? cn_ : gw_;
  const std::string ap = serving_.at(t.ue);
  TraceFields b{{"ue", t.ue}, {"flow", t.id}, {"seq", std::to_string(seq)}, {"dir", "dl"}};
  if (core) b.emplace_back("access", "non-3gpp");
  b.emplace_back("boundary", "pop-external");
  emit(edge, TraceKind::Boundary, std::move(b));
  auto path = route(edge, ap);
  if (!path) {
    drop_packet(fi, seq, edge, "no-route");
    return;
  }
  inflight_add(t.ue, ap, 1);
  forward(fi, seq, *path, [this, fi, seq, ap, ue = t.ue](bool ok) {
    if (!ok) {
      inflight_add(ue, ap, -1);
      return;
    }
    radio_deliver(fi, seq, ap, ue);
  });
}

std::optional<std::vector<std::string>> Runtime::route(const std::string& from, const std::string& to) const {
  if (from == to) return std::vector<std::string>{from};
  if (!topo_.has(from) || !topo_.has(to)) return std::nullopt;
  std::set<std::string> excluded(asleep_);
  excluded.insert(draining_.begin(), draining_.end());
  // Draining nodes still forward when nothing else connects.
  for (const std::set<std::string>* ex : std::initializer_list<const std::set<std::string>*>{&excluded, &asleep_}) {
    try {
      std::set<std::string> e(*ex);
      e.erase(from);
      e.erase(to);
      return ctrl::compute_path(topo_, from, to, e);
    } catch (const Error& err) {
      if (err.code() != Errc::Disconnected) throw;
    }
  }
  return std::nullopt;
}

void Runtime::forward(std::size_t fi, std::uint32_t seq, std::vector<std::string> path,
                      std::function<void(bool)> done) {
  for (const auto& n : path) ++transit_[n];
  hop(fi, seq, std::make_shared<const std::vector<std::string>>(std::move(path)), 0, std::move(done));
}

void Runtime::hop(std::size_t fi, std::uint32_t seq, std::shared_ptr<const std::vector<std::string>> path,
                  std::size_t i, std::function<void(bool)> done) {
  const auto& p = *path;
  auto release = [this, &p] {
    for (const auto& n : p) --transit_[n];
  };
  if (i + 1 >= p.size()) {
    release();
    done(true);
    return;
  }
  auto at = links_.at({p[i], p[i + 1]}).admit(now(), flows_[fi].spec->packet_size);
  if (!at) {
    release();
    drop_packet(fi, seq, p[i], "queue-overflow");
    done(false);
    return;
  }
  eng_.schedule_at(*at, p[i + 1], [this, fi, seq, path, i, done] { hop(fi, seq, path, i + 1, done); });
}

void Runtime::at_pop(std::size_t fi, std::uint32_t seq) {
  const auto& t = *flows_[fi].spec;
  iw::Forwarding fw;
  try {
    fw = iw::forward_uplink(session(t.ue), s_.mode, true);
  } catch (const Error& e) {
    drop_packet(fi, seq, pop_, e.code() == Errc::NoExternalNetwork ? "no-external-network" : "not-authenticated");
    return;
  }
  const std::string edge = fw.egress == iw::Egress::CoreNetwork ? cn_ : gw_;
  forward(fi, seq, {pop_, edge}, [this, fi, seq, edge, tag = fw.access_tag](bool ok) {
    if (!ok) return;
    const auto& t = *flows_[fi].spec;
    TraceFields b{{"ue", t.ue}, {"flow", t.id}, {"seq", std::to_string(seq)}, {"dir", "ul"}};
    if (!tag.empty()) b.emplace_back("access", tag);
    b.emplace_back("boundary", "pop-external");
    emit(edge, TraceKind::Boundary, std::move(b));
    finalize(flows_[fi], seq, Outcome::Delivered);
  });
}

void Runtime::local_forward(std::size_t fi, std::uint32_t seq, const std::string& ap) {
  FlowRt& f = flows_[fi];
  const auto& t = *f.spec;
  auto it = serving_.find(t.dst);
  if (it == serving_.end()) {
    drop_packet(fi, seq, ap, "peer-unassociated");
    return;
  }
  const std::string peer_ap = it->second;
  auto path = route(ap, peer_ap);
  if (!path) {
    drop_packet(fi, seq, ap, "no-route");
    return;
  }
  std::vector<std::string> full{t.ue};
  full.insert(full.end(), path->begin(), path->end());
  full.push_back(t.dst);
  if (join(full) != f.local_route) {
    f.local_route = join(full);
    decision("local_path", {{"flow", t.id}, {"path", f.local_route}}, ctrl::view_digest(view()));
  }
  inflight_add(t.dst, peer_ap, 1);
  forward(fi, seq, *path, [this, fi, seq, peer_ap, peer = t.dst](bool ok) {
    if (!ok) {
      inflight_add(peer, peer_ap, -1);
      return;
    }
    radio_deliver(fi, seq, peer_ap, peer);
  });
}

void Runtime::radio_deliver(std::size_t fi, std::uint32_t seq, const std::string& ap, const std::string& ue) {
  try {
    aps_.at(ap)->deliver_downlink(ue, sdu_of(flows_[fi], seq));
  } catch (const Error& e) {
    inflight_add(ue, ap, -1);
    drop_packet(fi, seq, ap, "not-associated");
  }
}

FlowRt& Runtime::flow_of(const SduHeader& h, const std::string& where) {
  if (h.flow >= flows_.size() || h.seq >= flows_[h.flow].outcome.size())
    fail(Errc::InvariantViolation, "unknown data SDU at " + where);
  return flows_[h.flow];
}

void Runtime::on_uplink(const std::string& ap, const std::string& ue, const Bytes& sdu) {
  auto h = parse_sdu(sdu);
  if (!h) fail(Errc::InvariantViolation, "short data SDU at " + ap);
  FlowRt& f = flow_of(*h, ap);
  inflight_add(ue, ap, -1);
  const std::size_t fi = h->flow;
  if (!f.spec->external()) {
    local_forward(fi, h->seq, ap);
    return;
  }
  if (pop_.empty()) {
    drop_packet(fi, h->seq, ap, "no-external-network");
    return;
  }
  auto path = route(ap, pop_);
  if (!path) {
    drop_packet(fi, h->seq, ap, "no-route");
    return;
  }
  forward(fi, h->seq, *path, [this, fi, seq = h->seq](bool ok) {
    if (ok) at_pop(fi, seq);
  });
}

void Runtime::on_downlink(const std::string& ap, const std::string& ue, const Bytes& sdu) {
  auto h = parse_sdu(sdu);
  if (!h) fail(Errc::InvariantViolation, "short data SDU at " + ue);
  FlowRt& f = flow_of(*h, ue);
  inflight_add(ue, ap, -1);
  finalize(f, h->seq, Outcome::Delivered);
}

void Runtime::on_drop(const std::string& ap, const std::string& ue, const Bytes& sdu) {
  auto h = parse_sdu(sdu);
  if (!h) return;
  FlowRt& f = flow_of(*h, ap);
  inflight_add(ue, ap, -1);
  finalize(f, h->seq, Outcome::Dropped);
}

void Runtime::inflight_add(const std::string& ue, const std::string& ap, int delta) {
  int& n = inflight_[{ue, ap}];
  n += delta;
  if (n < 0) fail(Errc::InvariantViolation, "negative in-flight count for " + ue + " at " + ap);
}

void Runtime::drop_packet(std::size_t fi, std::uint32_t seq, const std::string& node, const std::string& reason) {
  FlowRt& f = flows_[fi];
  emit(node, TraceKind::Drop, {{"reason", reason}, {"flow", f.spec->id}, {"seq", std::to_string(seq)}});
  finalize(f, seq, Outcome::Dropped);
}

void Runtime::finalize(FlowRt& f, std::uint32_t seq, Outcome o) {
  if (f.outcome.at(seq) != Outcome::Live)
    fail(Errc::InvariantViolation, "packet " + std::to_string(seq) + " of flow " + f.spec->id + " settled twice");
  f.outcome[seq] = o;
  --f.live;
  if (o == Outcome::Dropped) {
    ++f.dropped;
    return;
  }
  ++f.delivered;
  f.delivered_bytes += f.spec->packet_size;
  f.latencies.push_back(now() - f.sent_at[seq]);
  if (static_cast<std::int64_t>(seq) < f.highest_delivered) ++f.reordered;
  f.highest_delivered = std::max<std::int64_t>(f.highest_delivered, seq);
}

// ---- top level ---------------------------------------------------------------

void Runtime::run() {
  using ctrl::NodeKind;
  if (enb_) eng_.schedule_at(0, enb_->id(), [this] { enb_->start(); });
  for (const auto* n : s_.nodes_of(NodeKind::WlanAp)) {
    auto* ap = static_cast<wlan::WlanAp*>(aps_.at(n->id).get());
    eng_.schedule_at(0, n->id, [ap] { ap->start(); });
  }
  for (const auto* ue : s_.nodes_of(NodeKind::Ue)) {
    const std::string id = ue->id;
    if (ue->start <= s_.duration) eng_.schedule_at(ue->start, id, [this, id] { power_on(id); });
    for (const auto& m : ue->moves) {
      if (m.at > s_.duration) continue;
      eng_.schedule_at(m.at, id, [this, id, p = m.pos] {
        pos_[id] = p;
        emit(id, TraceKind::Ctrl, {{"event", "move"}, {"x", fixed1(p.x)}, {"y", fixed1(p.y)}});
        if (!started_.count(id)) return;
        check_serving();
        place(id);
      });
    }
  }
  for (const auto& e : s_.events)
    if (e.at <= s_.duration) eng_.schedule_at(e.at, e.target, [this, &e] { apply_event(e); });
  for (std::size_t i = 0; i < flows_.size(); ++i)
    if (flows_[i].spec->start <= s_.duration) eng_.schedule_at(flows_[i].spec->start, flows_[i].spec->ue, [this, i] { generate(i); });

  if (!aps_.empty()) {
    eng_.schedule_at(0, "fog", [this] { sample_timeline(); });
    schedule_every(s_.policy.reeval_period, s_.policy.reeval_period, "fog", [this] {
      sample_timeline();
      reevaluate();
    });
    schedule_every(ms(100), ms(100), "fog", [this] { sample_deltas(); });
  }
  if (s_.mode == iw::NetworkMode::FiveGCore && !s_.nodes_of(NodeKind::Ue).empty())
    schedule_every(s_.policy.sync_period, s_.policy.sync_period, "iwf", [this] { sync_tick(); });

  try {
    eng_.run_until(s_.duration);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " (event at t=" + std::to_string(eng_.now()) + "us on " +
                              eng_.current_target() + ")");
  }
  for (const auto& [n, since] : asleep_since_) asleep_total_[n] += s_.duration - since;
  asleep_since_.clear();
}

Metrics Runtime::metrics() {
  Metrics m;
  m.scenario = s_.name;
  m.seed = seed_;
  m.duration = s_.duration;
  for (const auto& f : flows_) {
    const auto& t = *f.spec;
    FlowMetrics fm;
    fm.sent = f.sent_at.size();
    fm.delivered = f.delivered;
    fm.dropped = f.dropped;
    fm.in_flight = f.live;
    if (fm.sent != fm.delivered + fm.dropped + fm.in_flight)
      fail(Errc::InvariantViolation, "flow " + t.id + " does not conserve packets");
    fm.delivered_bytes = f.delivered_bytes;
    fm.reordered = f.reordered;
    if (!f.latencies.empty()) {
      auto lat = f.latencies;
      std::sort(lat.begin(), lat.end());
      double sum = 0;
      for (auto l : lat) sum += static_cast<double>(l);
      fm.mean_latency_ms = sum / static_cast<double>(lat.size()) / 1000.0;
      const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lat.size())));
      fm.p95_latency_ms = static_cast<double>(lat[std::max<std::size_t>(rank, 1) - 1]) / 1000.0;
    }
    const SimTime active = std::min(t.stop, s_.duration) - t.start;
    if (active > 0) fm.throughput_bps = static_cast<double>(f.delivered_bytes) * 8.0 * 1e6 / static_cast<double>(active);
    fm.serving_history = f.history;
    m.flows[t.id] = fm;
  }
  m.ap_timeline = timeline_;
  m.asleep_us = asleep_total_;
  for (const auto& [_, us] : asleep_total_) m.asleep_total_us += us;
  m.handovers = handovers_;
  m.decisions = decisions_;
  m.decision_digest = hex64(decision_hash_);
  for (const auto* ue : s_.nodes_of(ctrl::NodeKind::Ue)) {
    std::optional<emu::Mode> mode;
    if (enb_) mode = enb_->ue_mode(ue->id);
    m.ue_modes[ue->id] = mode ? std::string(emu::mode_name(*mode)) : "none";
  }
  m.trace_records = trace_.size();
  m.trace_digest = hex64(trace_.digest());
  return m;
}

}  // namespace

RunOutput run(const Scenario& s, std::optional<std::uint64_t> seed) {
  const std::uint64_t used = seed.value_or(s.seed);
  Runtime rt(s, used);
  rt.run();
  RunOutput out;
  out.metrics = rt.metrics();
  out.trace = std::move(rt.trace());
  return out;
}

std::string metrics_json(const Metrics& m) {
  using nlohmann::json;
  json j;
  j["scenario"] = m.scenario;
  j["seed"] = m.seed;
  j["duration_ms"] = static_cast<double>(m.duration) / 1000.0;
  json flows = json::object();
  for (const auto& [id, f] : m.flows) {
    flows[id] = {{"sent", f.sent},
                 {"delivered", f.delivered},
                 {"dropped", f.dropped},
                 {"in_flight", f.in_flight},
                 {"delivered_bytes", f.delivered_bytes},
                 {"reordered", f.reordered},
                 {"mean_latency_ms", f.mean_latency_ms},
                 {"p95_latency_ms", f.p95_latency_ms},
                 {"throughput_bps", f.throughput_bps},
                 {"serving_history", f.serving_history},
                 {"ap_changes", f.serving_history.empty() ? 0 : f.serving_history.size() - 1}};
  }
  j["flows"] = flows;
  json aps = json::object();
  for (const auto& [id, samples] : m.ap_timeline) {
    json arr = json::array();
    for (const auto& s : samples)
      arr.push_back({{"t_ms", static_cast<double>(s.t) / 1000.0},
                     {"utilization", s.utilization},
                     {"stations", s.stations},
                     {"power", s.power}});
    aps[id] = arr;
  }
  j["ap_timeline"] = aps;
  json asleep = json::object();
  for (const auto& [n, us] : m.asleep_us) asleep[n] = static_cast<double>(us) / 1000.0;
  j["energy"] = {{"asleep_ms", asleep}, {"node_ms_asleep", static_cast<double>(m.asleep_total_us) / 1000.0}};
  j["handovers"] = m.handovers;
  j["decisions"] = {{"count", m.decisions}, {"digest", m.decision_digest}};
  j["ue_modes"] = m.ue_modes;
  j["trace"] = {{"records", m.trace_records}, {"digest", m.trace_digest}};
  return j.dump(2) + "\n";
}

}  // namespace f5g::sim
