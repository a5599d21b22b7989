#include "frugal5g/controller.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "frugal5g/error.hpp"
#include "frugal5g/trace.hpp"

namespace f5g::ctrl {

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Pop: return "pop";
    case NodeKind::MacroEnb: return "macro_enb";
    case NodeKind::MiddleMile: return "middle_mile";
    case NodeKind::WlanAp: return "wlan_ap";
    case NodeKind::Ue: return "ue";
    case NodeKind::Cn: return "cn";
    case NodeKind::Gateway: return "gateway";
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view name) {
  for (auto k : {NodeKind::Pop, NodeKind::MacroEnb, NodeKind::MiddleMile, NodeKind::WlanAp,
                 NodeKind::Ue, NodeKind::Cn, NodeKind::Gateway})
    if (node_kind_name(k) == name) return k;
  return std::nullopt;
}

void Topology::add_node(const std::string& id, NodeKind kind) {
  nodes[id] = kind;
  adj[id];
}

void Topology::add_link(const std::string& a, const std::string& b, std::uint64_t capacity_bps) {
  adj[a][b] = capacity_bps;
  adj[b][a] = capacity_bps;
}

std::optional<NodeKind> Topology::kind(const std::string& id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Topology::capacity(const std::string& a, const std::string& b) const {
  auto it = adj.find(a);
  if (it == adj.end()) return 0;
  auto jt = it->second.find(b);
  return jt == it->second.end() ? 0 : jt->second;
}

std::string Topology::pop() const {
  for (const auto& [id, k] : nodes)
    if (k == NodeKind::Pop) return id;
  return {};
}

namespace {

// a/b < c/d for non-negative values, b and d > 0.
bool frac_less(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return static_cast<unsigned __int128>(a) * d < static_cast<unsigned __int128>(c) * b;
}

bool frac_equal(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return static_cast<unsigned __int128>(a) * d == static_cast<unsigned __int128>(c) * b;
}

bool awake(const RanView& view, const std::string& ap) {
  auto it = view.aps.find(ap);
  return it != view.aps.end() && it->second.power_state == PowerState::Awake &&
         !view.asleep.count(ap);
}

std::set<std::string> external_nodes(const Topology& topo) {
  std::set<std::string> out;
  for (const auto& [id, k] : topo.nodes)
    if (k == NodeKind::Cn || k == NodeKind::Gateway || k == NodeKind::Ue) out.insert(id);
  return out;
}

std::uint64_t spare(const ApDescriptor& d) {
  return d.current_load_bps >= d.capacity_bps ? 0 : d.capacity_bps - d.current_load_bps;
}

}  // namespace

std::string view_canonical(const RanView& view) {
  std::ostringstream os;
  for (const auto& [id, d] : view.aps)
    os << "ap " << id << ' ' << d.bssid.to_string() << ' ' << d.ssid << ' '
       << wlan::ap_kind_name(d.kind) << ' ' << d.capacity_bps << ' ' << d.current_load_bps << ' '
       << d.station_count << ' ' << wlan::power_state_name(d.power_state) << ' ' << d.reported_at
       << '\n';
  for (const auto& [ue, aps] : view.reachability) {
    os << "reach " << ue;
    for (const auto& ap : aps) os << ' ' << ap;
    os << '\n';
  }
  for (const auto& [id, f] : view.flows) {
    os << "flow " << id << ' ' << f.ue_id << ' ' << lte::service_class_name(f.service) << ' '
       << f.demand_bps << ' ' << f.assigned_ap.value_or("-");
    if (f.path)
      for (const auto& n : *f.path) os << ' ' << n;
    os << '\n';
  }
  for (const auto& [ue, ap] : view.serving) os << "serving " << ue << ' ' << ap << '\n';
  for (const auto& n : view.asleep) os << "asleep " << n << '\n';
  for (const auto& [id, k] : view.topology.nodes) os << "node " << id << ' ' << node_kind_name(k) << '\n';
  for (const auto& [a, nbrs] : view.topology.adj)
    for (const auto& [b, cap] : nbrs)
      if (a < b) os << "link " << a << ' ' << b << ' ' << cap << '\n';
  return os.str();
}

std::uint64_t view_digest(const RanView& view) { return fnv1a(view_canonical(view)); }

RanView ingest_report(const RanView& view, const ApDescriptor& report) {
  auto it = view.aps.find(report.ap_id);
  if (it != view.aps.end() && report.reported_at < it->second.reported_at)
    fail(Errc::StaleReport, "report for " + report.ap_id + " at " + std::to_string(report.reported_at) +
                                " is older than " + std::to_string(it->second.reported_at));
  RanView out = view;
  out.aps[report.ap_id] = report;
  return out;
}

std::string select_rat(const RanView& view, const FlowSpec& flow) {
  const ApDescriptor* best = nullptr;
  auto reach = view.reachability.find(flow.ue_id);
  if (reach != view.reachability.end()) {
    for (const auto& ap : reach->second) {
      if (!awake(view, ap)) continue;
      const ApDescriptor& d = view.aps.at(ap);
      if (d.capacity_bps == 0 || spare(d) < flow.demand_bps) continue;
      if (!best) {
        best = &d;
        continue;
      }
      const std::uint64_t post = d.current_load_bps + flow.demand_bps;
      const std::uint64_t best_post = best->current_load_bps + flow.demand_bps;
      if (frac_less(post, d.capacity_bps, best_post, best->capacity_bps)) {
        best = &d;
      } else if (frac_equal(post, d.capacity_bps, best_post, best->capacity_bps)) {
        const bool d_wifi = d.kind == ApKind::NativeWifi;
        const bool b_wifi = best->kind == ApKind::NativeWifi;
        if ((d_wifi && !b_wifi) || (d_wifi == b_wifi && d.ap_id < best->ap_id)) best = &d;
      }
    }
  }
  if (!best) fail(Errc::NoCapacity, "no reachable awake AP has " + std::to_string(flow.demand_bps) +
                                        " bps spare for " + flow.flow_id);
  return best->ap_id;
}

std::vector<std::string> compute_path(const Topology& topo, const std::string& from,
                                      const std::string& to, const std::set<std::string>& excluded) {
  if (!topo.has(from)) fail(Errc::InvariantViolation, "unknown node " + from);
  if (!topo.has(to)) fail(Errc::InvariantViolation, "unknown node " + to);
  if (excluded.count(from) || excluded.count(to))
    fail(Errc::Disconnected, "no path from " + from + " to " + to);
  if (from == to) return {from};

  // Hop distances to `to`, then a greedy walk always taking the smallest id
  // one hop closer, which yields the lexicographically least shortest path.
  std::map<std::string, int> dist;
  std::deque<std::string> queue{to};
  dist[to] = 0;
  while (!queue.empty()) {
    auto n = queue.front();
    queue.pop_front();
    for (const auto& [m, _] : topo.adj.at(n)) {
      if (excluded.count(m) || dist.count(m)) continue;
      dist[m] = dist[n] + 1;
      queue.push_back(m);
    }
  }
  if (!dist.count(from)) fail(Errc::Disconnected, "no path from " + from + " to " + to);

  std::vector<std::string> path{from};
  std::string cur = from;
  while (cur != to) {
    const int want = dist[cur] - 1;
    for (const auto& [m, _] : topo.adj.at(cur)) {
      auto d = dist.find(m);
      if (d != dist.end() && d->second == want) {
        cur = m;
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

std::string_view action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Associate: return "associate";
    case ActionKind::Reroute: return "reroute";
    case ActionKind::Deauth: return "deauth";
  }
  return "?";
}

std::vector<HandoverAction> handover(const RanView& view, const std::string& ue,
                                     const std::string& to_ap) {
  auto serving = view.serving.find(ue);
  if (serving != view.serving.end() && serving->second == to_ap) return {};

  auto reach = view.reachability.find(ue);
  if (!awake(view, to_ap) || reach == view.reachability.end() || !reach->second.count(to_ap))
    fail(Errc::Unreachable, to_ap + " is not an awake AP in range of " + ue);

  std::vector<std::string> flows;
  std::uint64_t demand = 0;
  for (const auto& [id, f] : view.flows) {
    if (f.ue_id != ue) continue;
    flows.push_back(id);
    demand += f.demand_bps;
  }
  if (spare(view.aps.at(to_ap)) < demand)
    fail(Errc::NoCapacity, to_ap + " lacks " + std::to_string(demand) + " bps for " + ue);

  std::vector<std::string> path{to_ap};
  const std::string pop = view.topology.pop();
  if (!pop.empty() && view.topology.has(to_ap)) {
    auto excluded = external_nodes(view.topology);
    excluded.insert(view.asleep.begin(), view.asleep.end());
    try {
      path = compute_path(view.topology, to_ap, pop, excluded);
    } catch (const Error& e) {
      if (e.code() != Errc::Disconnected) throw;
      fail(Errc::Unreachable, to_ap + " has no awake route to the PoP");
    }
  }

  std::vector<HandoverAction> out;
  out.push_back({ActionKind::Associate, to_ap, {}, {}});
  out.push_back({ActionKind::Reroute, to_ap, flows, path});
  if (serving != view.serving.end()) out.push_back({ActionKind::Deauth, serving->second, {}, {}});
  return out;
}

std::vector<std::string> setup_local_path(const RanView& view, const std::string& ue_a,
                                          const std::string& ue_b) {
  auto a = view.serving.find(ue_a);
  if (a == view.serving.end()) fail(Errc::NotAssociated, ue_a + " is not associated");
  auto b = view.serving.find(ue_b);
  if (b == view.serving.end()) fail(Errc::NotAssociated, ue_b + " is not associated");
  if (a->second == b->second) return {ue_a, a->second, ue_b};

  auto excluded = external_nodes(view.topology);
  excluded.insert(view.asleep.begin(), view.asleep.end());
  auto mid = compute_path(view.topology, a->second, b->second, excluded);
  std::vector<std::string> path{ue_a};
  path.insert(path.end(), mid.begin(), mid.end());
  path.push_back(ue_b);
  return path;
}

// ---- energy ----------------------------------------------------------------

namespace {

std::uint64_t effective_demand(const FlowSpec& f, const HorizonDemand& demand) {
  auto it = demand.find(f.flow_id);
  return it == demand.end() ? f.demand_bps : it->second;
}

struct EnergyModel {
  std::map<std::string, std::vector<std::string>> routes;  // usable AP -> route to PoP
  std::map<std::string, std::uint64_t> ap_cap;
  std::map<std::pair<std::string, std::string>, std::uint64_t> link_cap;

  struct Flow {
    std::string id;
    std::uint64_t demand;
    std::optional<std::string> preferred;
    std::vector<std::string> options;
  };
  std::vector<Flow> flows;

  using Link = std::pair<std::string, std::string>;
  static Link link(const std::string& a, const std::string& b) {
    return a < b ? Link{a, b} : Link{b, a};
  }

  bool fits(const std::string& ap, std::uint64_t demand, const std::map<std::string, std::uint64_t>& ap_load,
            const std::map<Link, std::uint64_t>& link_load) const {
    auto l = ap_load.find(ap);
    if ((l == ap_load.end() ? 0 : l->second) + demand > ap_cap.at(ap)) return false;
    const auto& r = routes.at(ap);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      auto k = link(r[i], r[i + 1]);
      auto ll = link_load.find(k);
      if ((ll == link_load.end() ? 0 : ll->second) + demand > link_cap.at(k)) return false;
    }
    return true;
  }

  void add(const std::string& ap, std::uint64_t demand, std::map<std::string, std::uint64_t>& ap_load,
           std::map<Link, std::uint64_t>& link_load, bool remove = false) const {
    auto apply = [&](std::uint64_t& v) { v = remove ? v - demand : v + demand; };
    apply(ap_load[ap]);
    const auto& r = routes.at(ap);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) apply(link_load[link(r[i], r[i + 1])]);
  }
};

std::optional<EnergyModel> build_model(const RanView& view, const HorizonDemand& demand,
                                       const std::set<std::string>& sleeping) {
  std::set<std::string> down = view.asleep;
  down.insert(sleeping.begin(), sleeping.end());
  auto excluded = external_nodes(view.topology);
  excluded.insert(down.begin(), down.end());
  const std::string pop = view.topology.pop();

  EnergyModel m;
  for (const auto& [id, d] : view.aps) {
    if (d.power_state != PowerState::Awake || down.count(id)) continue;
    std::vector<std::string> route{id};
    if (!pop.empty() && view.topology.has(id)) {
      try {
        route = compute_path(view.topology, id, pop, excluded);
      } catch (const Error&) {
        continue;
      }
    }
    m.routes[id] = route;
    m.ap_cap[id] = d.capacity_bps;
    for (std::size_t i = 0; i + 1 < route.size(); ++i)
      m.link_cap[EnergyModel::link(route[i], route[i + 1])] = view.topology.capacity(route[i], route[i + 1]);
  }

  auto usable_for = [&](const std::string& ue) {
    std::vector<std::string> out;
    auto r = view.reachability.find(ue);
    if (r == view.reachability.end()) return out;
    for (const auto& ap : r->second)
      if (m.routes.count(ap)) out.push_back(ap);
    return out;
  };

  for (const auto& [ue, _] : view.serving)
    if (usable_for(ue).empty()) return std::nullopt;

  for (const auto& [id, f] : view.flows) {
    const auto d = effective_demand(f, demand);
    if (d == 0) continue;
    auto opts = usable_for(f.ue_id);
    if (opts.empty()) return std::nullopt;
    m.flows.push_back({id, d, f.assigned_ap, std::move(opts)});
  }
  std::sort(m.flows.begin(), m.flows.end(), [](const auto& a, const auto& b) {
    if (a.demand != b.demand) return a.demand > b.demand;
    return a.id < b.id;
  });
  return m;
}

bool witness_assignment(const EnergyModel& m, const RanView& view) {
  std::map<std::string, std::uint64_t> ap_load;
  std::map<EnergyModel::Link, std::uint64_t> link_load;
  for (const auto& f : m.flows) {
    std::optional<std::string> pick;
    if (f.preferred && m.routes.count(*f.preferred) &&
        std::find(f.options.begin(), f.options.end(), *f.preferred) != f.options.end() &&
        m.fits(*f.preferred, f.demand, ap_load, link_load)) {
      pick = f.preferred;
    } else {
      auto opts = f.options;
      std::sort(opts.begin(), opts.end(), [&](const std::string& a, const std::string& b) {
        const std::uint64_t ca = std::max<std::uint64_t>(1, m.ap_cap.at(a));
        const std::uint64_t cb = std::max<std::uint64_t>(1, m.ap_cap.at(b));
        const std::uint64_t la = ap_load[a] + f.demand, lb = ap_load[b] + f.demand;
        if (!frac_equal(la, ca, lb, cb)) return frac_less(la, ca, lb, cb);
        const bool wa = view.aps.at(a).kind == ApKind::NativeWifi;
        const bool wb = view.aps.at(b).kind == ApKind::NativeWifi;
        if (wa != wb) return wa;
        return a < b;
      });
      for (const auto& ap : opts)
        if (m.fits(ap, f.demand, ap_load, link_load)) {
          pick = ap;
          break;
        }
    }
    if (!pick) return false;
    m.add(*pick, f.demand, ap_load, link_load);
  }
  return true;
}

bool search_assignment(const EnergyModel& m, std::size_t i, std::map<std::string, std::uint64_t>& ap_load,
                       std::map<EnergyModel::Link, std::uint64_t>& link_load) {
  if (i == m.flows.size()) return true;
  const auto& f = m.flows[i];
  for (const auto& ap : f.options) {
    if (!m.fits(ap, f.demand, ap_load, link_load)) continue;
    m.add(ap, f.demand, ap_load, link_load);
    if (search_assignment(m, i + 1, ap_load, link_load)) return true;
    m.add(ap, f.demand, ap_load, link_load, true);
  }
  return false;
}

}  // namespace

std::vector<std::string> sleep_candidates(const RanView& view) {
  std::vector<std::string> out;
  for (const auto& [id, d] : view.aps)
    if (d.kind == ApKind::NativeWifi && d.power_state == PowerState::Awake && !view.asleep.count(id))
      out.push_back(id);
  for (const auto& [id, k] : view.topology.nodes)
    if (k == NodeKind::MiddleMile && !view.asleep.count(id)) out.push_back(id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool energy_feasible(const RanView& view, const HorizonDemand& demand,
                     const std::set<std::string>& sleeping, bool witness_only) {
  auto model = build_model(view, demand, sleeping);
  if (!model) return false;
  if (witness_only) return witness_assignment(*model, view);
  std::map<std::string, std::uint64_t> ap_load;
  std::map<EnergyModel::Link, std::uint64_t> link_load;
  return search_assignment(*model, 0, ap_load, link_load);
}

std::set<std::string> energy_plan(const RanView& view, const HorizonDemand& demand) {
  // Utilization as an exact fraction: APs by measured load over capacity,
  // middle-mile nodes by the demand routed through them over their widest
  // link.
  struct Cand {
    std::string id;
    std::uint64_t num;
    std::uint64_t den;
  };
  std::vector<Cand> cands;
  for (const auto& id : sleep_candidates(view)) {
    auto ap = view.aps.find(id);
    if (ap != view.aps.end()) {
      cands.push_back({id, ap->second.current_load_bps, std::max<std::uint64_t>(1, ap->second.capacity_bps)});
      continue;
    }
    std::uint64_t carried = 0;
    for (const auto& [_, f] : view.flows)
      if (f.path && std::find(f.path->begin(), f.path->end(), id) != f.path->end())
        carried += effective_demand(f, demand);
    std::uint64_t widest = 1;
    auto nbrs = view.topology.adj.find(id);
    if (nbrs != view.topology.adj.end())
      for (const auto& [_, cap] : nbrs->second) widest = std::max(widest, cap);
    cands.push_back({id, carried, widest});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (!frac_equal(a.num, a.den, b.num, b.den)) return frac_less(a.num, a.den, b.num, b.den);
    return a.id < b.id;
  });

  // Utilizations come from the view and do not move as nodes sleep, so a
  // single ordered pass stands in for "pick the least-utilized again".
  std::set<std::string> sleeping;
  for (const auto& c : cands) {
    sleeping.insert(c.id);
    if (!energy_feasible(view, demand, sleeping, true)) sleeping.erase(c.id);
  }
  return sleeping;
}

}  // namespace f5g::ctrl
