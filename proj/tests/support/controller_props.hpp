#pragma once

// Random small RAN instances and brute-force oracles for the controller's
// decision functions. The oracles share no code with the controller.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "frugal5g/controller.hpp"
#include "frugal5g/error.hpp"

namespace f5g::testing {

using ctrl::NodeKind;
using ctrl::RanView;

struct Instance {
  RanView view;
  std::vector<std::string> ues;
};

// pop, one macro eNB, 0..2 middle-mile nodes and 1..5 WLAN APs (at most 6
// APs in all), 1..10 UEs with random reachability, flows and serving APs.
inline Instance random_instance(std::mt19937_64& rng) {
  auto pick = [&](std::uint64_t n) { return rng() % n; };
  Instance inst;
  RanView& v = inst.view;
  auto& t = v.topology;
  t.add_node("pop", NodeKind::Pop);
  t.add_node("enb", NodeKind::MacroEnb);
  const std::uint64_t caps[] = {2'000'000, 5'000'000, 10'000'000, 50'000'000};
  t.add_link("enb", "pop", caps[pick(4)]);

  const int n_mm = static_cast<int>(pick(3));
  std::vector<std::string> mm;
  for (int i = 0; i < n_mm; ++i) {
    mm.push_back("mm" + std::to_string(i + 1));
    t.add_node(mm.back(), NodeKind::MiddleMile);
    t.add_link(mm.back(), i > 0 && pick(2) ? mm[static_cast<std::size_t>(pick(i))] : "pop", caps[pick(4)]);
  }
  if (n_mm == 2 && pick(2)) t.add_link("mm1", "mm2", caps[pick(4)]);

  const int n_ap = 1 + static_cast<int>(pick(5));
  std::vector<std::string> aps{"enb"};
  for (int i = 0; i < n_ap; ++i) {
    const std::string id = "ap" + std::to_string(i + 1);
    aps.push_back(id);
    t.add_node(id, NodeKind::WlanAp);
    const int uplinks = 1 + static_cast<int>(pick(2));
    for (int k = 0; k < uplinks; ++k) {
      const std::string up = mm.empty() || pick(4) == 0 ? "pop" : mm[static_cast<std::size_t>(pick(mm.size()))];
      if (!t.adj[id].count(up)) t.add_link(id, up, caps[pick(4)]);
    }
  }
  for (const auto& id : aps) {
    wlan::ApDescriptor d;
    d.ap_id = id;
    d.kind = id == "enb" ? wlan::ApKind::LteEmulated : wlan::ApKind::NativeWifi;
    d.capacity_bps = id == "enb" ? 20'000'000 : caps[pick(3)];
    d.current_load_bps = d.capacity_bps / 8 * pick(9);
    if (id != "enb" && pick(10) == 0) d.power_state = wlan::PowerState::Asleep;
    v.aps[id] = d;
  }
  if (!mm.empty() && pick(6) == 0) v.asleep.insert(mm[static_cast<std::size_t>(pick(mm.size()))]);

  const int n_ue = 1 + static_cast<int>(pick(10));
  for (int u = 0; u < n_ue; ++u) {
    const std::string ue = "ue" + std::to_string(u + 1);
    inst.ues.push_back(ue);
    auto& reach = v.reachability[ue];
    for (const auto& ap : aps)
      if (pick(ap == "enb" ? 5 : 3) != 0 || (ap == "enb" && reach.empty())) reach.insert(ap);
    if (reach.empty()) continue;
    if (pick(3) != 0) {
      std::vector<std::string> r(reach.begin(), reach.end());
      v.serving[ue] = r[static_cast<std::size_t>(pick(r.size()))];
    }
    if (pick(3) != 0) {
      ctrl::FlowSpec f;
      f.flow_id = "f" + std::to_string(u + 1);
      f.ue_id = ue;
      f.demand_bps = pick(8) == 0 ? 0 : 250'000 * (1 + pick(16));
      if (v.serving.count(ue)) f.assigned_ap = v.serving[ue];
      v.flows[f.flow_id] = f;
    }
  }
  return inst;
}

// ---- select_rat -------------------------------------------------------------

// Exhaustive argmin over (post-assignment utilization, not-Wi-Fi, ap id).
inline std::optional<std::string> oracle_select(const RanView& v, const ctrl::FlowSpec& flow) {
  struct Key {
    std::uint64_t num, den;
    bool lte;
    std::string id;
  };
  std::vector<Key> keys;
  auto reach = v.reachability.find(flow.ue_id);
  if (reach == v.reachability.end()) return std::nullopt;
  for (const auto& ap : reach->second) {
    auto it = v.aps.find(ap);
    if (it == v.aps.end() || it->second.power_state != wlan::PowerState::Awake || v.asleep.count(ap)) continue;
    const auto& d = it->second;
    if (d.capacity_bps == 0 || d.current_load_bps > d.capacity_bps) continue;
    if (d.capacity_bps - d.current_load_bps < flow.demand_bps) continue;
    keys.push_back({d.current_load_bps + flow.demand_bps, d.capacity_bps, d.kind != wlan::ApKind::NativeWifi, ap});
  }
  if (keys.empty()) return std::nullopt;
  const Key* best = &keys[0];
  for (const auto& k : keys) {
    const auto lhs = static_cast<unsigned __int128>(k.num) * best->den;
    const auto rhs = static_cast<unsigned __int128>(best->num) * k.den;
    if (lhs < rhs || (lhs == rhs && (k.lte < best->lte || (k.lte == best->lte && k.id < best->id)))) best = &k;
  }
  return best->id;
}

// ---- compute_path -----------------------------------------------------------

// Every shortest path by BFS layering, then the lexicographically least.
inline std::optional<std::vector<std::string>> oracle_path(const ctrl::Topology& t, const std::string& from,
                                                           const std::string& to,
                                                           const std::set<std::string>& excluded) {
  if (excluded.count(from) || excluded.count(to)) return std::nullopt;
  std::map<std::string, int> dist{{from, 0}};
  std::deque<std::string> q{from};
  while (!q.empty()) {
    auto n = q.front();
    q.pop_front();
    auto it = t.adj.find(n);
    if (it == t.adj.end()) continue;
    for (const auto& [m, _] : it->second)
      if (!excluded.count(m) && !dist.count(m)) {
        dist[m] = dist[n] + 1;
        q.push_back(m);
      }
  }
  if (!dist.count(to)) return std::nullopt;
  std::vector<std::vector<std::string>> all;
  std::vector<std::string> cur{from};
  auto extend = [&](auto&& self) -> void {
    const std::string n = cur.back();
    if (n == to) {
      all.push_back(cur);
      return;
    }
    auto it = t.adj.find(n);
    if (it == t.adj.end()) return;
    for (const auto& [m, _] : it->second) {
      auto d = dist.find(m);
      if (d == dist.end() || d->second != dist[n] + 1 || excluded.count(m)) continue;
      cur.push_back(m);
      self(self);
      cur.pop_back();
    }
  };
  extend(extend);
  // Only paths that reach `to` in exactly dist[to] hops survive.
  std::vector<std::vector<std::string>> shortest;
  for (auto& p : all)
    if (static_cast<int>(p.size()) == dist[to] + 1) shortest.push_back(p);
  return *std::min_element(shortest.begin(), shortest.end());
}

// ---- energy -----------------------------------------------------------------

inline std::set<std::string> externals(const ctrl::Topology& t) {
  std::set<std::string> out;
  for (const auto& [id, k] : t.nodes)
    if (k == NodeKind::Cn || k == NodeKind::Gateway || k == NodeKind::Ue) out.insert(id);
  return out;
}

// Independent check of a sleep set: every served UE keeps an awake AP with a
// route to the PoP, and some assignment of active flows to such APs fits AP
// and link capacities along the canonical routes.
inline bool verify_sleep_set(const RanView& v, const std::set<std::string>& sleeping) {
  std::set<std::string> down = v.asleep;
  down.insert(sleeping.begin(), sleeping.end());
  if (down.count("enb")) return false;
  auto excluded = externals(v.topology);
  excluded.insert(down.begin(), down.end());
  const std::string pop = v.topology.pop();

  std::map<std::string, std::vector<std::string>> route;
  for (const auto& [id, d] : v.aps) {
    if (d.power_state != wlan::PowerState::Awake || down.count(id)) continue;
    if (pop.empty() || !v.topology.has(id)) {
      route[id] = {id};
      continue;
    }
    if (auto p = oracle_path(v.topology, id, pop, excluded)) route[id] = *p;
  }
  auto options = [&](const std::string& ue) {
    std::vector<std::string> out;
    auto r = v.reachability.find(ue);
    if (r != v.reachability.end())
      for (const auto& ap : r->second)
        if (route.count(ap)) out.push_back(ap);
    return out;
  };
  for (const auto& [ue, _] : v.serving)
    if (options(ue).empty()) return false;

  struct F {
    std::uint64_t demand;
    std::vector<std::string> opts;
  };
  std::vector<F> flows;
  for (const auto& [_, f] : v.flows) {
    if (f.demand_bps == 0) continue;
    auto o = options(f.ue_id);
    if (o.empty()) return false;
    flows.push_back({f.demand_bps, o});
  }

  std::map<std::string, std::uint64_t> ap_load;
  std::map<std::pair<std::string, std::string>, std::uint64_t> link_load;
  auto edge = [](const std::string& a, const std::string& b) { return a < b ? std::pair{a, b} : std::pair{b, a}; };
  auto search = [&](auto&& self, std::size_t i) -> bool {
    if (i == flows.size()) return true;
    for (const auto& ap : flows[i].opts) {
      const auto dmd = flows[i].demand;
      if (ap_load[ap] + dmd > v.aps.at(ap).capacity_bps) continue;
      const auto& r = route.at(ap);
      bool fits = true;
      for (std::size_t k = 0; k + 1 < r.size(); ++k)
        if (link_load[edge(r[k], r[k + 1])] + dmd > v.topology.capacity(r[k], r[k + 1])) fits = false;
      if (!fits) continue;
      ap_load[ap] += dmd;
      for (std::size_t k = 0; k + 1 < r.size(); ++k) link_load[edge(r[k], r[k + 1])] += dmd;
      if (self(self, i + 1)) return true;
      ap_load[ap] -= dmd;
      for (std::size_t k = 0; k + 1 < r.size(); ++k) link_load[edge(r[k], r[k + 1])] -= dmd;
    }
    return false;
  };
  return search(search, 0);
}

// Largest verifier-approved subset of the sleepable nodes.
inline std::size_t optimum_sleep_size(const RanView& v, const std::vector<std::string>& candidates) {
  std::size_t best = 0;
  const std::size_t n = candidates.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
    if (size <= best) continue;
    std::set<std::string> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) s.insert(candidates[i]);
    if (verify_sleep_set(v, s)) best = size;
  }
  return best;
}

// Sleepable nodes by the stated rule, computed here independently.
inline std::vector<std::string> oracle_candidates(const RanView& v) {
  std::set<std::string> out;
  for (const auto& [id, d] : v.aps)
    if (d.kind == wlan::ApKind::NativeWifi && d.power_state == wlan::PowerState::Awake && !v.asleep.count(id))
      out.insert(id);
  for (const auto& [id, k] : v.topology.nodes)
    if (k == NodeKind::MiddleMile && !v.asleep.count(id)) out.insert(id);
  return {out.begin(), out.end()};
}

struct ControllerReport {
  int instances = 0;
  int select_checks = 0, select_mismatches = 0;
  int path_checks = 0, path_mismatches = 0;
  int energy_checks = 0, energy_rejected = 0;
  // Instances already over capacity before anything sleeps; the plan there
  // must be empty, and they do not count toward the energy instances.
  int overloaded = 0, overloaded_nonempty = 0;
  int optimum_instances = 0;
  double mean_ratio = 0;  // plan size / optimum size over instances with <= 8 candidates
  std::string first_failure;

  bool ok() const {
    return select_mismatches == 0 && path_mismatches == 0 && energy_rejected == 0 && overloaded_nonempty == 0;
  }
};

// Draws instances until `instances` of them admit the empty sleep set.
inline ControllerReport controller_equivalence(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  ControllerReport rep;
  double ratio_sum = 0;
  auto note = [&](const std::string& what) {
    if (rep.first_failure.empty()) rep.first_failure = what;
  };
  for (int i = 0; rep.instances < instances; ++i) {
    auto inst = random_instance(rng);
    const auto& v = inst.view;

    for (const auto& ue : inst.ues) {
      ctrl::FlowSpec f;
      f.flow_id = "probe";
      f.ue_id = ue;
      f.demand_bps = 500'000 * (rng() % 12);
      std::optional<std::string> got;
      try {
        got = ctrl::select_rat(v, f);
      } catch (const Error& e) {
        if (e.code() != Errc::NoCapacity) note("select_rat threw " + std::string(e.what()));
      }
      ++rep.select_checks;
      if (got != oracle_select(v, f)) {
        ++rep.select_mismatches;
        note("select_rat mismatch on instance " + std::to_string(i) + " for " + ue);
      }
    }

    std::vector<std::string> nodes;
    for (const auto& [id, _] : v.topology.nodes) nodes.push_back(id);
    for (int k = 0; k < 4; ++k) {
      const auto& a = nodes[rng() % nodes.size()];
      const auto& b = nodes[rng() % nodes.size()];
      std::set<std::string> excluded;
      for (const auto& n : nodes)
        if (n != a && n != b && rng() % 5 == 0) excluded.insert(n);
      std::optional<std::vector<std::string>> got;
      try {
        got = ctrl::compute_path(v.topology, a, b, excluded);
      } catch (const Error& e) {
        if (e.code() != Errc::Disconnected) note("compute_path threw " + std::string(e.what()));
      }
      ++rep.path_checks;
      if (got != oracle_path(v.topology, a, b, excluded)) {
        ++rep.path_mismatches;
        note("compute_path mismatch on instance " + std::to_string(i) + ": " + a + " -> " + b);
      }
    }

    const auto plan = ctrl::energy_plan(v, {});
    if (!verify_sleep_set(v, {})) {
      ++rep.overloaded;
      if (!plan.empty()) {
        ++rep.overloaded_nonempty;
        note("energy_plan slept nodes in overloaded instance " + std::to_string(i));
      }
      continue;
    }
    ++rep.instances;
    ++rep.energy_checks;
    if (!verify_sleep_set(v, plan)) {
      ++rep.energy_rejected;
      note("energy_plan set rejected on instance " + std::to_string(i));
    }
    const auto cands = oracle_candidates(v);
    if (cands.size() <= 8) {
      const auto opt = optimum_sleep_size(v, cands);
      ratio_sum += opt == 0 ? 1.0 : static_cast<double>(plan.size()) / static_cast<double>(opt);
      ++rep.optimum_instances;
    }
  }
  rep.mean_ratio = rep.optimum_instances ? ratio_sum / rep.optimum_instances : 0;
  return rep;
}

}  // namespace f5g::testing
