#include <gtest/gtest.h>

#include "frugal5g/analysis.hpp"
#include "frugal5g/error.hpp"
#include "frugal5g/scenario.hpp"
#include "frugal5g/simulation.hpp"

using namespace f5g;

namespace {

sim::RunOutput run_file(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt) {
  return sim::run(scenario::load_scenario_file(std::string(F5G_SCENARIO_DIR) + "/" + name + ".yaml"), seed);
}

void expect_conserved(const sim::Metrics& m) {
  for (const auto& [id, f] : m.flows)
    EXPECT_EQ(f.sent, f.delivered + f.dropped + f.in_flight) << id;
}

TraceRecord rec(SimTime t, std::string node, TraceKind kind, TraceFields fields) {
  TraceRecord r;
  r.t = t;
  r.node = std::move(node);
  r.kind = kind;
  r.fields = std::move(fields);
  return r;
}

}  // namespace

TEST(Simulation, AttachSingleUe) {
  auto out = run_file("attach_single_ue");
  const auto& f = out.metrics.flows.at("f1");
  // 16 kbps of 200 B packets is one every 100 ms over [0, 400).
  EXPECT_EQ(f.sent, 4u);
  EXPECT_EQ(f.delivered, 4u);
  EXPECT_EQ(f.delivered_bytes, 800u);
  EXPECT_EQ(out.metrics.ue_modes.at("ue1"), "emulation");
  EXPECT_EQ(analysis::call_flow(out.trace.records(), "ue1"), analysis::reference_call_flow());
  EXPECT_EQ(out.metrics.trace_records, out.trace.size());
  EXPECT_EQ(out.metrics.trace_digest, hex64(out.trace.digest()));
}

TEST(Simulation, SeedOverrideChangesPoissonArrivalsOnly) {
  auto a = run_file("standalone_chat");
  auto b = run_file("standalone_chat", 99);
  EXPECT_EQ(b.metrics.seed, 99u);
  EXPECT_NE(a.trace.digest(), b.trace.digest());
  expect_conserved(a.metrics);
  expect_conserved(b.metrics);
}

TEST(Simulation, EmptyScenario) {
  auto out = sim::run(scenario::load_scenario(""));
  EXPECT_EQ(out.trace.size(), 0u);
  EXPECT_TRUE(out.metrics.flows.empty());
}

TEST(Simulation, AuthFailureDropsTraffic) {
  auto out = run_file("auth_failure");
  expect_conserved(out.metrics);
  bool saw_failed = false;
  for (const auto& r : out.trace.records())
    if (r.kind == TraceKind::Auth && r.get("state") == "Failed") saw_failed = true;
  EXPECT_TRUE(saw_failed);
  for (const auto& [id, f] : out.metrics.flows)
    if (f.delivered == 0) EXPECT_GT(f.dropped, 0u) << id;
}

TEST(Simulation, CongestionConservesPackets) {
  auto out = run_file("congested_backhaul");
  expect_conserved(out.metrics);
  std::uint64_t dropped = 0;
  for (const auto& [_, f] : out.metrics.flows) dropped += f.dropped;
  EXPECT_GT(dropped, 0u);
}

TEST(Simulation, EnergySavingSleepsNodes) {
  auto out = run_file("energy_saving");
  expect_conserved(out.metrics);
  EXPECT_GT(out.metrics.asleep_total_us, 0);
  EXPECT_GT(out.metrics.decisions, 0u);
}

TEST(Simulation, CoreSyncRecords) {
  auto out = run_file("five_g_core");
  int syncs = 0;
  for (const auto& r : out.trace.records())
    if (r.kind == TraceKind::Sync) {
      ++syncs;
      EXPECT_EQ(r.get("an_digest"), r.get("cn_digest"));
    }
  EXPECT_GT(syncs, 0);
}

TEST(Simulation, MetricsJsonIsSortedAndStable) {
  auto out = run_file("attach_single_ue");
  auto json = sim::metrics_json(out.metrics);
  EXPECT_EQ(json, sim::metrics_json(run_file("attach_single_ue").metrics));
  EXPECT_LT(json.find("\"decisions\""), json.find("\"flows\""));
}

TEST(Analysis, ProtocolViolations) {
  std::vector<TraceRecord> ok = {
      rec(0, "enb", TraceKind::Mrb, {{"msg", "Mcch"}}),
      rec(1, "ue1", TraceKind::Rrc, {{"msg", "UlInformationTransfer"}, {"pdu", "ProbeRequest"}}),
      rec(2, "ue1", TraceKind::Mgmt, {{"msg", "AssociationRequest"}}),
  };
  EXPECT_TRUE(analysis::protocol_violations(ok).empty());
  std::vector<TraceRecord> bad = {
      rec(0, "ue1", TraceKind::Rrc, {{"msg", "AttachRequest"}}),
      rec(1, "enb", TraceKind::Ctrl, {{"event", "S1 Setup Request"}}),
      rec(2, "enb", TraceKind::Ctrl, {{"decision", "handover-request"}}),
      rec(3, "ue1", TraceKind::Mgmt, {{"msg", "Hello"}}),
      rec(4, "ue1", TraceKind::Rrc, {{"msg", "UlInformationTransfer"}, {"pdu", "IdentityResponse"}}),
  };
  EXPECT_EQ(analysis::protocol_violations(bad).size(), bad.size());
}

TEST(Analysis, MrbPrecedence) {
  std::vector<TraceRecord> early = {
      rec(5, "ue1", TraceKind::Mgmt, {{"msg", "Beacon"}, {"bearer", "MRB1"}, {"ap", "enb"}}),
      rec(7, "enb", TraceKind::Mrb, {{"msg", "Mcch"}}),
      rec(9, "ue1", TraceKind::Mgmt, {{"msg", "Beacon"}, {"bearer", "MRB1"}, {"ap", "enb"}}),
  };
  auto v = analysis::mrb_precedence_violations(early);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].t, 5);
  std::vector<TraceRecord> same_time = {
      rec(7, "enb", TraceKind::Mrb, {{"msg", "Mcch"}}),
      rec(7, "ue1", TraceKind::Mgmt, {{"msg", "Beacon"}, {"bearer", "MRB1"}, {"ap", "enb"}}),
  };
  EXPECT_EQ(analysis::mrb_precedence_violations(same_time).size(), 1u);
}

TEST(Analysis, NorthboundProjectionErasesTransport) {
  std::vector<TraceRecord> a = {rec(5, "iwf", TraceKind::Auth, {{"ue", "ue1"}, {"via", "enb"}, {"event", "x"}})};
  std::vector<TraceRecord> b = {rec(9, "iwf", TraceKind::Auth, {{"ue", "ue1"}, {"via", "ap1"}, {"event", "x"}})};
  EXPECT_EQ(analysis::northbound_projection(a, "ue1"), analysis::northbound_projection(b, "ue1"));
  EXPECT_EQ(analysis::northbound_projection(a, "ue1"), std::vector<std::string>{"iwf auth ue=ue1 event=x"});
}
