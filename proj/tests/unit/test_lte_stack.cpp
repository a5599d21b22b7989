#include <gtest/gtest.h>

#include "frugal5g/error.hpp"
#include "frugal5g/lte_stack.hpp"

using namespace f5g;
using namespace f5g::lte;

namespace {

struct Harness {
  Engine engine;
  Trace trace;
  std::vector<std::pair<SimTime, std::string>> log;
  EnbStack stack;

  Harness() : stack(engine, trace, EnbConfig{}, callbacks()) {}

  EnbCallbacks callbacks() {
    EnbCallbacks cb;
    cb.in_range = [](const std::string& ue) { return ue != "far"; };
    cb.ues_in_range = [] { return std::vector<std::string>{"ue1"}; };
    cb.on_connected = [this](const std::string& ue) { log.push_back({engine.now(), "connected " + ue}); };
    cb.on_drb_active = [this](const std::string& ue, int drb) {
      log.push_back({engine.now(), "drb" + std::to_string(drb) + " " + ue});
    };
    cb.on_ul_drb = [this](const std::string& ue, int, const Bytes& pdu) {
      log.push_back({engine.now(), "ul " + ue + " " + std::to_string(pdu.size())});
    };
    cb.on_mrb = [this](const std::string& ue, const Bytes&) { log.push_back({engine.now(), "mrb " + ue}); };
    cb.on_beacon_slot = [this](SimTime slot) {
      log.push_back({slot, "slot"});
      stack.broadcast_on_mrb(Bytes(36, 0));
    };
    return cb;
  }
};

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

}  // namespace

TEST(Qci, Mapping) {
  EXPECT_EQ(qci_for(ServiceClass::Voice), 1);
  EXPECT_EQ(qci_for(ServiceClass::Interactive), 8);
  EXPECT_EQ(qci_for(ServiceClass::Background), 9);
  EXPECT_EQ(qci_for("voice"), 1);
  EXPECT_EQ(qci_for("gaming"), 9);
  EXPECT_EQ(BearerId::drb(3).label(), "DRB3");
  EXPECT_EQ(BearerId::mrb().label(), "MRB1");
}

TEST(EnbStack, ConnectionTakesThreeSrbHops) {
  Harness h;
  EXPECT_EQ(h.stack.rrc_connect("ue1", ServiceClass::Voice), BearerId::srb(1));
  EXPECT_FALSE(h.stack.connected("ue1"));
  h.engine.run_until(ms(100));
  ASSERT_EQ(h.log.size(), 1u);
  EXPECT_EQ(h.log[0], (std::pair<SimTime, std::string>{ms(15), "connected ue1"}));
  EXPECT_EQ(h.stack.declared_class("ue1"), ServiceClass::Voice);
  auto rrc = filter_trace(h.trace.records(), {}, {TraceKind::Rrc});
  ASSERT_EQ(rrc.size(), 3u);
  EXPECT_EQ(rrc[0].get("msg"), "ConnectionRequest");
  EXPECT_EQ(rrc[1].get("msg"), "ConnectionSetup");
  EXPECT_EQ(rrc[1].node, "enb");
  EXPECT_EQ(rrc[2].get("bearer"), "SRB1");
}

TEST(EnbStack, ConnectErrors) {
  Harness h;
  h.stack.rrc_connect("ue1");
  EXPECT_EQ(code_of([&] { h.stack.rrc_connect("ue1"); }), Errc::AlreadyConnected);
  EXPECT_EQ(code_of([&] { h.stack.rrc_connect("far"); }), Errc::Unreachable);
  EXPECT_EQ(code_of([&] { h.stack.send_srb("ue1", Direction::Uplink, {1}); }), Errc::BearerNotActive);
}

TEST(EnbStack, ReconfigurationActivatesDrb) {
  Harness h;
  h.stack.rrc_connect("ue1");
  h.engine.run_until(ms(15));
  h.stack.reconfigure("ue1", DrbConfig{1, 9}, Bytes(40, 0));
  EXPECT_EQ(h.stack.bearer_state("ue1", BearerId::drb(1)), BearerState::Pending);
  EXPECT_EQ(code_of([&] { h.stack.send_drb("ue1", 1, Direction::Uplink, {}); }), Errc::BearerNotActive);
  EXPECT_EQ(code_of([&] { h.stack.reconfigure("ue1", DrbConfig{1, 9}, std::nullopt); }), Errc::DuplicateDrb);
  h.engine.run_until(ms(100));
  // 40 B at 1 Mbps = 320 us + 5 ms down, then 5 ms up for the empty complete.
  EXPECT_EQ(h.log.back(), (std::pair<SimTime, std::string>{ms(15) + 320 + ms(10), "drb1 ue1"}));
  EXPECT_EQ(h.stack.bearer_state("ue1", BearerId::drb(1)), BearerState::Active);

  h.stack.send_drb("ue1", 1, Direction::Uplink, Bytes(1250, 0));
  h.engine.run_until(ms(200));
  // 10 kbit at 10 Mbps = 1 ms + 10 ms.
  EXPECT_EQ(h.log.back(), (std::pair<SimTime, std::string>{ms(111), "ul ue1 1250"}));
}

TEST(EnbStack, ReleaseDropsInFlight) {
  Harness h;
  h.stack.rrc_connect("ue1");
  h.engine.run_until(ms(15));
  h.stack.send_srb("ue1", Direction::Uplink, {1, 2});
  h.stack.release("ue1");
  h.engine.run_until(ms(50));
  auto drops = filter_trace(h.trace.records(), {}, {TraceKind::Drop});
  ASSERT_EQ(drops.size(), 1u);
  EXPECT_EQ(drops[0].get("reason"), "bearer-released");
  EXPECT_TRUE(h.stack.bearers("ue1").empty());
}

TEST(EnbStack, MrbScheduleBeaconsAfterFirstMcch) {
  Harness h;
  EXPECT_EQ(code_of([&] { h.stack.broadcast_on_mrb({1}); }), Errc::MrbNotReady);
  h.engine.run_until(ms(7));
  h.stack.setup_mrb(ms(100), us(102'400));
  h.engine.run_until(ms(400));
  const auto& sched = h.stack.mrb_schedule();
  EXPECT_EQ(sched.first_mcch_at, ms(7));
  auto mrb = filter_trace(h.trace.records(), {}, {TraceKind::Mrb});
  ASSERT_GE(mrb.size(), 5u);
  EXPECT_EQ(mrb[0].get("msg"), "Sib13");
  EXPECT_EQ(mrb[1].get("msg"), "Mcch");
  EXPECT_EQ(mrb[1].t, ms(7));
  EXPECT_EQ(mrb[2].t, ms(107));
  // Slots at 7 ms + k * 102.4 ms; 36 B on the MRB is 288 us + 5 ms.
  ASSERT_GE(h.log.size(), 4u);
  EXPECT_EQ(h.log[0], (std::pair<SimTime, std::string>{ms(7) + 102'400, "slot"}));
  EXPECT_EQ(h.log[1], (std::pair<SimTime, std::string>{ms(7) + 102'400 + 288 + ms(5), "mrb ue1"}));
  EXPECT_EQ(h.log[2].first, ms(7) + 204'800);
}

TEST(EnbStack, BeaconingCanPause) {
  Harness h;
  h.stack.setup_mrb(ms(100), us(102'400));
  h.stack.set_beaconing(false);
  h.engine.run_until(ms(500));
  EXPECT_TRUE(h.log.empty());
  EXPECT_TRUE(h.stack.mrb_active());
}
