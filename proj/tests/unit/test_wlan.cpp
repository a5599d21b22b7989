#include <gtest/gtest.h>

#include "frugal5g/error.hpp"
#include "frugal5g/wlan.hpp"

using namespace f5g;
using namespace f5g::wlan;

namespace {

struct Harness {
  Engine engine;
  Trace trace;
  std::vector<std::pair<SimTime, std::string>> log;
  std::set<std::string> in_range{"ue1", "ue2"};
  WlanAp ap;

  Harness() : ap(engine, trace, config(), hooks()) {
    ap.register_station_mac("ue1", frames::MacAddress::local(1));
    ap.register_station_mac("ue2", frames::MacAddress::local(2));
  }

  static WlanApConfig config() {
    WlanApConfig c;
    c.ap_id = "ap1";
    c.bssid = frames::MacAddress::local(50);
    return c;
  }

  ApHooks hooks() {
    ApHooks h;
    h.in_range = [this](const std::string& ue) { return in_range.count(ue) != 0; };
    h.on_associated = [this](const std::string&, const std::string& ue) {
      log.push_back({engine.now(), "assoc " + ue});
    };
    h.on_uplink = [this](const std::string&, const std::string& ue, const Bytes& sdu) {
      log.push_back({engine.now(), "ul " + ue + " " + std::to_string(sdu.size())});
    };
    h.on_downlink = [this](const std::string&, const std::string& ue, const Bytes& sdu) {
      log.push_back({engine.now(), "dl " + ue + " " + std::to_string(sdu.size())});
    };
    h.on_drop = [this](const std::string&, const std::string& ue, const Bytes&) {
      log.push_back({engine.now(), "drop " + ue});
    };
    h.on_deauthenticated = [this](const std::string&, const std::string& ue) {
      log.push_back({engine.now(), "deauth " + ue});
    };
    return h;
  }
};

}  // namespace

TEST(WlanAp, BeaconsEveryPeriod) {
  Harness h;
  h.ap.start();
  h.engine.run_until(us(102'400) * 3);
  EXPECT_EQ(h.ap.beacons_sent(), 4u);
  auto beacons = filter_trace(h.trace.records(), {"ap1"}, {TraceKind::Mgmt});
  ASSERT_EQ(beacons.size(), 4u);
  EXPECT_EQ(beacons[1].t, 102'400);
  EXPECT_EQ(beacons[0].get("msg"), "Beacon");
}

TEST(WlanAp, FourFrameAssociation) {
  Harness h;
  h.ap.associate("ue1", [&] { h.log.push_back({h.engine.now(), "done"}); });
  h.engine.run_until(ms(50));
  // Four 35-37 B frames, each 6 us at 50 Mbps plus 2 ms.
  ASSERT_EQ(h.log.size(), 2u);
  EXPECT_EQ(h.log[0], (std::pair<SimTime, std::string>{8'024, "assoc ue1"}));
  EXPECT_EQ(h.log[1].second, "done");
  EXPECT_TRUE(h.ap.is_associated("ue1"));
  auto mgmt = filter_trace(h.trace.records(), {}, {TraceKind::Mgmt});
  std::vector<std::string> msgs;
  for (const auto& r : mgmt) msgs.push_back(r.node + ":" + r.get("msg"));
  EXPECT_EQ(msgs, (std::vector<std::string>{"ue1:ProbeRequest", "ap1:ProbeResponse", "ue1:AssociationRequest",
                                            "ap1:AssociationResponse"}));
  EXPECT_EQ(h.ap.report().station_count, 1);
}

TEST(WlanAp, DataBothWays) {
  Harness h;
  h.ap.associate("ue1", nullptr);
  h.engine.run_until(ms(10));
  h.ap.send_uplink("ue1", Bytes(100, 0));
  h.ap.deliver_downlink("ue1", Bytes(100, 0));
  h.engine.run_until(ms(20));
  // 124 B frame: 20 us at 50 Mbps plus 2 ms.
  ASSERT_EQ(h.log.size(), 3u);
  EXPECT_EQ(h.log[1], (std::pair<SimTime, std::string>{ms(10) + 2'020, "ul ue1 100"}));
  EXPECT_EQ(h.log[2], (std::pair<SimTime, std::string>{ms(10) + 2'020, "dl ue1 100"}));
}

TEST(WlanAp, Errors) {
  Harness h;
  EXPECT_THROW(h.ap.send_uplink("ue1", {1}), Error);
  h.in_range.erase("ue2");
  try {
    h.ap.associate("ue2", nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Unreachable);
  }
  h.ap.set_power(PowerState::Asleep);
  try {
    h.ap.associate("ue1", nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ApAsleep);
  }
}

TEST(WlanAp, SleepDeauthenticatesStationsAndDropsInFlight) {
  Harness h;
  h.ap.associate("ue1", nullptr);
  h.engine.run_until(ms(10));
  h.ap.send_uplink("ue1", Bytes(10, 0));
  h.ap.set_power(PowerState::Asleep);
  h.engine.run_until(ms(20));
  EXPECT_FALSE(h.ap.is_associated("ue1"));
  EXPECT_EQ(h.ap.report().power_state, PowerState::Asleep);
  EXPECT_EQ(h.log.back().second, "drop ue1");
}

TEST(WlanAp, GracefulDeauth) {
  Harness h;
  h.ap.associate("ue1", nullptr);
  h.engine.run_until(ms(10));
  h.ap.deauthenticate("ue1");
  h.engine.run_until(ms(20));
  EXPECT_EQ(h.log.back().second, "deauth ue1");
}

TEST(LoadMeter, WindowedRate) {
  LoadMeter m(seconds(1));
  m.add(ms(100), 1000);
  m.add(ms(600), 1000);
  EXPECT_EQ(m.rate_bps(ms(900)), 16'000u);
  EXPECT_EQ(m.rate_bps(ms(1100)), 8'000u);
  EXPECT_EQ(m.rate_bps(ms(1600)), 0u);
}
