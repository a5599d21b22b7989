#include <gtest/gtest.h>

#include <filesystem>

#include "frugal5g/error.hpp"
#include "frugal5g/scenario.hpp"

using namespace f5g;
using namespace f5g::scenario;

namespace {

const char* kBase = R"(name: t
seed: 3
duration_ms: 100
mode: fixed_broadband
nodes:
  - {id: pop, type: pop}
  - {id: gw, type: gateway}
  - {id: enb, type: macro_enb, pos: [0, 0]}
  - {id: ue1, type: ue, pos: [10, 0], service_class: voice}
links:
  - {a: enb, b: pop, capacity_bps: 1000000, latency_ms: 2}
  - {a: pop, b: gw, capacity_bps: 1000000, latency_ms: 1}
)";

std::string schema_error(const std::string& text) {
  try {
    load_scenario(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaError);
    return e.what();
  }
  ADD_FAILURE() << "scenario accepted";
  return {};
}

}  // namespace

TEST(Scenario, LoadsBase) {
  auto s = load_scenario(kBase);
  EXPECT_EQ(s.name, "t");
  EXPECT_EQ(s.seed, 3u);
  EXPECT_EQ(s.duration, ms(100));
  EXPECT_EQ(s.mode, iw::NetworkMode::FixedBroadband);
  ASSERT_EQ(s.nodes.size(), 4u);
  EXPECT_EQ(s.node("ue1")->service, lte::ServiceClass::Voice);
  EXPECT_EQ(s.node("ue1")->line, 9);
  EXPECT_EQ(s.topology().pop(), "pop");
  EXPECT_EQ(s.lte.beacon_period, 102'400);
}

TEST(Scenario, EmptyDocumentIsEmptyScenario) {
  auto s = load_scenario("# nothing here\n");
  EXPECT_TRUE(s.nodes.empty());
  EXPECT_EQ(s.duration, 0);
}

TEST(Scenario, UnknownFieldNamesLine) {
  EXPECT_EQ(schema_error(std::string(kBase) + "colour: blue\n"),
            "SchemaError: line 13: unknown field 'colour' in scenario");
}

TEST(Scenario, BadNodeType) {
  std::string text = kBase;
  text.replace(text.find("type: gateway"), 13, "type: router");
  EXPECT_NE(schema_error(text).find("line 7: "), std::string::npos);
}

TEST(Scenario, TrafficRules) {
  std::string base = std::string(kBase) + "traffic:\n";
  EXPECT_NE(schema_error(base + "  - {id: f, ue: ue1, rate_bps: 1000, start_ms: 0}\n").find("line 14: missing field 'stop_ms'"),
            std::string::npos);
  EXPECT_NE(schema_error(base + "  - {id: f, ue: ue1, rate_bps: 1000, stop_ms: 5, packet_size: 8}\n")
                .find("packet_size must be 16..2304"),
            std::string::npos);
  EXPECT_NE(schema_error(base + "  - {id: f, ue: gw, rate_bps: 1000, stop_ms: 5}\n").find("is not a UE"),
            std::string::npos);
  auto ok = load_scenario(base + "  - {id: f, ue: ue1, rate_bps: 1000, stop_ms: 5, kind: poisson}\n");
  EXPECT_EQ(ok.traffic.at(0).kind, TrafficKind::Poisson);
  EXPECT_EQ(ok.traffic.at(0).dst, "internet");
}

TEST(Scenario, TopologyRules) {
  EXPECT_NE(schema_error(std::string(kBase) + "  - {a: ue1, b: pop}\n").find("cannot have wired links"),
            std::string::npos);
  EXPECT_NE(schema_error(std::string(kBase) + "  - {a: enb, b: nowhere}\n").find("does not exist"),
            std::string::npos);
  std::string core = kBase;
  core.replace(core.find("fixed_broadband"), 15, "five_g_core");
  EXPECT_NE(schema_error(core).find("needs exactly one cn node"), std::string::npos);
}

TEST(Scenario, RevokeOnlyWithCore) {
  auto text = std::string(kBase) + "events:\n  - {at_ms: 5, action: revoke, target: ue1}\n";
  EXPECT_NE(schema_error(text).find("revoke events need mode five_g_core"), std::string::npos);
}

TEST(Scenario, MissingFileIsIo) {
  try {
    load_scenario_file("/nonexistent/x.yaml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Io);
  }
}

TEST(Scenario, RegistryDefaultsToOwnCredentials) {
  std::string text = kBase;
  text.replace(text.find("service_class: voice"), 20, "credential: abc");
  auto s = load_scenario(text);
  EXPECT_EQ(s.effective_registry().at("ue1"), "abc");
}

TEST(Scenario, BundledScenariosValidate) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(F5G_SCENARIO_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(load_scenario_file(entry.path().string())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 10);
}

TEST(Scenario, Distance) { EXPECT_DOUBLE_EQ(distance({0, 0}, {3, 4}), 5.0); }
