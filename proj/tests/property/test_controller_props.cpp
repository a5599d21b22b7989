#include <gtest/gtest.h>

#include "../support/controller_props.hpp"

using namespace f5g;
using namespace f5g::testing;

TEST(ControllerProperties, OracleEquivalenceOn500Instances) {
  auto rep = controller_equivalence(0xc0ffee, 500);
  EXPECT_EQ(rep.instances, 500);
  EXPECT_EQ(rep.select_mismatches, 0) << rep.first_failure;
  EXPECT_EQ(rep.path_mismatches, 0) << rep.first_failure;
  EXPECT_EQ(rep.energy_rejected, 0) << rep.first_failure;
  EXPECT_EQ(rep.overloaded_nonempty, 0) << rep.first_failure;
  EXPECT_GE(rep.mean_ratio, 0.8);
  RecordProperty("energy_mean_ratio", std::to_string(rep.mean_ratio));
  std::printf("select checks %d, path checks %d, energy instances %d (+%d overloaded), mean plan/optimum %.4f\n",
              rep.select_checks, rep.path_checks, rep.optimum_instances, rep.overloaded, rep.mean_ratio);
}

TEST(ControllerProperties, DecisionsAreFunctionsOfTheView) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng);
    auto copy = inst.view;
    EXPECT_EQ(ctrl::view_digest(copy), ctrl::view_digest(inst.view));
    EXPECT_EQ(ctrl::energy_plan(copy, {}), ctrl::energy_plan(inst.view, {}));
  }
}

TEST(ControllerProperties, PlannerNeverSleepsTheMacro) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    auto inst = random_instance(rng);
    EXPECT_FALSE(ctrl::energy_plan(inst.view, {}).count("enb"));
  }
}

TEST(ControllerProperties, HandoverIsMakeBeforeBreak) {
  std::mt19937_64 rng(29);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    auto inst = random_instance(rng);
    for (const auto& [ue, serving] : inst.view.serving) {
      for (const auto& target : inst.view.reachability.at(ue)) {
        if (target == serving) continue;
        std::vector<ctrl::HandoverAction> acts;
        try {
          acts = ctrl::handover(inst.view, ue, target);
        } catch (const Error& e) {
          EXPECT_TRUE(e.code() == Errc::Unreachable || e.code() == Errc::NoCapacity);
          continue;
        }
        ASSERT_EQ(acts.size(), 3u);
        EXPECT_EQ(acts[0].kind, ctrl::ActionKind::Associate);
        EXPECT_EQ(acts[1].kind, ctrl::ActionKind::Reroute);
        EXPECT_EQ(acts[2].kind, ctrl::ActionKind::Deauth);
        EXPECT_EQ(acts[2].ap, serving);
        EXPECT_EQ(acts[1].path.front(), target);
        EXPECT_EQ(acts[1].path.back(), "pop");
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}
