#pragma once

// An LTE eNB in Wi-Fi emulation mode, seen from above as one more AP.
//
// Runs the eNB-side emulation layer and, for every powered-on UE in its
// coverage, the UE-side layer too, executing both machines' actions against
// an EnbStack. A UE that hears beacons switches to emulation mode on its own;
// it only completes RRC connection and association once the controller asks
// for it through associate().

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "frugal5g/access_point.hpp"
#include "frugal5g/emulation.hpp"
#include "frugal5g/lte_stack.hpp"
#include "frugal5g/trace.hpp"

namespace f5g::emu {

struct EmulatedApConfig {
  std::string ap_id = "enb";
  MacAddress bssid;
  std::string ssid = "frugal5g";
  std::uint64_t capacity_bps = 20'000'000;
  bool mrb_enabled = true;
  SimTime mcch_period = ms(100);
  SimTime beacon_period = us(102'400);
  LinkParams srb{1'000'000, ms(5)};
  LinkParams drb{10'000'000, ms(10)};
  LinkParams mrb{1'000'000, ms(5)};
  SimTime load_window = seconds(1);
};

class EmulatedAp final : public wlan::AccessPoint {
 public:
  EmulatedAp(Engine& engine, Trace& trace, EmulatedApConfig config, wlan::ApHooks hooks);

  // Sets up the MRB (when enabled) so beacons start flowing.
  void start();

  // Powers on the UE-side emulation layer: Scanning with the beacon-loss
  // timer armed.
  void power_on(const std::string& ue, MacAddress mac, lte::ServiceClass service);
  bool powered(const std::string& ue) const { return ues_.count(ue) != 0; }

  // Power-save requests from the UE's application side.
  void ue_sleep(const std::string& ue);
  void ue_wake(const std::string& ue);

  std::optional<UePhase> ue_phase(const std::string& ue) const;
  std::optional<Mode> ue_mode(const std::string& ue) const;
  const std::vector<SimTime>& beacon_log(const std::string& ue) const;

  const lte::EnbStack& stack() const { return stack_; }
  const EnbEmuContext& context() const { return ctx_; }

  const std::string& id() const override { return config_.ap_id; }
  wlan::ApKind kind() const override { return wlan::ApKind::LteEmulated; }
  wlan::ApDescriptor report() const override;
  std::vector<std::string> stations() const override;
  bool is_associated(const std::string& ue) const override;
  void associate(const std::string& ue, std::function<void()> done) override;
  void send_uplink(const std::string& ue, Bytes sdu) override;
  void deliver_downlink(const std::string& ue, Bytes sdu) override;
  void deauthenticate(const std::string& ue) override;
  void set_power(wlan::PowerState state) override;
  wlan::PowerState power() const override { return power_; }

 private:
  struct UeSide {
    UeEmuState state;
    std::optional<Mode> mode;
    std::uint64_t timer_gen = 0;
    bool admitted = false;
    bool connect_deferred = false;
    std::optional<Bytes> offered_probe_response;
    std::vector<SimTime> beacons;
    std::vector<std::function<void()>> waiters;
  };

  lte::EnbCallbacks stack_callbacks();
  UeSide& ue_side(const std::string& ue);

  void ue_step(const std::string& ue, const UeEvent& event);
  void run_ue_action(const std::string& ue, const EmuAction& action);
  void enb_step(const EnbEvent& event);
  void run_enb_action(const EnbAction& action);

  void connect(const std::string& ue);
  void trace_frame(const std::string& sender, const std::string& ue, const std::string& bearer,
                   lte::Direction dir, const Bytes& pdu);
  void notice(const std::string& node, const Notify& n);
  void dropped(const std::string& ue, const Bytes& pdu);

  Engine& engine_;
  Trace& trace_;
  EmulatedApConfig config_;
  wlan::ApHooks hooks_;
  lte::EnbStack stack_;
  EnbEmuContext ctx_;
  std::map<std::string, UeSide> ues_;
  wlan::LoadMeter load_;
  wlan::PowerState power_ = wlan::PowerState::Awake;
};

}  // namespace f5g::emu
