#pragma once

// Native Wi-Fi AP: beacons on the air interface and the probe / associate /
// data lifecycle over a direct link, with no RRC leg.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "frugal5g/access_point.hpp"
#include "frugal5g/link_model.hpp"
#include "frugal5g/trace.hpp"

namespace f5g::wlan {

struct WlanApConfig {
  std::string ap_id;
  frames::MacAddress bssid;
  std::string ssid = "frugal5g";
  std::uint64_t capacity_bps = 50'000'000;
  SimTime latency = ms(2);
  SimTime beacon_period = us(102'400);
  SimTime load_window = seconds(1);
};

class WlanAp final : public AccessPoint {
 public:
  WlanAp(Engine& engine, Trace& trace, WlanApConfig config, ApHooks hooks);

  // Starts beaconing.
  void start();
  // MAC address used by `ue` in frames to this AP.
  void register_station_mac(const std::string& ue, frames::MacAddress mac);

  const std::string& id() const override { return config_.ap_id; }
  ApKind kind() const override { return ApKind::NativeWifi; }
  ApDescriptor report() const override;
  std::vector<std::string> stations() const override;
  bool is_associated(const std::string& ue) const override;
  void associate(const std::string& ue, std::function<void()> done) override;
  void send_uplink(const std::string& ue, Bytes sdu) override;
  void deliver_downlink(const std::string& ue, Bytes sdu) override;
  void deauthenticate(const std::string& ue) override;
  void set_power(PowerState state) override;
  PowerState power() const override { return power_; }

  std::uint64_t beacons_sent() const { return beacons_sent_; }

 private:
  enum class StaPhase { Probing, Associating, Associated };
  struct Station {
    StaPhase phase = StaPhase::Probing;
    std::optional<int> aid;
    std::uint16_t seq = 0;
    std::uint64_t epoch = 0;
    std::vector<std::function<void()>> waiters;
  };

  frames::MacAddress mac_of(const std::string& ue) const;
  LinkModel& link(const std::string& ue, bool uplink);
  void air(const std::string& ue, bool uplink, const frames::MacFrame& frame,
           std::function<void()> on_arrival);
  void trace_frame(const std::string& sender, const std::string& ue, bool uplink,
                   const frames::MacFrame& frame);
  bool current(const std::string& ue, std::uint64_t epoch) const;
  int allocate_aid() const;
  void beacon_tick();

  Engine& engine_;
  Trace& trace_;
  WlanApConfig config_;
  ApHooks hooks_;
  PowerState power_ = PowerState::Awake;
  std::map<std::string, Station> stations_;
  std::map<std::string, frames::MacAddress> macs_;
  std::map<std::pair<std::string, bool>, LinkModel> links_;
  LoadMeter load_;
  std::uint16_t seq_ = 0;
  std::uint64_t next_epoch_ = 1;
  std::uint64_t beacons_sent_ = 0;
  bool started_ = false;
};

}  // namespace f5g::wlan
