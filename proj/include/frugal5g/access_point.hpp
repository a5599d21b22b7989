#pragma once

// The RAT-agnostic face every access point shows upward. A native Wi-Fi AP
// and an LTE eNB in emulation mode both implement AccessPoint, and the fog
// controller only ever sees ApDescriptor snapshots of either.

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "frugal5g/engine.hpp"
#include "frugal5g/frames.hpp"

namespace f5g::wlan {

using frames::Bytes;

enum class ApKind { NativeWifi, LteEmulated };
enum class PowerState { Awake, Asleep };

std::string_view ap_kind_name(ApKind k);
std::string_view power_state_name(PowerState p);

struct ApDescriptor {
  std::string ap_id;
  frames::MacAddress bssid;
  std::string ssid;
  ApKind kind = ApKind::NativeWifi;
  std::uint64_t capacity_bps = 0;
  std::uint64_t current_load_bps = 0;
  int station_count = 0;
  PowerState power_state = PowerState::Awake;
  SimTime reported_at = 0;

  friend bool operator==(const ApDescriptor&, const ApDescriptor&) = default;
};

// Callbacks from an AP into whoever runs the network. All optional.
struct ApHooks {
  std::function<bool(const std::string& ue)> in_range;
  std::function<std::vector<std::string>()> ues_in_range;
  // An uplink SDU reached the AP / a downlink SDU reached the UE.
  std::function<void(const std::string& ap, const std::string& ue, const Bytes& sdu)> on_uplink;
  std::function<void(const std::string& ap, const std::string& ue, const Bytes& sdu)> on_downlink;
  // An SDU that will never arrive; the drop is already traced.
  std::function<void(const std::string& ap, const std::string& ue, const Bytes& sdu)> on_drop;
  std::function<void(const std::string& ap, const std::string& ue)> on_associated;
  // The UE learned it is no longer associated.
  std::function<void(const std::string& ap, const std::string& ue)> on_deauthenticated;
};

class AccessPoint {
 public:
  virtual ~AccessPoint() = default;

  virtual const std::string& id() const = 0;
  virtual ApKind kind() const = 0;

  virtual ApDescriptor report() const = 0;
  virtual std::vector<std::string> stations() const = 0;
  virtual bool is_associated(const std::string& ue) const = 0;

  // Brings `ue` to the associated state and then calls `done`. Throws
  // Error(ApAsleep), Error(Unreachable) or Error(AssocIdExhausted).
  virtual void associate(const std::string& ue, std::function<void()> done) = 0;
  // Throws Error(NotAssociated).
  virtual void send_uplink(const std::string& ue, Bytes sdu) = 0;
  virtual void deliver_downlink(const std::string& ue, Bytes sdu) = 0;
  virtual void deauthenticate(const std::string& ue) = 0;

  // Asleep: deauthenticates every station, then stops all transmissions.
  virtual void set_power(PowerState state) = 0;
  virtual PowerState power() const = 0;
};

// Windowed delivered-byte rate used for load reports.
class LoadMeter {
 public:
  explicit LoadMeter(SimTime window = seconds(1)) : window_(window) {}

  void add(SimTime at, std::size_t bytes);
  // bits/s delivered over (now - window, now].
  std::uint64_t rate_bps(SimTime now) const;
  SimTime window() const { return window_; }

 private:
  SimTime window_;
  mutable std::deque<std::pair<SimTime, std::size_t>> samples_;
};

}  // namespace f5g::wlan
