#include "frugal5g/access_point.hpp"

namespace f5g::wlan {

std::string_view ap_kind_name(ApKind k) { return k == ApKind::NativeWifi ? "wifi" : "lte-emulated"; }

std::string_view power_state_name(PowerState p) { return p == PowerState::Awake ? "awake" : "asleep"; }

void LoadMeter::add(SimTime at, std::size_t bytes) { samples_.emplace_back(at, bytes); }

std::uint64_t LoadMeter::rate_bps(SimTime now) const {
  while (!samples_.empty() && samples_.front().first <= now - window_) samples_.pop_front();
  std::uint64_t bytes = 0;
  for (const auto& [t, b] : samples_)
    if (t <= now) bytes += b;
  return static_cast<std::uint64_t>(bytes * 8u * 1'000'000u / static_cast<std::uint64_t>(window_));
}

}  // namespace f5g::wlan
