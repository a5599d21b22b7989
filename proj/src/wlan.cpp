#include "frugal5g/wlan.hpp"

#include "frugal5g/emulation.hpp"
#include "frugal5g/error.hpp"

namespace f5g::wlan {

using frames::FrameType;
using frames::MacAddress;
using frames::MacFrame;

WlanAp::WlanAp(Engine& engine, Trace& trace, WlanApConfig config, ApHooks hooks)
    : engine_(engine),
      trace_(trace),
      config_(std::move(config)),
      hooks_(std::move(hooks)),
      load_(config_.load_window) {}

void WlanAp::start() {
  if (started_) return;
  started_ = true;
  engine_.schedule_in(0, id(), [this] { beacon_tick(); });
}

void WlanAp::beacon_tick() {
  if (power_ == PowerState::Asleep) {
    started_ = false;
    return;
  }
  auto interval_tu = static_cast<std::uint16_t>(std::max<SimTime>(1, config_.beacon_period / 1024));
  auto beacon = frames::build_beacon(config_.ssid, interval_tu, frames::Tim{}, config_.bssid, seq_);
  seq_ = static_cast<std::uint16_t>((seq_ + 1) % frames::kSeqModulo);
  trace_.emit(engine_.now(), id(), TraceKind::Mgmt,
              {{"msg", "Beacon"}, {"bearer", "air"}, {"ev", "tx"}});
  ++beacons_sent_;
  engine_.schedule_in(config_.beacon_period, id(), [this] { beacon_tick(); });
}

void WlanAp::register_station_mac(const std::string& ue, MacAddress mac) { macs_[ue] = mac; }

MacAddress WlanAp::mac_of(const std::string& ue) const {
  auto it = macs_.find(ue);
  if (it != macs_.end()) return it->second;
  return MacAddress::local(static_cast<std::uint32_t>(fnv1a(ue)));
}

LinkModel& WlanAp::link(const std::string& ue, bool uplink) {
  auto key = std::make_pair(ue, uplink);
  auto it = links_.find(key);
  if (it == links_.end())
    it = links_.emplace(key, LinkModel(LinkParams{config_.capacity_bps, config_.latency})).first;
  return it->second;
}

void WlanAp::trace_frame(const std::string& sender, const std::string& ue, bool uplink,
                         const MacFrame& frame) {
  const bool data = frame.type == FrameType::Data;
  TraceFields f{{"msg", std::string(frames::frame_type_name(frame.type))},
                {"ue", ue},
                {"ap", id()},
                {"bearer", "air"},
                {"dir", uplink ? "ul" : "dl"}};
  if (data) f.emplace_back("len", std::to_string(frame.body.size()));
  f.emplace_back("ev", "tx");
  trace_.emit(engine_.now(), sender, data ? TraceKind::Data : TraceKind::Mgmt, std::move(f));
}

void WlanAp::air(const std::string& ue, bool uplink, const MacFrame& frame,
                 std::function<void()> on_arrival) {
  const auto wire = frames::encode_frame(frame);
  trace_frame(uplink ? ue : id(), ue, uplink, frame);
  auto at = link(ue, uplink).admit(engine_.now(), wire.size());
  if (!at) {
    trace_.emit(engine_.now(), uplink ? ue : id(), TraceKind::Drop,
                {{"reason", "queue-overflow"}, {"ue", ue}, {"ap", id()}, {"bearer", "air"},
                 {"dir", uplink ? "ul" : "dl"}});
    if (frame.type == FrameType::Data && hooks_.on_drop) hooks_.on_drop(id(), ue, frame.body);
    return;
  }
  engine_.schedule_at(*at, uplink ? id() : ue, std::move(on_arrival));
}

bool WlanAp::current(const std::string& ue, std::uint64_t epoch) const {
  auto it = stations_.find(ue);
  return power_ == PowerState::Awake && it != stations_.end() && it->second.epoch == epoch;
}

int WlanAp::allocate_aid() const {
  std::vector<bool> used(frames::kMaxAssocId + 1, false);
  for (const auto& [_, st] : stations_)
    if (st.aid) used[static_cast<std::size_t>(*st.aid)] = true;
  for (int aid = 1; aid <= frames::kMaxAssocId; ++aid)
    if (!used[static_cast<std::size_t>(aid)]) return aid;
  return 0;
}

ApDescriptor WlanAp::report() const {
  ApDescriptor d;
  d.ap_id = id();
  d.bssid = config_.bssid;
  d.ssid = config_.ssid;
  d.kind = ApKind::NativeWifi;
  d.capacity_bps = config_.capacity_bps;
  d.current_load_bps = std::min(load_.rate_bps(engine_.now()), config_.capacity_bps);
  d.station_count = static_cast<int>(stations().size());
  d.power_state = power_;
  d.reported_at = engine_.now();
  return d;
}

std::vector<std::string> WlanAp::stations() const {
  std::vector<std::string> out;
  for (const auto& [ue, st] : stations_)
    if (st.phase == StaPhase::Associated) out.push_back(ue);
  return out;
}

bool WlanAp::is_associated(const std::string& ue) const {
  auto it = stations_.find(ue);
  return it != stations_.end() && it->second.phase == StaPhase::Associated;
}

void WlanAp::associate(const std::string& ue, std::function<void()> done) {
  if (power_ == PowerState::Asleep) fail(Errc::ApAsleep, id() + " is asleep");
  if (hooks_.in_range && !hooks_.in_range(ue)) fail(Errc::Unreachable, ue + " is out of range of " + id());
  auto existing = stations_.find(ue);
  if (existing != stations_.end()) {
    if (existing->second.phase == StaPhase::Associated) {
      if (done) engine_.schedule_in(0, ue, std::move(done));
    } else if (done) {
      existing->second.waiters.push_back(std::move(done));
    }
    return;
  }
  if (allocate_aid() == 0) fail(Errc::AssocIdExhausted, id() + " has no free association id");

  Station& st = stations_[ue];
  st.epoch = next_epoch_++;
  if (done) st.waiters.push_back(std::move(done));
  const auto epoch = st.epoch;
  const MacAddress mac = mac_of(ue);
  const frames::MgmtBody probe_body{config_.ssid, 0, std::nullopt};

  MacFrame probe{FrameType::ProbeRequest, MacAddress::broadcast(), mac, MacAddress::broadcast(),
                 st.seq++, frames::encode_mgmt_body(probe_body)};
  air(ue, true, probe, [this, ue, epoch, mac] {
    if (!current(ue, epoch)) return;
    MacFrame resp{FrameType::ProbeResponse, mac, config_.bssid, config_.bssid, seq_,
                  frames::encode_mgmt_body({config_.ssid, 0, std::nullopt})};
    seq_ = static_cast<std::uint16_t>((seq_ + 1) % frames::kSeqModulo);
    air(ue, false, resp, [this, ue, epoch, mac] {
      if (!current(ue, epoch)) return;
      Station& st = stations_.at(ue);
      st.phase = StaPhase::Associating;
      MacFrame req{FrameType::AssociationRequest, config_.bssid, mac, config_.bssid, st.seq++,
                   frames::encode_mgmt_body({config_.ssid, 0, std::nullopt})};
      air(ue, true, req, [this, ue, epoch, mac] {
        if (!current(ue, epoch)) return;
        const int aid = allocate_aid();
        Station& st = stations_.at(ue);
        st.aid = aid;
        frames::MgmtBody body{config_.ssid, static_cast<std::uint16_t>(aid == 0 ? 17 : 0), std::nullopt};
        if (aid != 0) body.aid = static_cast<std::uint16_t>(aid);
        MacFrame resp{FrameType::AssociationResponse, mac, config_.bssid, config_.bssid, seq_,
                      frames::encode_mgmt_body(body)};
        seq_ = static_cast<std::uint16_t>((seq_ + 1) % frames::kSeqModulo);
        air(ue, false, resp, [this, ue, epoch, aid] {
          if (!current(ue, epoch)) return;
          if (aid == 0) {
            stations_.erase(ue);
            return;
          }
          Station& st = stations_.at(ue);
          st.phase = StaPhase::Associated;
          auto waiters = std::move(st.waiters);
          st.waiters.clear();
          if (hooks_.on_associated) hooks_.on_associated(id(), ue);
          for (auto& w : waiters) w();
        });
      });
    });
  });
}

void WlanAp::send_uplink(const std::string& ue, Bytes sdu) {
  if (!is_associated(ue)) fail(Errc::NotAssociated, ue + " is not associated with " + id());
  Station& st = stations_.at(ue);
  const auto epoch = st.epoch;
  auto frame = emu::encapsulate(sdu, mac_of(ue), config_.bssid, config_.bssid, st.seq);
  st.seq = static_cast<std::uint16_t>((st.seq + 1) % frames::kSeqModulo);
  air(ue, true, frame, [this, ue, epoch, sdu = std::move(sdu)] {
    if (!current(ue, epoch)) {
      trace_.emit(engine_.now(), id(), TraceKind::Drop,
                  {{"reason", "not-associated"}, {"ue", ue}, {"ap", id()}, {"dir", "ul"}});
      if (hooks_.on_drop) hooks_.on_drop(id(), ue, sdu);
      return;
    }
    load_.add(engine_.now(), sdu.size());
    if (hooks_.on_uplink) hooks_.on_uplink(id(), ue, sdu);
  });
}

void WlanAp::deliver_downlink(const std::string& ue, Bytes sdu) {
  if (!is_associated(ue)) fail(Errc::NotAssociated, ue + " is not associated with " + id());
  const auto epoch = stations_.at(ue).epoch;
  auto frame = emu::encapsulate(sdu, config_.bssid, mac_of(ue), config_.bssid, seq_);
  seq_ = static_cast<std::uint16_t>((seq_ + 1) % frames::kSeqModulo);
  air(ue, false, frame, [this, ue, epoch, sdu = std::move(sdu)] {
    if (!current(ue, epoch)) {
      trace_.emit(engine_.now(), ue, TraceKind::Drop,
                  {{"reason", "not-associated"}, {"ue", ue}, {"ap", id()}, {"dir", "dl"}});
      if (hooks_.on_drop) hooks_.on_drop(id(), ue, sdu);
      return;
    }
    load_.add(engine_.now(), sdu.size());
    if (hooks_.on_downlink) hooks_.on_downlink(id(), ue, sdu);
  });
}

void WlanAp::deauthenticate(const std::string& ue) {
  auto it = stations_.find(ue);
  if (it == stations_.end()) return;
  const bool was_associated = it->second.phase == StaPhase::Associated;
  stations_.erase(it);
  if (!was_associated || power_ == PowerState::Asleep) return;
  MacFrame deauth{FrameType::Deauthentication, mac_of(ue), config_.bssid, config_.bssid, seq_,
                  frames::encode_deauth_body(frames::kReasonLeaving)};
  seq_ = static_cast<std::uint16_t>((seq_ + 1) % frames::kSeqModulo);
  air(ue, false, deauth, [this, ue] {
    if (hooks_.on_deauthenticated) hooks_.on_deauthenticated(id(), ue);
  });
}

void WlanAp::set_power(PowerState state) {
  if (state == power_) return;
  if (state == PowerState::Asleep) {
    std::vector<std::string> all;
    for (const auto& [ue, _] : stations_) all.push_back(ue);
    for (const auto& ue : all) deauthenticate(ue);
    power_ = PowerState::Asleep;
    trace_.emit(engine_.now(), id(), TraceKind::Ctrl, {{"event", "power"}, {"state", "asleep"}});
    return;
  }
  power_ = PowerState::Awake;
  trace_.emit(engine_.now(), id(), TraceKind::Ctrl, {{"event", "power"}, {"state", "awake"}});
  if (!started_) {
    started_ = true;
    engine_.schedule_in(0, id(), [this] { beacon_tick(); });
  }
}

}  // namespace f5g::wlan
