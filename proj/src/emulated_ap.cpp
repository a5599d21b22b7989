#include "frugal5g/emulated_ap.hpp"

#include "frugal5g/error.hpp"

namespace f5g::emu {

using frames::FrameType;
using lte::Direction;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::optional<MacFrame> try_decode(const Bytes& pdu) {
  try {
    return frames::decode_frame(pdu);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string tim_label(const frames::Tim& tim) {
  std::string out;
  for (int aid : tim.ids()) {
    if (!out.empty()) out += ',';
    out += std::to_string(aid);
  }
  return out.empty() ? "-" : out;
}

}  // namespace

EmulatedAp::EmulatedAp(Engine& engine, Trace& trace, EmulatedApConfig config, wlan::ApHooks hooks)
    : engine_(engine),
      trace_(trace),
      config_(std::move(config)),
      hooks_(std::move(hooks)),
      stack_(engine, trace, lte::EnbConfig{config_.ap_id, config_.srb, config_.drb, config_.mrb},
             stack_callbacks()),
      load_(config_.load_window) {
  ctx_.bssid = config_.bssid;
  ctx_.ssid = config_.ssid;
  ctx_.beacon_interval_tu =
      static_cast<std::uint16_t>(std::max<SimTime>(1, config_.beacon_period / 1024));
}

lte::EnbCallbacks EmulatedAp::stack_callbacks() {
  lte::EnbCallbacks cb;
  cb.in_range = [this](const std::string& ue) { return !hooks_.in_range || hooks_.in_range(ue); };
  cb.ues_in_range = [this] {
    std::vector<std::string> out;
    if (hooks_.ues_in_range) out = hooks_.ues_in_range();
    return out;
  };
  cb.on_connected = [this](const std::string& ue) { ue_step(ue, ue_event::RrcConnected{}); };
  cb.on_dl_srb = [this](const std::string& ue, const Bytes& pdu) {
    ue_step(ue, ue_event::PduFromSrb{pdu});
  };
  cb.on_reconfiguration = [this](const std::string& ue, const lte::RrcMessage& msg) {
    auto it = ues_.find(ue);
    if (it != ues_.end()) it->second.offered_probe_response = msg.embedded_pdu;
  };
  cb.on_dl_drb = [this](const std::string& ue, int, const Bytes& pdu) {
    ue_step(ue, ue_event::PduFromDrb{pdu});
  };
  cb.on_mrb = [this](const std::string& ue, const Bytes& pdu) {
    auto it = ues_.find(ue);
    if (it == ues_.end()) return;
    auto frame = try_decode(pdu);
    if (!frame) return;
    trace_.emit(engine_.now(), ue, TraceKind::Mgmt,
                {{"msg", std::string(frames::frame_type_name(frame->type))},
                 {"ue", ue},
                 {"ap", id()},
                 {"bearer", "MRB1"},
                 {"dir", "dl"},
                 {"ev", "rx"}});
    it->second.beacons.push_back(engine_.now());
    ue_step(ue, ue_event::BeaconReceived{engine_.now(), *frame});
  };
  cb.on_ul_srb = [this](const std::string& ue, const Bytes& pdu) {
    enb_step(enb_event::PduFromSrb{
        ue, pdu, stack_.declared_class(ue).value_or(lte::ServiceClass::Background)});
  };
  cb.on_drb_active = [this](const std::string& ue, int drb) {
    enb_step(enb_event::ReconfigComplete{ue});
    auto it = ues_.find(ue);
    if (it == ues_.end()) return;
    auto embedded = std::move(it->second.offered_probe_response);
    it->second.offered_probe_response.reset();
    ue_step(ue, ue_event::DrbActivated{drb, std::move(embedded)});
  };
  cb.on_ul_drb = [this](const std::string& ue, int, const Bytes& pdu) {
    if (!ctx_.ues.count(ue)) {
      auto frame = try_decode(pdu);
      trace_.emit(engine_.now(), id(), TraceKind::Drop,
                  {{"reason", "not-associated"}, {"ue", ue}, {"ap", id()}, {"dir", "ul"}});
      if (frame && frame->type == FrameType::Data) dropped(ue, frame->body);
      return;
    }
    enb_step(enb_event::PduFromDrb{ue, pdu});
  };
  cb.on_beacon_slot = [this](SimTime) { enb_step(enb_event::BeaconTick{}); };
  cb.on_drop = [this](const std::string& ue, lte::BearerId, Direction, const Bytes& pdu) {
    auto frame = try_decode(pdu);
    if (frame && frame->type == FrameType::Data) dropped(ue, frame->body);
  };
  return cb;
}

void EmulatedAp::start() {
  if (config_.mrb_enabled) stack_.setup_mrb(config_.mcch_period, config_.beacon_period);
}

void EmulatedAp::power_on(const std::string& ue, MacAddress mac, lte::ServiceClass service) {
  if (ues_.count(ue)) return;
  UeSide& side = ues_[ue];
  UeEmuState init;
  init.mac = mac;
  init.service = service;
  init.beacon_timeout = 3 * config_.beacon_period;
  auto step = ue_emu_start(init);
  side.state = step.state;
  for (const auto& a : step.actions) run_ue_action(ue, a);
}

EmulatedAp::UeSide& EmulatedAp::ue_side(const std::string& ue) {
  auto it = ues_.find(ue);
  if (it == ues_.end()) fail(Errc::UnknownUe, ue + " is not powered on under " + id());
  return it->second;
}

std::optional<UePhase> EmulatedAp::ue_phase(const std::string& ue) const {
  auto it = ues_.find(ue);
  if (it == ues_.end()) return std::nullopt;
  return it->second.state.phase;
}

std::optional<Mode> EmulatedAp::ue_mode(const std::string& ue) const {
  auto it = ues_.find(ue);
  if (it == ues_.end()) return std::nullopt;
  return it->second.mode;
}

const std::vector<SimTime>& EmulatedAp::beacon_log(const std::string& ue) const {
  static const std::vector<SimTime> none;
  auto it = ues_.find(ue);
  return it == ues_.end() ? none : it->second.beacons;
}

void EmulatedAp::ue_step(const std::string& ue, const UeEvent& event) {
  auto it = ues_.find(ue);
  if (it == ues_.end()) return;
  auto step = ue_emu_step(it->second.state, event);
  it->second.state = std::move(step.state);
  for (const auto& a : step.actions) run_ue_action(ue, a);
}

void EmulatedAp::enb_step(const EnbEvent& event) {
  auto step = enb_emu_step(ctx_, event);
  ctx_ = std::move(step.ctx);
  for (const auto& a : step.actions) run_enb_action(a);
}

void EmulatedAp::trace_frame(const std::string& sender, const std::string& ue,
                             const std::string& bearer, Direction dir, const Bytes& pdu) {
  auto type = frames::peek_type(pdu);
  const bool data = type == FrameType::Data;
  TraceFields f{{"msg", type ? std::string(frames::frame_type_name(*type)) : "opaque"},
                {"ue", ue},
                {"ap", id()},
                {"bearer", bearer},
                {"dir", dir == Direction::Uplink ? "ul" : "dl"}};
  if (data) f.emplace_back("len", std::to_string(pdu.size() - frames::kHeaderLen));
  f.emplace_back("ev", "tx");
  trace_.emit(engine_.now(), sender, data ? TraceKind::Data : TraceKind::Mgmt, std::move(f));
}

void EmulatedAp::notice(const std::string& node, const Notify& n) {
  TraceFields f{{"event", "notice"}, {"notice", std::string(notice_name(n.notice))}, {"ap", id()}};
  if (!n.detail.empty()) f.emplace_back("detail", n.detail);
  trace_.emit(engine_.now(), node, TraceKind::Ctrl, std::move(f));
}

void EmulatedAp::dropped(const std::string& ue, const Bytes& sdu) {
  if (hooks_.on_drop) hooks_.on_drop(id(), ue, sdu);
}

void EmulatedAp::connect(const std::string& ue) {
  UeSide& side = ue_side(ue);
  side.connect_deferred = false;
  try {
    stack_.rrc_connect(ue, side.state.service);
  } catch (const Error& e) {
    trace_.emit(engine_.now(), ue, TraceKind::Ctrl,
                {{"event", "error"}, {"ap", id()}, {"detail", e.what()}});
  }
}

void EmulatedAp::run_ue_action(const std::string& ue, const EmuAction& action) {
  UeSide& side = ue_side(ue);
  std::visit(
      overloaded{
          [&](const RequestRrcConnect&) {
            if (side.admitted)
              connect(ue);
            else
              side.connect_deferred = true;
          },
          [&](const SendOnSrb& a) {
            trace_frame(ue, ue, "SRB1", Direction::Uplink, a.pdu);
            stack_.send_srb(ue, Direction::Uplink, a.pdu);
          },
          [&](const SendOnDrb& a) {
            trace_frame(ue, ue, "DRB" + std::to_string(a.drb), Direction::Uplink, a.pdu);
            try {
              stack_.send_drb(ue, a.drb, Direction::Uplink, a.pdu);
            } catch (const Error&) {
              auto frame = try_decode(a.pdu);
              trace_.emit(engine_.now(), ue, TraceKind::Drop,
                          {{"reason", "bearer-inactive"}, {"ue", ue}, {"ap", id()}, {"dir", "ul"}});
              if (frame && frame->type == FrameType::Data) dropped(ue, frame->body);
            }
          },
          [&](const RequestReconfigure&) {},
          [&](const DeliverUp& a) {
            load_.add(engine_.now(), a.sdu.size());
            if (hooks_.on_downlink) hooks_.on_downlink(id(), ue, a.sdu);
          },
          [&](const EnterMode& a) {
            side.mode = a.mode;
            trace_.emit(engine_.now(), ue, TraceKind::Ctrl,
                        {{"event", "mode"}, {"mode", std::string(mode_name(a.mode))}, {"ap", id()}});
          },
          [&](const StartTimer& a) {
            const auto gen = ++side.timer_gen;
            engine_.schedule_in(a.duration, ue, [this, ue, gen] {
              auto it = ues_.find(ue);
              if (it == ues_.end() || it->second.timer_gen != gen) return;
              ue_step(ue, ue_event::BeaconTimeout{});
            });
          },
          [&](const CancelTimer&) { ++side.timer_gen; },
          [&](const BroadcastOnMrb&) {},
          [&](const Notify& n) {
            switch (n.notice) {
              case Notice::Associated: {
                auto waiters = std::move(side.waiters);
                side.waiters.clear();
                if (hooks_.on_associated) hooks_.on_associated(id(), ue);
                for (auto& w : waiters) w();
                break;
              }
              case Notice::Sleeping: enb_step(enb_event::UeSleeping{ue}); break;
              case Notice::Awake: enb_step(enb_event::UeAwake{ue}); break;
              case Notice::Deauthenticated:
                side.admitted = false;
                side.connect_deferred = false;
                stack_.release(ue);
                if (ctx_.ues.count(ue)) enb_step(enb_event::UeReleased{ue});
                if (hooks_.on_deauthenticated) hooks_.on_deauthenticated(id(), ue);
                break;
              case Notice::UnexpectedEvent: notice(ue, n); break;
              case Notice::Released: break;
            }
          },
      },
      action);
}

void EmulatedAp::run_enb_action(const EnbAction& a) {
  const std::string& ue = a.ue;
  std::visit(
      overloaded{
          [&](const RequestReconfigure& r) {
            trace_frame(id(), ue, "SRB1", Direction::Downlink, r.pdu);
            stack_.reconfigure(ue, r.config, r.pdu);
          },
          [&](const SendOnDrb& s) {
            trace_frame(id(), ue, "DRB" + std::to_string(s.drb), Direction::Downlink, s.pdu);
            try {
              stack_.send_drb(ue, s.drb, Direction::Downlink, s.pdu);
            } catch (const Error&) {
              auto frame = try_decode(s.pdu);
              trace_.emit(engine_.now(), id(), TraceKind::Drop,
                          {{"reason", "bearer-inactive"}, {"ue", ue}, {"ap", id()}, {"dir", "dl"}});
              if (frame && frame->type == FrameType::Data) dropped(ue, frame->body);
            }
          },
          [&](const BroadcastOnMrb& b) {
            auto frame = try_decode(b.pdu);
            std::string tim = "-";
            if (frame) tim = tim_label(frames::decode_beacon_body(frame->body).tim);
            trace_.emit(engine_.now(), id(), TraceKind::Mgmt,
                        {{"msg", "Beacon"}, {"ap", id()}, {"bearer", "MRB1"}, {"dir", "dl"},
                         {"tim", tim}, {"ev", "tx"}});
            stack_.broadcast_on_mrb(b.pdu);
          },
          [&](const DeliverUp& d) {
            load_.add(engine_.now(), d.sdu.size());
            if (hooks_.on_uplink) hooks_.on_uplink(id(), ue, d.sdu);
          },
          [&](const Notify& n) {
            if (n.notice == Notice::Released) {
              stack_.release(ue);
              auto it = ues_.find(ue);
              if (it != ues_.end()) {
                UeEmuState fresh;
                fresh.mac = it->second.state.mac;
                fresh.service = it->second.state.service;
                fresh.seq = it->second.state.seq;
                fresh.beacon_timeout = it->second.state.beacon_timeout;
                auto step = ue_emu_start(fresh);
                it->second.state = step.state;
                it->second.offered_probe_response.reset();
                for (const auto& act : step.actions) run_ue_action(ue, act);
              }
            } else if (n.notice == Notice::UnexpectedEvent) {
              notice(id(), n);
            }
          },
          [&](const auto&) {},
      },
      a.action);
}

wlan::ApDescriptor EmulatedAp::report() const {
  wlan::ApDescriptor d;
  d.ap_id = id();
  d.bssid = config_.bssid;
  d.ssid = config_.ssid;
  d.kind = wlan::ApKind::LteEmulated;
  d.capacity_bps = config_.capacity_bps;
  d.current_load_bps = std::min(load_.rate_bps(engine_.now()), config_.capacity_bps);
  d.station_count = static_cast<int>(stations().size());
  d.power_state = power_;
  d.reported_at = engine_.now();
  return d;
}

std::vector<std::string> EmulatedAp::stations() const {
  std::vector<std::string> out;
  for (const auto& [ue, e] : ctx_.ues)
    if (e.phase == EnbUePhase::Associated) out.push_back(ue);
  return out;
}

bool EmulatedAp::is_associated(const std::string& ue) const {
  auto e = ctx_.ues.find(ue);
  auto u = ues_.find(ue);
  return e != ctx_.ues.end() && e->second.phase == EnbUePhase::Associated && u != ues_.end() &&
         (u->second.state.phase == UePhase::Associated || u->second.state.phase == UePhase::Sleeping);
}

void EmulatedAp::associate(const std::string& ue, std::function<void()> done) {
  if (power_ == wlan::PowerState::Asleep) fail(Errc::ApAsleep, id() + " is asleep");
  if (hooks_.in_range && !hooks_.in_range(ue)) fail(Errc::Unreachable, ue + " is out of range of " + id());
  UeSide& side = ue_side(ue);
  if (is_associated(ue)) {
    if (done) engine_.schedule_in(0, ue, std::move(done));
    return;
  }
  if (!side.admitted && ctx_.associated_count() >= static_cast<std::size_t>(frames::kMaxAssocId))
    fail(Errc::AssocIdExhausted, id() + " has no free association id");
  side.admitted = true;
  if (done) side.waiters.push_back(std::move(done));
  if (side.connect_deferred) connect(ue);
}

void EmulatedAp::send_uplink(const std::string& ue, Bytes sdu) {
  if (!is_associated(ue)) fail(Errc::NotAssociated, ue + " is not associated with " + id());
  if (sdu.size() > frames::kMaxBody) fail(Errc::TooLarge, "sdu exceeds 2304 bytes");
  if (ues_.at(ue).state.phase == UePhase::Sleeping) ue_step(ue, ue_event::WakeRequest{});
  ue_step(ue, ue_event::AppData{std::move(sdu)});
}

void EmulatedAp::deliver_downlink(const std::string& ue, Bytes sdu) {
  if (!is_associated(ue)) fail(Errc::NotAssociated, ue + " is not associated with " + id());
  if (sdu.size() > frames::kMaxBody) fail(Errc::TooLarge, "sdu exceeds 2304 bytes");
  enb_step(enb_event::DownlinkData{ue, std::move(sdu)});
}

void EmulatedAp::deauthenticate(const std::string& ue) {
  auto it = ues_.find(ue);
  if (it != ues_.end()) {
    it->second.admitted = false;
    it->second.connect_deferred = false;
    it->second.waiters.clear();
  }
  if (ctx_.ues.count(ue)) {
    enb_step(enb_event::Deauthenticate{ue});
    return;
  }
  if (stack_.bearer_state(ue, lte::BearerId::srb(1)))
    run_enb_action(EnbAction{ue, Notify{Notice::Released, {}}});
}

void EmulatedAp::ue_sleep(const std::string& ue) { ue_step(ue, ue_event::SleepRequest{}); }

void EmulatedAp::ue_wake(const std::string& ue) { ue_step(ue, ue_event::WakeRequest{}); }

void EmulatedAp::set_power(wlan::PowerState state) {
  if (state == power_) return;
  if (state == wlan::PowerState::Asleep) {
    std::vector<std::string> all;
    for (const auto& [ue, _] : ues_) all.push_back(ue);
    for (const auto& ue : all) deauthenticate(ue);
    stack_.set_beaconing(false);
  } else {
    stack_.set_beaconing(true);
  }
  power_ = state;
  trace_.emit(engine_.now(), id(), TraceKind::Ctrl,
              {{"event", "power"}, {"state", std::string(wlan::power_state_name(state))}});
}

}  // namespace f5g::emu
