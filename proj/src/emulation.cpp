#include "frugal5g/emulation.hpp"

#include <algorithm>

#include "frugal5g/error.hpp"

namespace f5g::emu {

using frames::FrameType;

std::string_view ue_phase_name(UePhase p) {
  switch (p) {
    case UePhase::Scanning: return "Scanning";
    case UePhase::RrcConnecting: return "RrcConnecting";
    case UePhase::Probing: return "Probing";
    case UePhase::AwaitDrb: return "AwaitDrb";
    case UePhase::Associating: return "Associating";
    case UePhase::Associated: return "Associated";
    case UePhase::Sleeping: return "Sleeping";
    case UePhase::NasFallback: return "NasFallback";
  }
  return "?";
}

std::string_view mode_name(Mode m) { return m == Mode::Emulation ? "emulation" : "standard-nas"; }

std::string_view notice_name(Notice n) {
  switch (n) {
    case Notice::UnexpectedEvent: return "UnexpectedEvent";
    case Notice::Associated: return "Associated";
    case Notice::Sleeping: return "Sleeping";
    case Notice::Awake: return "Awake";
    case Notice::Deauthenticated: return "Deauthenticated";
    case Notice::Released: return "Released";
  }
  return "?";
}

std::string_view enb_ue_phase_name(EnbUePhase p) {
  switch (p) {
    case EnbUePhase::ProbeSeen: return "ProbeSeen";
    case EnbUePhase::DrbOffered: return "DrbOffered";
    case EnbUePhase::Associated: return "Associated";
  }
  return "?";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string frame_label(const Bytes& pdu) {
  auto t = frames::peek_type(pdu);
  return t ? std::string(frames::frame_type_name(*t)) : std::string("opaque");
}

std::optional<MacFrame> try_decode(const Bytes& pdu) {
  try {
    return frames::decode_frame(pdu);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<frames::MgmtBody> try_mgmt(const MacFrame& f) {
  try {
    return frames::decode_mgmt_body(f.body);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::uint16_t take_seq(std::uint16_t& seq) {
  const auto s = seq;
  seq = static_cast<std::uint16_t>((seq + 1) % frames::kSeqModulo);
  return s;
}

Bytes mgmt_frame(FrameType type, const MacAddress& dst, const MacAddress& src,
                 const MacAddress& bssid, std::uint16_t seq, const frames::MgmtBody& body) {
  MacFrame f{type, dst, src, bssid, seq, frames::encode_mgmt_body(body)};
  return frames::encode_frame(f);
}

UeStep unexpected(const UeEmuState& s, const UeEvent& ev, std::string why = {}) {
  std::string detail = std::string(ue_event_name(ev)) + " in " + std::string(ue_phase_name(s.phase));
  if (!why.empty()) detail += ": " + why;
  return {s, {Notify{Notice::UnexpectedEvent, std::move(detail)}}};
}

EnbStep enb_unexpected(const EnbEmuContext& ctx, const std::string& ue, const EnbEvent& ev,
                       std::string why) {
  return {ctx, {EnbAction{ue, Notify{Notice::UnexpectedEvent,
                                     std::string(enb_event_name(ev)) + ": " + std::move(why)}}}};
}

Bytes association_request(UeEmuState& s) {
  return mgmt_frame(FrameType::AssociationRequest, s.bssid, s.mac, s.bssid, take_seq(s.seq),
                    frames::MgmtBody{s.ssid, 0, std::nullopt});
}

void back_to_scanning(UeEmuState& s, std::vector<EmuAction>& actions, std::string why) {
  s.phase = UePhase::Scanning;
  s.assoc_id.reset();
  s.drb_id.reset();
  actions.push_back(Notify{Notice::Deauthenticated, std::move(why)});
  actions.push_back(StartTimer{std::string(kBeaconTimer), s.beacon_timeout});
}

}  // namespace

std::string describe(const EmuAction& action) {
  return std::visit(
      overloaded{
          [](const RequestRrcConnect& a) {
            return "RequestRrcConnect(" + std::string(lte::service_class_name(a.cause)) + ")";
          },
          [](const SendOnSrb& a) { return "SendOnSrb(" + frame_label(a.pdu) + ")"; },
          [](const SendOnDrb& a) {
            return "SendOnDrb(" + std::to_string(a.drb) + "," + frame_label(a.pdu) + ")";
          },
          [](const RequestReconfigure& a) {
            return "RequestReconfigure(drb=" + std::to_string(a.config.drb_id) +
                   ",qci=" + std::to_string(a.config.qci) + "," + frame_label(a.pdu) + ")";
          },
          [](const DeliverUp& a) { return "DeliverUp(" + std::to_string(a.sdu.size()) + ")"; },
          [](const EnterMode& a) { return "EnterMode(" + std::string(mode_name(a.mode)) + ")"; },
          [](const StartTimer& a) { return "StartTimer(" + a.name + ")"; },
          [](const CancelTimer& a) { return "CancelTimer(" + a.name + ")"; },
          [](const BroadcastOnMrb& a) { return "BroadcastOnMrb(" + frame_label(a.pdu) + ")"; },
          [](const Notify& a) { return "Notify(" + std::string(notice_name(a.notice)) + ")"; },
      },
      action);
}

std::string_view ue_event_name(const UeEvent& ev) {
  return std::visit(overloaded{
                        [](const ue_event::BeaconReceived&) { return "BeaconReceived"; },
                        [](const ue_event::BeaconTimeout&) { return "BeaconTimeout"; },
                        [](const ue_event::RrcConnected&) { return "RrcConnected"; },
                        [](const ue_event::PduFromSrb&) { return "PduFromSrb"; },
                        [](const ue_event::DrbActivated&) { return "DrbActivated"; },
                        [](const ue_event::PduFromDrb&) { return "PduFromDrb"; },
                        [](const ue_event::AppData&) { return "AppData"; },
                        [](const ue_event::SleepRequest&) { return "SleepRequest"; },
                        [](const ue_event::WakeRequest&) { return "WakeRequest"; },
                    },
                    ev);
}

std::string_view enb_event_name(const EnbEvent& ev) {
  return std::visit(overloaded{
                        [](const enb_event::PduFromSrb&) { return "PduFromSrb"; },
                        [](const enb_event::ReconfigComplete&) { return "ReconfigComplete"; },
                        [](const enb_event::PduFromDrb&) { return "PduFromDrb"; },
                        [](const enb_event::DownlinkData&) { return "DownlinkData"; },
                        [](const enb_event::BeaconTick&) { return "BeaconTick"; },
                        [](const enb_event::UeSleeping&) { return "UeSleeping"; },
                        [](const enb_event::UeAwake&) { return "UeAwake"; },
                        [](const enb_event::Deauthenticate&) { return "Deauthenticate"; },
                        [](const enb_event::UeReleased&) { return "UeReleased"; },
                    },
                    ev);
}

UeStep ue_emu_start(UeEmuState initial) {
  initial.phase = UePhase::Scanning;
  SimTime timeout = initial.beacon_timeout;
  return {std::move(initial), {StartTimer{std::string(kBeaconTimer), timeout}}};
}

UeStep ue_emu_step(const UeEmuState& state, const UeEvent& event) {
  if (state.phase == UePhase::NasFallback) return {state, {}};

  UeEmuState s = state;
  std::vector<EmuAction> out;

  if (auto* ev = std::get_if<ue_event::BeaconReceived>(&event)) {
    if (ev->beacon.type != FrameType::Beacon) return unexpected(state, event, "not a beacon");
    frames::BeaconBody body;
    try {
      body = frames::decode_beacon_body(ev->beacon.body);
    } catch (const Error& e) {
      return unexpected(state, event, e.what());
    }
    s.last_beacon_at = ev->at;
    if (s.phase == UePhase::Scanning) {
      s.bssid = ev->beacon.bssid;
      s.ssid = body.ssid;
      s.phase = UePhase::RrcConnecting;
      out.push_back(CancelTimer{std::string(kBeaconTimer)});
      out.push_back(EnterMode{Mode::Emulation});
      out.push_back(RequestRrcConnect{s.service});
    } else if (s.phase == UePhase::Sleeping && s.assoc_id && body.tim.test(*s.assoc_id)) {
      s.phase = UePhase::Associated;
      out.push_back(Notify{Notice::Awake, "tim"});
    }
    return {std::move(s), std::move(out)};
  }

  if (std::holds_alternative<ue_event::BeaconTimeout>(event)) {
    if (s.phase != UePhase::Scanning) return unexpected(state, event);
    s.phase = UePhase::NasFallback;
    out.push_back(EnterMode{Mode::StandardNas});
    return {std::move(s), std::move(out)};
  }

  if (std::holds_alternative<ue_event::RrcConnected>(event)) {
    if (s.phase != UePhase::RrcConnecting) return unexpected(state, event);
    s.phase = UePhase::Probing;
    out.push_back(SendOnSrb{mgmt_frame(FrameType::ProbeRequest, MacAddress::broadcast(), s.mac,
                                       MacAddress::broadcast(), take_seq(s.seq),
                                       frames::MgmtBody{s.ssid, 0, std::nullopt})});
    return {std::move(s), std::move(out)};
  }

  if (auto* ev = std::get_if<ue_event::PduFromSrb>(&event)) {
    auto f = try_decode(ev->pdu);
    if (s.phase != UePhase::Probing || !f || f->type != FrameType::ProbeResponse)
      return unexpected(state, event);
    auto body = try_mgmt(*f);
    if (!body || body->status != 0) return unexpected(state, event, "probe refused");
    s.phase = UePhase::AwaitDrb;
    return {std::move(s), std::move(out)};
  }

  if (auto* ev = std::get_if<ue_event::DrbActivated>(&event)) {
    if (s.phase == UePhase::Probing) {
      if (!ev->embedded_pdu) return unexpected(state, event, "no probe response");
      auto f = try_decode(*ev->embedded_pdu);
      if (!f || f->type != FrameType::ProbeResponse) return unexpected(state, event, "no probe response");
      auto body = try_mgmt(*f);
      if (!body || body->status != 0) return unexpected(state, event, "probe refused");
    } else if (s.phase != UePhase::AwaitDrb) {
      return unexpected(state, event);
    }
    s.phase = UePhase::Associating;
    s.drb_id = ev->drb;
    out.push_back(SendOnDrb{ev->drb, association_request(s)});
    return {std::move(s), std::move(out)};
  }

  if (auto* ev = std::get_if<ue_event::PduFromDrb>(&event)) {
    auto f = try_decode(ev->pdu);
    if (!f) return unexpected(state, event, "undecodable frame");
    if (s.phase == UePhase::Associating && f->type == FrameType::AssociationResponse) {
      auto body = try_mgmt(*f);
      if (!body) return unexpected(state, event, "bad association response");
      if (body->status != 0 || !body->aid) {
        back_to_scanning(s, out, "association refused");
        return {std::move(s), std::move(out)};
      }
      s.phase = UePhase::Associated;
      s.assoc_id = *body->aid;
      out.push_back(Notify{Notice::Associated, "aid=" + std::to_string(*body->aid)});
      return {std::move(s), std::move(out)};
    }
    const bool attached = s.phase == UePhase::Associated || s.phase == UePhase::Sleeping;
    if (attached && f->type == FrameType::Data) {
      out.push_back(DeliverUp{f->body});
      return {std::move(s), std::move(out)};
    }
    if (attached && f->type == FrameType::Deauthentication) {
      back_to_scanning(s, out, "deauthenticated by AP");
      return {std::move(s), std::move(out)};
    }
    return unexpected(state, event, std::string(frames::frame_type_name(f->type)));
  }

  if (auto* ev = std::get_if<ue_event::AppData>(&event)) {
    if (s.phase != UePhase::Associated) return unexpected(state, event);
    if (ev->sdu.size() > frames::kMaxBody) return unexpected(state, event, "sdu too large");
    const auto frame = encapsulate(ev->sdu, s.mac, s.bssid, s.bssid, take_seq(s.seq));
    out.push_back(SendOnDrb{*s.drb_id, frames::encode_frame(frame)});
    return {std::move(s), std::move(out)};
  }

  if (std::holds_alternative<ue_event::SleepRequest>(event)) {
    if (s.phase != UePhase::Associated) return unexpected(state, event);
    s.phase = UePhase::Sleeping;
    out.push_back(Notify{Notice::Sleeping, {}});
    return {std::move(s), std::move(out)};
  }

  if (std::holds_alternative<ue_event::WakeRequest>(event)) {
    if (s.phase != UePhase::Sleeping) return unexpected(state, event);
    s.phase = UePhase::Associated;
    out.push_back(Notify{Notice::Awake, "request"});
    return {std::move(s), std::move(out)};
  }

  return unexpected(state, event);
}

std::size_t EnbEmuContext::associated_count() const {
  return static_cast<std::size_t>(std::count_if(ues.begin(), ues.end(), [](const auto& kv) {
    return kv.second.assoc_id.has_value();
  }));
}

namespace {

int allocate_assoc_id(EnbEmuContext& ctx) {
  std::vector<bool> used(frames::kMaxAssocId + 1, false);
  for (const auto& [_, e] : ctx.ues)
    if (e.assoc_id) used[static_cast<std::size_t>(*e.assoc_id)] = true;
  int start = std::clamp(ctx.next_assoc_id, 1, frames::kMaxAssocId);
  for (int i = 0; i < frames::kMaxAssocId; ++i) {
    int aid = (start - 1 + i) % frames::kMaxAssocId + 1;
    if (!used[static_cast<std::size_t>(aid)]) {
      ctx.next_assoc_id = aid % frames::kMaxAssocId + 1;
      return aid;
    }
  }
  fail(Errc::AssocIdExhausted, "all 255 association ids are in use");
}

EnbUeEntry& known(EnbEmuContext& ctx, const std::string& ue) {
  auto it = ctx.ues.find(ue);
  if (it == ctx.ues.end()) fail(Errc::UnknownUe, ue + " has no emulation context");
  return it->second;
}

Bytes downlink_frame(EnbEmuContext& ctx, const EnbUeEntry& e, const Bytes& sdu) {
  return frames::encode_frame(encapsulate(sdu, ctx.bssid, e.mac, ctx.bssid, take_seq(ctx.seq)));
}

}  // namespace

EnbStep enb_emu_step(const EnbEmuContext& in, const EnbEvent& event) {
  EnbEmuContext ctx = in;
  std::vector<EnbAction> out;

  if (auto* ev = std::get_if<enb_event::PduFromSrb>(&event)) {
    auto f = try_decode(ev->pdu);
    if (!f || f->type != FrameType::ProbeRequest) return enb_unexpected(in, ev->ue, event, "expected ProbeRequest");
    auto existing = ctx.ues.find(ev->ue);
    if (existing != ctx.ues.end() && existing->second.phase != EnbUePhase::ProbeSeen)
      return enb_unexpected(in, ev->ue, event, "probe while " +
                                                   std::string(enb_ue_phase_name(existing->second.phase)));
    auto body = try_mgmt(*f);
    EnbUeEntry entry;
    entry.mac = f->src;
    if (!body || body->ssid != ctx.ssid) {
      entry.phase = EnbUePhase::ProbeSeen;
      ctx.ues[ev->ue] = std::move(entry);
      return {std::move(ctx), std::move(out)};
    }
    if (ctx.associated_count() >= static_cast<std::size_t>(frames::kMaxAssocId))
      fail(Errc::AssocIdExhausted, "cannot admit " + ev->ue + ": all 255 association ids are in use");
    entry.phase = EnbUePhase::DrbOffered;
    entry.drb_id = 1;
    entry.qci = lte::qci_for(ev->declared);
    const Bytes response = mgmt_frame(FrameType::ProbeResponse, entry.mac, ctx.bssid, ctx.bssid,
                                      take_seq(ctx.seq), frames::MgmtBody{ctx.ssid, 0, std::nullopt});
    out.push_back({ev->ue, RequestReconfigure{lte::DrbConfig{entry.drb_id, entry.qci}, response}});
    ctx.ues[ev->ue] = std::move(entry);
    return {std::move(ctx), std::move(out)};
  }

  if (auto* ev = std::get_if<enb_event::ReconfigComplete>(&event)) {
    auto& e = known(ctx, ev->ue);
    if (e.phase != EnbUePhase::DrbOffered || e.drb_active)
      return enb_unexpected(in, ev->ue, event, "no reconfiguration outstanding");
    e.drb_active = true;
    return {std::move(ctx), std::move(out)};
  }

  if (auto* ev = std::get_if<enb_event::PduFromDrb>(&event)) {
    auto& e = known(ctx, ev->ue);
    auto f = try_decode(ev->pdu);
    if (!f) return enb_unexpected(in, ev->ue, event, "undecodable frame");
    if (f->type == FrameType::AssociationRequest) {
      if (e.phase != EnbUePhase::DrbOffered || !e.drb_active)
        return enb_unexpected(in, ev->ue, event, "AssociationRequest before ReconfigurationComplete");
      const int aid = allocate_assoc_id(ctx);
      e.assoc_id = aid;
      e.phase = EnbUePhase::Associated;
      out.push_back({ev->ue, SendOnDrb{e.drb_id, mgmt_frame(FrameType::AssociationResponse, e.mac, ctx.bssid,
                                                            ctx.bssid, take_seq(ctx.seq),
                                                            frames::MgmtBody{ctx.ssid, 0,
                                                                             static_cast<std::uint16_t>(aid)})}});
      out.push_back({ev->ue, Notify{Notice::Associated, "aid=" + std::to_string(aid)}});
      return {std::move(ctx), std::move(out)};
    }
    if (f->type == FrameType::Data) {
      if (e.phase != EnbUePhase::Associated) return enb_unexpected(in, ev->ue, event, "Data before association");
      out.push_back({ev->ue, DeliverUp{f->body}});
      return {std::move(ctx), std::move(out)};
    }
    return enb_unexpected(in, ev->ue, event, std::string(frames::frame_type_name(f->type)));
  }

  if (auto* ev = std::get_if<enb_event::DownlinkData>(&event)) {
    auto& e = known(ctx, ev->ue);
    if (e.phase != EnbUePhase::Associated) return enb_unexpected(in, ev->ue, event, "not associated");
    if (ev->sdu.size() > frames::kMaxBody) return enb_unexpected(in, ev->ue, event, "sdu too large");
    if (e.sleeping) {
      e.pending.push_back(ev->sdu);
      return {std::move(ctx), std::move(out)};
    }
    const int drb = e.drb_id;
    out.push_back({ev->ue, SendOnDrb{drb, downlink_frame(ctx, e, ev->sdu)}});
    return {std::move(ctx), std::move(out)};
  }

  if (std::holds_alternative<enb_event::BeaconTick>(event)) {
    std::vector<std::string> paged;
    for (const auto& [ue, e] : ctx.ues)
      if (e.sleeping && !e.pending.empty()) paged.push_back(ue);
    const auto tim = page_via_tim(ctx, paged);
    const auto beacon = frames::build_beacon(ctx.ssid, ctx.beacon_interval_tu, tim, ctx.bssid, take_seq(ctx.seq));
    out.push_back({"", BroadcastOnMrb{frames::encode_frame(beacon)}});
    return {std::move(ctx), std::move(out)};
  }

  if (auto* ev = std::get_if<enb_event::UeSleeping>(&event)) {
    auto& e = known(ctx, ev->ue);
    if (e.phase != EnbUePhase::Associated) return enb_unexpected(in, ev->ue, event, "not associated");
    e.sleeping = true;
    return {std::move(ctx), std::move(out)};
  }

  if (auto* ev = std::get_if<enb_event::UeAwake>(&event)) {
    auto& e = known(ctx, ev->ue);
    if (!e.sleeping) return {std::move(ctx), std::move(out)};
    e.sleeping = false;
    while (!e.pending.empty()) {
      out.push_back({ev->ue, SendOnDrb{e.drb_id, downlink_frame(ctx, e, e.pending.front())}});
      e.pending.pop_front();
    }
    return {std::move(ctx), std::move(out)};
  }

  if (auto* ev = std::get_if<enb_event::Deauthenticate>(&event)) {
    auto& e = known(ctx, ev->ue);
    if (e.drb_active) {
      while (!e.pending.empty()) {
        out.push_back({ev->ue, SendOnDrb{e.drb_id, downlink_frame(ctx, e, e.pending.front())}});
        e.pending.pop_front();
      }
      MacFrame deauth{FrameType::Deauthentication, e.mac, ctx.bssid, ctx.bssid, take_seq(ctx.seq),
                      frames::encode_deauth_body(frames::kReasonLeaving)};
      out.push_back({ev->ue, SendOnDrb{e.drb_id, frames::encode_frame(deauth)}});
      out.push_back({ev->ue, Notify{Notice::Deauthenticated, {}}});
    } else {
      out.push_back({ev->ue, Notify{Notice::Released, {}}});
    }
    ctx.ues.erase(ev->ue);
    return {std::move(ctx), std::move(out)};
  }

  if (auto* ev = std::get_if<enb_event::UeReleased>(&event)) {
    ctx.ues.erase(ev->ue);
    return {std::move(ctx), std::move(out)};
  }

  return {std::move(ctx), std::move(out)};
}

MacFrame encapsulate(const Bytes& sdu, const MacAddress& src, const MacAddress& dst,
                     const MacAddress& bssid, std::uint16_t seq) {
  if (sdu.size() > frames::kMaxBody)
    fail(Errc::TooLarge, "sdu of " + std::to_string(sdu.size()) + " bytes exceeds 2304");
  MacFrame f{FrameType::Data, dst, src, bssid, static_cast<std::uint16_t>(seq % frames::kSeqModulo), sdu};
  frames::validate(f);
  return f;
}

Bytes decapsulate(const MacFrame& frame) {
  if (frame.type != FrameType::Data)
    fail(Errc::NotData, std::string(frames::frame_type_name(frame.type)) + " frame carries no sdu");
  return frame.body;
}

Mode detect_mode(const std::vector<SimTime>& beacon_log, SimTime now, SimTime window) {
  if (window <= 0) fail(Errc::InvariantViolation, "detection window must be > 0");
  for (SimTime t : beacon_log)
    if (t >= now - window && t <= now) return Mode::Emulation;
  return Mode::StandardNas;
}

frames::Tim page_via_tim(const EnbEmuContext& ctx, const std::vector<std::string>& ues) {
  frames::Tim tim;
  for (const auto& ue : ues) {
    auto it = ctx.ues.find(ue);
    if (it == ctx.ues.end() || it->second.phase != EnbUePhase::Associated || !it->second.assoc_id ||
        !it->second.sleeping)
      fail(Errc::NotAssociated, ue + " is not an associated sleeping station");
    tim.set(*it->second.assoc_id);
  }
  return tim;
}

}  // namespace f5g::emu
