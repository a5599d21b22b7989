#include "frugal5g/lte_stack.hpp"

#include "frugal5g/error.hpp"

namespace f5g::lte {

std::string_view service_class_name(ServiceClass c) {
  switch (c) {
    case ServiceClass::Voice: return "voice";
    case ServiceClass::Interactive: return "interactive";
    case ServiceClass::Background: return "background";
  }
  return "background";
}

std::optional<ServiceClass> parse_service_class(std::string_view name) {
  if (name == "voice") return ServiceClass::Voice;
  if (name == "interactive") return ServiceClass::Interactive;
  if (name == "background") return ServiceClass::Background;
  return std::nullopt;
}

int qci_for(ServiceClass c) {
  switch (c) {
    case ServiceClass::Voice: return 1;
    case ServiceClass::Interactive: return 8;
    case ServiceClass::Background: return 9;
  }
  return 9;
}

int qci_for(std::string_view service_class) {
  auto c = parse_service_class(service_class);
  return c ? qci_for(*c) : 9;
}

std::string BearerId::label() const {
  switch (kind) {
    case BearerKind::Srb: return "SRB" + std::to_string(index);
    case BearerKind::Drb: return "DRB" + std::to_string(index);
    case BearerKind::Mrb: return "MRB" + std::to_string(index);
  }
  return "?";
}

std::string_view bearer_state_name(BearerState s) {
  switch (s) {
    case BearerState::Pending: return "Pending";
    case BearerState::Active: return "Active";
    case BearerState::Released: return "Released";
  }
  return "?";
}

std::string_view rrc_kind_name(RrcKind k) {
  switch (k) {
    case RrcKind::ConnectionRequest: return "ConnectionRequest";
    case RrcKind::ConnectionSetup: return "ConnectionSetup";
    case RrcKind::SetupComplete: return "SetupComplete";
    case RrcKind::DlInformationTransfer: return "DlInformationTransfer";
    case RrcKind::UlInformationTransfer: return "UlInformationTransfer";
    case RrcKind::ConnectionReconfiguration: return "ConnectionReconfiguration";
    case RrcKind::ReconfigurationComplete: return "ReconfigurationComplete";
    case RrcKind::ConnectionRelease: return "ConnectionRelease";
    case RrcKind::Sib13: return "Sib13";
    case RrcKind::Mcch: return "Mcch";
  }
  return "?";
}

namespace {

std::string_view dir_name(Direction d) { return d == Direction::Uplink ? "ul" : "dl"; }

std::string pdu_label(const Bytes& pdu) {
  auto t = frames::peek_type(pdu);
  return t ? std::string(frames::frame_type_name(*t)) : std::string("opaque");
}

}  // namespace

EnbStack::EnbStack(Engine& engine, Trace& trace, EnbConfig config, EnbCallbacks callbacks)
    : engine_(engine),
      trace_(trace),
      config_(std::move(config)),
      cb_(std::move(callbacks)),
      mrb_link_(config_.mrb) {}

void EnbStack::rrc_trace(const std::string& sender, const std::string& ue, RrcKind kind,
                         const std::string& bearer, Direction dir, const Bytes* pdu,
                         const std::optional<DrbConfig>& drb) {
  TraceFields f{{"msg", std::string(rrc_kind_name(kind))},
                {"ue", ue},
                {"bearer", bearer},
                {"dir", std::string(dir_name(dir))}};
  if (pdu) f.emplace_back("pdu", pdu_label(*pdu));
  if (drb) {
    f.emplace_back("drb", std::to_string(drb->drb_id));
    f.emplace_back("qci", std::to_string(drb->qci));
  }
  trace_.emit(engine_.now(), sender, TraceKind::Rrc, std::move(f));
}

bool EnbStack::connected(const std::string& ue) const {
  auto it = conns_.find(ue);
  return it != conns_.end() && it->second.srb1.state == BearerState::Active;
}

bool EnbStack::still_current(const std::string& ue, std::uint64_t epoch) const {
  auto it = conns_.find(ue);
  return it != conns_.end() && it->second.epoch == epoch;
}

LinkModel& EnbStack::link(Connection& c, BearerId bearer, Direction dir) {
  auto key = std::make_pair(bearer, dir);
  auto it = c.links.find(key);
  if (it == c.links.end()) {
    const LinkParams& p = bearer.kind == BearerKind::Drb ? config_.drb : config_.srb;
    it = c.links.emplace(key, LinkModel(p)).first;
  }
  return it->second;
}

bool EnbStack::transmit(const std::string& ue, Connection& c, BearerId bearer, Direction dir,
                        const Bytes& pdu, std::function<void()> deliver) {
  auto at = link(c, bearer, dir).admit(engine_.now(), pdu.size());
  const std::string& node = dir == Direction::Uplink ? ue : config_.enb_id;
  if (!at) {
    trace_.emit(engine_.now(), node, TraceKind::Drop,
                {{"reason", "queue-overflow"}, {"ue", ue}, {"bearer", bearer.label()},
                 {"dir", std::string(dir_name(dir))}});
    if (cb_.on_drop) cb_.on_drop(ue, bearer, dir, pdu);
    return false;
  }
  const auto epoch = c.epoch;
  const std::string target = dir == Direction::Uplink ? config_.enb_id : ue;
  engine_.schedule_at(*at, target, [this, ue, epoch, bearer, dir, pdu, deliver = std::move(deliver)] {
    if (!still_current(ue, epoch)) {
      trace_.emit(engine_.now(), dir == Direction::Uplink ? config_.enb_id : ue, TraceKind::Drop,
                  {{"reason", "bearer-released"}, {"ue", ue}, {"bearer", bearer.label()},
                   {"dir", std::string(dir_name(dir))}});
      if (cb_.on_drop) cb_.on_drop(ue, bearer, dir, pdu);
      return;
    }
    deliver();
  });
  return true;
}

BearerId EnbStack::rrc_connect(const std::string& ue, ServiceClass cause) {
  if (conns_.count(ue)) fail(Errc::AlreadyConnected, ue + " already has an RRC connection to " + id());
  if (cb_.in_range && !cb_.in_range(ue)) fail(Errc::Unreachable, ue + " is out of range of " + id());

  Connection& c = conns_[ue];
  c.cause = cause;
  c.epoch = next_epoch_++;
  c.srb1 = RadioBearer{BearerId::srb(1), 5, BearerState::Pending, ue};

  const auto srb0 = BearerId::srb(0);
  rrc_trace(ue, ue, RrcKind::ConnectionRequest, "SRB0", Direction::Uplink, nullptr, std::nullopt);
  transmit(ue, c, srb0, Direction::Uplink, {}, [this, ue, srb0] {
    Connection& c = conns_.at(ue);
    if (cb_.on_ue_connected) cb_.on_ue_connected(ue, c.cause);
    rrc_trace(id(), ue, RrcKind::ConnectionSetup, "SRB0", Direction::Downlink, nullptr, std::nullopt);
    transmit(ue, c, srb0, Direction::Downlink, {}, [this, ue] {
      Connection& c = conns_.at(ue);
      rrc_trace(ue, ue, RrcKind::SetupComplete, "SRB1", Direction::Uplink, nullptr, std::nullopt);
      transmit(ue, c, BearerId::srb(1), Direction::Uplink, {}, [this, ue] {
        conns_.at(ue).srb1.state = BearerState::Active;
        if (cb_.on_connected) cb_.on_connected(ue);
      });
    });
  });
  return BearerId::srb(1);
}

EnbStack::Connection& EnbStack::require(const std::string& ue, BearerId bearer) {
  auto it = conns_.find(ue);
  if (it == conns_.end()) fail(Errc::BearerNotActive, ue + " has no RRC connection");
  Connection& c = it->second;
  if (bearer.kind == BearerKind::Srb) {
    if (c.srb1.state != BearerState::Active) fail(Errc::BearerNotActive, "SRB1 of " + ue + " is not active");
  } else if (bearer.kind == BearerKind::Drb) {
    auto d = c.drbs.find(bearer.index);
    if (d == c.drbs.end() || d->second.state != BearerState::Active)
      fail(Errc::BearerNotActive, bearer.label() + " of " + ue + " is not active");
  }
  return c;
}

void EnbStack::send_srb(const std::string& ue, Direction dir, Bytes pdu) {
  Connection& c = require(ue, BearerId::srb(1));
  const bool up = dir == Direction::Uplink;
  rrc_trace(up ? ue : id(), ue, up ? RrcKind::UlInformationTransfer : RrcKind::DlInformationTransfer,
            "SRB1", dir, &pdu, std::nullopt);
  transmit(ue, c, BearerId::srb(1), dir, pdu, [this, ue, up, pdu] {
    if (up) {
      if (cb_.on_ul_srb) cb_.on_ul_srb(ue, pdu);
    } else if (cb_.on_dl_srb) {
      cb_.on_dl_srb(ue, pdu);
    }
  });
}

void EnbStack::reconfigure(const std::string& ue, DrbConfig drb, std::optional<Bytes> embedded_pdu) {
  Connection& c = require(ue, BearerId::srb(1));
  if (c.drbs.count(drb.drb_id)) fail(Errc::DuplicateDrb, "DRB" + std::to_string(drb.drb_id) + " already exists for " + ue);
  if (drb.drb_id < 1 || drb.drb_id > 32) fail(Errc::InvariantViolation, "DRB id outside 1..32");
  c.drbs[drb.drb_id] = RadioBearer{BearerId::drb(drb.drb_id), drb.qci, BearerState::Pending, ue};

  RrcMessage msg{RrcKind::ConnectionReconfiguration, std::move(embedded_pdu), drb};
  rrc_trace(id(), ue, msg.kind, "SRB1", Direction::Downlink,
            msg.embedded_pdu ? &*msg.embedded_pdu : nullptr, drb);
  const Bytes wire = msg.embedded_pdu.value_or(Bytes{});
  transmit(ue, c, BearerId::srb(1), Direction::Downlink, wire, [this, ue, msg, drb] {
    if (cb_.on_reconfiguration) cb_.on_reconfiguration(ue, msg);
    Connection& c = conns_.at(ue);
    rrc_trace(ue, ue, RrcKind::ReconfigurationComplete, "SRB1", Direction::Uplink, nullptr, std::nullopt);
    transmit(ue, c, BearerId::srb(1), Direction::Uplink, {}, [this, ue, drb] {
      Connection& c = conns_.at(ue);
      c.drbs.at(drb.drb_id).state = BearerState::Active;
      if (cb_.on_drb_active) cb_.on_drb_active(ue, drb.drb_id);
    });
  });
}

void EnbStack::send_drb(const std::string& ue, int drb, Direction dir, Bytes pdu) {
  Connection& c = require(ue, BearerId::drb(drb));
  const bool up = dir == Direction::Uplink;
  transmit(ue, c, BearerId::drb(drb), dir, pdu, [this, ue, drb, up, pdu] {
    if (up) {
      if (cb_.on_ul_drb) cb_.on_ul_drb(ue, drb, pdu);
    } else if (cb_.on_dl_drb) {
      cb_.on_dl_drb(ue, drb, pdu);
    }
  });
}

void EnbStack::release(const std::string& ue) {
  auto it = conns_.find(ue);
  if (it == conns_.end()) return;
  rrc_trace(id(), ue, RrcKind::ConnectionRelease, "SRB1", Direction::Downlink, nullptr, std::nullopt);
  conns_.erase(it);
}

const MrbSchedule& EnbStack::setup_mrb(SimTime mcch_period, SimTime beacon_period) {
  if (mcch_period <= 0 || beacon_period <= 0) fail(Errc::InvariantViolation, "MRB periods must be > 0");
  if (mrb_started_) return schedule_;
  mrb_started_ = true;
  schedule_.mcch_period = mcch_period;
  schedule_.beacon_period = beacon_period;
  schedule_.next_mcch_at = engine_.now();
  trace_.emit(engine_.now(), id(), TraceKind::Mrb,
              {{"msg", "Sib13"}, {"mcch_period_us", std::to_string(mcch_period)}});
  engine_.schedule_at(engine_.now(), id(), [this] { mcch_tick(); });
  return schedule_;
}

void EnbStack::mcch_tick() {
  trace_.emit(engine_.now(), id(), TraceKind::Mrb, {{"msg", "Mcch"}});
  if (!schedule_.first_mcch_at) {
    schedule_.first_mcch_at = engine_.now();
    mrb_.state = BearerState::Active;
    schedule_.next_beacon_at = engine_.now() + schedule_.beacon_period;
    engine_.schedule_at(schedule_.next_beacon_at, id(), [this] { beacon_tick(); });
  }
  schedule_.next_mcch_at = engine_.now() + schedule_.mcch_period;
  engine_.schedule_at(schedule_.next_mcch_at, id(), [this] { mcch_tick(); });
}

void EnbStack::beacon_tick() {
  const SimTime slot = engine_.now();
  schedule_.next_beacon_at = slot + schedule_.beacon_period;
  engine_.schedule_at(schedule_.next_beacon_at, id(), [this] { beacon_tick(); });
  if (beaconing_ && cb_.on_beacon_slot) cb_.on_beacon_slot(slot);
}

void EnbStack::broadcast_on_mrb(const Bytes& pdu) {
  if (!mrb_active()) fail(Errc::MrbNotReady, "MRB of " + id() + " is not set up");
  auto at = mrb_link_.admit(engine_.now(), pdu.size());
  if (!at) {
    trace_.emit(engine_.now(), id(), TraceKind::Drop, {{"reason", "queue-overflow"}, {"bearer", "MRB1"}});
    if (cb_.on_drop) cb_.on_drop("", BearerId::mrb(), Direction::Downlink, pdu);
    return;
  }
  std::vector<std::string> receivers;
  if (cb_.ues_in_range) receivers = cb_.ues_in_range();
  for (const auto& ue : receivers) {
    engine_.schedule_at(*at, ue, [this, ue, pdu] {
      if (cb_.on_mrb) cb_.on_mrb(ue, pdu);
    });
  }
}

std::optional<BearerState> EnbStack::bearer_state(const std::string& ue, BearerId bearer) const {
  if (bearer.kind == BearerKind::Mrb) return mrb_.state;
  auto it = conns_.find(ue);
  if (it == conns_.end()) return std::nullopt;
  if (bearer.kind == BearerKind::Srb) return it->second.srb1.state;
  auto d = it->second.drbs.find(bearer.index);
  if (d == it->second.drbs.end()) return std::nullopt;
  return d->second.state;
}

std::vector<RadioBearer> EnbStack::bearers(const std::string& ue) const {
  std::vector<RadioBearer> out;
  auto it = conns_.find(ue);
  if (it == conns_.end()) return out;
  out.push_back(it->second.srb1);
  for (const auto& [_, b] : it->second.drbs) out.push_back(b);
  return out;
}

std::vector<std::string> EnbStack::connected_ues() const {
  std::vector<std::string> out;
  for (const auto& [ue, c] : conns_)
    if (c.srb1.state == BearerState::Active) out.push_back(ue);
  return out;
}

std::optional<ServiceClass> EnbStack::declared_class(const std::string& ue) const {
  auto it = conns_.find(ue);
  if (it == conns_.end()) return std::nullopt;
  return it->second.cause;
}

}  // namespace f5g::lte
