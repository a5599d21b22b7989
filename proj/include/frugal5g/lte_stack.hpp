#pragma once

// LTE radio legs underneath the Wi-Fi emulation layer: RRC connection
// management, SRB/DRB/MRB bearers and the SIB13/MCCH schedule that brings up
// the MRB used for beacons. The eNB has no S1 or X2 side; nothing here ever
// talks to a core network.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frugal5g/engine.hpp"
#include "frugal5g/frames.hpp"
#include "frugal5g/link_model.hpp"
#include "frugal5g/trace.hpp"

namespace f5g::lte {

using frames::Bytes;

enum class ServiceClass { Voice, Interactive, Background };

std::string_view service_class_name(ServiceClass c);
std::optional<ServiceClass> parse_service_class(std::string_view name);

// voice -> 1 (conversational GBR), interactive -> 8, background -> 9.
int qci_for(ServiceClass c);
// Unknown names map to the best-effort default, 9.
int qci_for(std::string_view service_class);

enum class BearerKind { Srb, Drb, Mrb };

struct BearerId {
  BearerKind kind = BearerKind::Srb;
  int index = 1;

  static constexpr BearerId srb(int i = 1) { return {BearerKind::Srb, i}; }
  static constexpr BearerId drb(int i) { return {BearerKind::Drb, i}; }
  static constexpr BearerId mrb() { return {BearerKind::Mrb, 1}; }

  std::string label() const;  // "SRB1", "DRB3", "MRB1"
  friend auto operator<=>(const BearerId&, const BearerId&) = default;
};

enum class BearerState { Pending, Active, Released };
std::string_view bearer_state_name(BearerState s);

struct RadioBearer {
  BearerId id;
  int qci = 9;
  BearerState state = BearerState::Pending;
  std::optional<std::string> owner;  // absent for the MRB
};

enum class RrcKind {
  ConnectionRequest,
  ConnectionSetup,
  SetupComplete,
  DlInformationTransfer,
  UlInformationTransfer,
  ConnectionReconfiguration,
  ReconfigurationComplete,
  ConnectionRelease,
  Sib13,
  Mcch,
};

std::string_view rrc_kind_name(RrcKind k);

struct DrbConfig {
  int drb_id = 1;
  int qci = 9;
  friend bool operator==(const DrbConfig&, const DrbConfig&) = default;
};

struct RrcMessage {
  RrcKind kind;
  std::optional<Bytes> embedded_pdu;
  std::optional<DrbConfig> drb_config;
};

enum class Direction { Uplink, Downlink };

struct MrbSchedule {
  SimTime mcch_period = ms(100);
  SimTime beacon_period = us(102'400);
  SimTime next_mcch_at = 0;
  SimTime next_beacon_at = 0;
  std::optional<SimTime> first_mcch_at;
};

struct EnbConfig {
  std::string enb_id = "enb";
  LinkParams srb{1'000'000, ms(5)};
  LinkParams drb{10'000'000, ms(10)};
  LinkParams mrb{1'000'000, ms(5)};
};

// Hooks the stack calls into; every one is optional.
struct EnbCallbacks {
  std::function<bool(const std::string& ue)> in_range;
  std::function<std::vector<std::string>()> ues_in_range;

  // UE side.
  std::function<void(const std::string& ue)> on_connected;
  std::function<void(const std::string& ue, const Bytes& pdu)> on_dl_srb;
  std::function<void(const std::string& ue, const RrcMessage& msg)> on_reconfiguration;
  std::function<void(const std::string& ue, int drb, const Bytes& pdu)> on_dl_drb;
  std::function<void(const std::string& ue, const Bytes& pdu)> on_mrb;

  // eNB side.
  std::function<void(const std::string& ue, ServiceClass cause)> on_ue_connected;
  std::function<void(const std::string& ue, const Bytes& pdu)> on_ul_srb;
  std::function<void(const std::string& ue, int drb)> on_drb_active;
  std::function<void(const std::string& ue, int drb, const Bytes& pdu)> on_ul_drb;
  std::function<void(SimTime slot)> on_beacon_slot;

  // A PDU that the bearer queue refused. Already traced as a drop record.
  std::function<void(const std::string& ue, BearerId bearer, Direction dir, const Bytes& pdu)>
      on_drop;
};

class EnbStack {
 public:
  EnbStack(Engine& engine, Trace& trace, EnbConfig config, EnbCallbacks callbacks);

  const std::string& id() const { return config_.enb_id; }

  // Starts the ConnectionRequest / Setup / SetupComplete exchange. SRB1 goes
  // Active when SetupComplete reaches the eNB. The establishment cause
  // carries the UE's declared service class.
  BearerId rrc_connect(const std::string& ue, ServiceClass cause = ServiceClass::Background);

  void send_srb(const std::string& ue, Direction dir, Bytes pdu);

  // eNB -> UE reconfiguration adding `drb`. The UE answers with
  // ReconfigurationComplete automatically; the DRB is Pending until that
  // reaches the eNB.
  void reconfigure(const std::string& ue, DrbConfig drb, std::optional<Bytes> embedded_pdu);

  void send_drb(const std::string& ue, int drb, Direction dir, Bytes pdu);

  // Releases every bearer of the UE's connection.
  void release(const std::string& ue);

  // Emits SIB13 then MCCH now; MCCH repeats every mcch_period. The MRB is
  // Active from the first MCCH, and beacon slots fall every beacon_period
  // after it.
  const MrbSchedule& setup_mrb(SimTime mcch_period, SimTime beacon_period);
  void broadcast_on_mrb(const Bytes& pdu);
  bool mrb_active() const { return mrb_.state == BearerState::Active; }
  const MrbSchedule& mrb_schedule() const { return schedule_; }
  // Stops future beacon slots (the MCCH keeps running).
  void set_beaconing(bool on) { beaconing_ = on; }

  bool connected(const std::string& ue) const;
  std::optional<BearerState> bearer_state(const std::string& ue, BearerId bearer) const;
  std::vector<RadioBearer> bearers(const std::string& ue) const;
  std::vector<std::string> connected_ues() const;
  std::optional<ServiceClass> declared_class(const std::string& ue) const;

 private:
  struct Connection {
    ServiceClass cause = ServiceClass::Background;
    std::uint64_t epoch = 0;
    RadioBearer srb1;
    std::map<int, RadioBearer> drbs;
    std::map<std::pair<BearerId, Direction>, LinkModel> links;
  };

  Connection& require(const std::string& ue, BearerId bearer);
  LinkModel& link(Connection& c, BearerId bearer, Direction dir);
  void rrc_trace(const std::string& sender, const std::string& ue, RrcKind kind,
                 const std::string& bearer, Direction dir, const Bytes* pdu,
                 const std::optional<DrbConfig>& drb);
  // Schedules `deliver` after the link delay; false if the queue dropped it.
  bool transmit(const std::string& ue, Connection& c, BearerId bearer, Direction dir,
                const Bytes& pdu, std::function<void()> deliver);
  bool still_current(const std::string& ue, std::uint64_t epoch) const;
  void mcch_tick();
  void beacon_tick();

  Engine& engine_;
  Trace& trace_;
  EnbConfig config_;
  EnbCallbacks cb_;
  std::map<std::string, Connection> conns_;
  std::uint64_t next_epoch_ = 1;
  RadioBearer mrb_{BearerId::mrb(), 9, BearerState::Pending, std::nullopt};
  LinkModel mrb_link_;
  MrbSchedule schedule_;
  bool mrb_started_ = false;
  bool beaconing_ = true;
};

}  // namespace f5g::lte
