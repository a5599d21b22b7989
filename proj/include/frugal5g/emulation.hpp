#pragma once

// Wi-Fi emulation layer over LTE. Both the UE-side and eNB-side layers are
// pure state machines: step(state, event) returns the next state plus the
// actions the caller must execute. They own no timers, sockets or clocks.
//
// UE transition table (anything else is UnexpectedEvent, state unchanged):
//
//   Scanning      + BeaconReceived          -> RrcConnecting  CancelTimer, EnterMode(Emulation), RequestRrcConnect
//   Scanning      + BeaconTimeout           -> NasFallback    EnterMode(StandardNas)
//   RrcConnecting + RrcConnected            -> Probing        SendOnSrb(ProbeRequest)
//   Probing       + DrbActivated(ProbeResp) -> Associating    SendOnDrb(AssociationRequest)
//   Probing       + PduFromSrb(ProbeResp)   -> AwaitDrb
//   AwaitDrb      + DrbActivated            -> Associating    SendOnDrb(AssociationRequest)
//   Associating   + PduFromDrb(AssocResp 0) -> Associated     Notify(Associated)
//   Associated    + AppData                 -> Associated     SendOnDrb(Data)
//   Associated    + PduFromDrb(Data)        -> Associated     DeliverUp
//   Associated    + SleepRequest            -> Sleeping       Notify(Sleeping)
//   Sleeping      + BeaconReceived(own TIM) -> Associated     Notify(Awake)
//   Sleeping      + WakeRequest             -> Associated     Notify(Awake)
//   Sleeping      + PduFromDrb(Data)        -> Sleeping       DeliverUp
//   Associated/Sleeping + PduFromDrb(Deauth)-> Scanning       Notify(Deauthenticated), StartTimer
//   any (not NasFallback) + BeaconReceived  -> same phase     (records last_beacon_at)
//   NasFallback   + any                     -> NasFallback    no actions
//
// docs/emulation_state_machines.md carries the same table plus the eNB side.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "frugal5g/engine.hpp"
#include "frugal5g/frames.hpp"
#include "frugal5g/lte_stack.hpp"

namespace f5g::emu {

using frames::Bytes;
using frames::MacAddress;
using frames::MacFrame;

inline constexpr std::string_view kBeaconTimer = "beacon-loss";

enum class UePhase {
  Scanning,
  RrcConnecting,
  Probing,
  AwaitDrb,
  Associating,
  Associated,
  Sleeping,
  NasFallback,
};

std::string_view ue_phase_name(UePhase p);

enum class Mode { Emulation, StandardNas };
std::string_view mode_name(Mode m);

// ---- actions ---------------------------------------------------------------

struct RequestRrcConnect {
  lte::ServiceClass cause;
};
struct SendOnSrb {
  Bytes pdu;
};
struct SendOnDrb {
  int drb;
  Bytes pdu;
};
struct RequestReconfigure {
  lte::DrbConfig config;
  Bytes pdu;
};
struct DeliverUp {
  Bytes sdu;
};
struct EnterMode {
  Mode mode;
};
struct StartTimer {
  std::string name;
  SimTime duration;
};
struct CancelTimer {
  std::string name;
};
struct BroadcastOnMrb {
  Bytes pdu;
};

enum class Notice { UnexpectedEvent, Associated, Sleeping, Awake, Deauthenticated, Released };
std::string_view notice_name(Notice n);

struct Notify {
  Notice notice;
  std::string detail;
};

using EmuAction = std::variant<RequestRrcConnect, SendOnSrb, SendOnDrb, RequestReconfigure,
                               DeliverUp, EnterMode, StartTimer, CancelTimer, BroadcastOnMrb,
                               Notify>;

std::string describe(const EmuAction& action);

// ---- UE side ---------------------------------------------------------------

struct UeEmuState {
  UePhase phase = UePhase::Scanning;
  std::optional<int> assoc_id;
  std::optional<int> drb_id;
  std::optional<SimTime> last_beacon_at;

  // Identity and what was learned from the serving network's beacons.
  MacAddress mac;
  MacAddress bssid;
  std::string ssid;
  std::uint16_t seq = 0;
  lte::ServiceClass service = lte::ServiceClass::Background;
  SimTime beacon_timeout = 3 * us(102'400);

  friend bool operator==(const UeEmuState&, const UeEmuState&) = default;
};

namespace ue_event {
struct BeaconReceived {
  SimTime at;
  MacFrame beacon;
};
struct BeaconTimeout {};
struct RrcConnected {};
struct PduFromSrb {
  Bytes pdu;
};
struct DrbActivated {
  int drb;
  std::optional<Bytes> embedded_pdu;
};
struct PduFromDrb {
  Bytes pdu;
};
struct AppData {
  Bytes sdu;
};
struct SleepRequest {};
struct WakeRequest {};
}  // namespace ue_event

using UeEvent = std::variant<ue_event::BeaconReceived, ue_event::BeaconTimeout,
                             ue_event::RrcConnected, ue_event::PduFromSrb,
                             ue_event::DrbActivated, ue_event::PduFromDrb, ue_event::AppData,
                             ue_event::SleepRequest, ue_event::WakeRequest>;

std::string_view ue_event_name(const UeEvent& ev);

struct UeStep {
  UeEmuState state;
  std::vector<EmuAction> actions;
};

// Power-on: Scanning with the beacon-loss timer armed.
UeStep ue_emu_start(UeEmuState initial);
UeStep ue_emu_step(const UeEmuState& state, const UeEvent& event);

// ---- eNB side --------------------------------------------------------------

enum class EnbUePhase { ProbeSeen, DrbOffered, Associated };
std::string_view enb_ue_phase_name(EnbUePhase p);

struct EnbUeEntry {
  EnbUePhase phase = EnbUePhase::ProbeSeen;
  MacAddress mac;
  int drb_id = 0;
  int qci = 9;
  bool drb_active = false;
  std::optional<int> assoc_id;
  bool sleeping = false;
  std::deque<Bytes> pending;  // downlink SDUs held while the UE sleeps

  friend bool operator==(const EnbUeEntry&, const EnbUeEntry&) = default;
};

struct EnbEmuContext {
  MacAddress bssid;
  std::string ssid = "frugal5g";
  std::uint16_t beacon_interval_tu = 100;
  std::uint16_t seq = 0;
  int next_assoc_id = 1;
  std::map<std::string, EnbUeEntry> ues;

  std::size_t associated_count() const;
  friend bool operator==(const EnbEmuContext&, const EnbEmuContext&) = default;
};

namespace enb_event {
struct PduFromSrb {
  std::string ue;
  Bytes pdu;
  lte::ServiceClass declared = lte::ServiceClass::Background;
};
struct ReconfigComplete {
  std::string ue;
};
struct PduFromDrb {
  std::string ue;
  Bytes pdu;
};
struct DownlinkData {
  std::string ue;
  Bytes sdu;
};
struct BeaconTick {};
struct UeSleeping {
  std::string ue;
};
struct UeAwake {
  std::string ue;
};
struct Deauthenticate {
  std::string ue;
};
struct UeReleased {
  std::string ue;
};
}  // namespace enb_event

using EnbEvent = std::variant<enb_event::PduFromSrb, enb_event::ReconfigComplete,
                              enb_event::PduFromDrb, enb_event::DownlinkData,
                              enb_event::BeaconTick, enb_event::UeSleeping, enb_event::UeAwake,
                              enb_event::Deauthenticate, enb_event::UeReleased>;

std::string_view enb_event_name(const EnbEvent& ev);

// An action addressed to one UE's bearers; `ue` is empty for broadcasts.
struct EnbAction {
  std::string ue;
  EmuAction action;
};

struct EnbStep {
  EnbEmuContext ctx;
  std::vector<EnbAction> actions;
};

// Throws Error(UnknownUe) for events about a UE with no context entry and
// Error(AssocIdExhausted) for a ProbeRequest when all 255 ids are in use.
EnbStep enb_emu_step(const EnbEmuContext& ctx, const EnbEvent& event);

// ---- helpers ---------------------------------------------------------------

// Throws Error(TooLarge) above 2304 bytes.
MacFrame encapsulate(const Bytes& sdu, const MacAddress& src, const MacAddress& dst,
                     const MacAddress& bssid, std::uint16_t seq);
// Throws Error(NotData) for anything but a Data frame.
Bytes decapsulate(const MacFrame& frame);

// Emulation iff some beacon falls in the closed window [now - window, now].
Mode detect_mode(const std::vector<SimTime>& beacon_log, SimTime now, SimTime window);

// TIM for the next beacon: exactly the association ids of `ues`. Every listed
// UE must be Associated and sleeping, else Error(NotAssociated).
frames::Tim page_via_tim(const EnbEmuContext& ctx, const std::vector<std::string>& ues);

}  // namespace f5g::emu
