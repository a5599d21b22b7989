#include "frugal5g/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "frugal5g/frames.hpp"
#include "frugal5g/lte_stack.hpp"

namespace f5g::analysis {

namespace {

std::string entry(const TraceRecord& r) {
  std::string s = r.get("msg");
  if (r.has("pdu")) s += "[" + r.get("pdu") + "]";
  s += "/" + r.get("bearer") + " " + r.get("dir");
  if (r.has("drb")) s += " drb=" + r.get("drb") + " qci=" + r.get("qci");
  return s;
}

bool involves(const TraceRecord& r, const std::string& ue) { return r.node == ue || r.get("ue") == ue; }

std::string normalize(const std::string& s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

const std::set<std::string>& denied() {
  static const std::set<std::string> names = [] {
    std::set<std::string> out;
    for (const char* n : {
             // NAS mobility and session management
             "AttachRequest", "AttachAccept", "AttachComplete", "AttachReject", "DetachRequest", "DetachAccept",
             "IdentityRequest", "IdentityResponse", "AuthenticationRequest", "AuthenticationResponse",
             "AuthenticationReject", "AuthenticationFailure", "SecurityModeCommand", "SecurityModeComplete",
             "SecurityModeReject", "TrackingAreaUpdateRequest", "TrackingAreaUpdateAccept",
             "TrackingAreaUpdateComplete", "LocationUpdateRequest", "LocationUpdateAccept", "ServiceRequest",
             "RegistrationRequest", "RegistrationAccept", "RegistrationComplete", "PdnConnectivityRequest",
             "PduSessionEstablishmentRequest", "EsmInformationRequest", "GutiReallocationCommand",
             // S1
             "S1SetupRequest", "S1SetupResponse", "InitialUeMessage", "UplinkNasTransport",
             "DownlinkNasTransport", "InitialContextSetupRequest", "InitialContextSetupResponse",
             "UeContextReleaseCommand", "UeContextReleaseComplete", "PathSwitchRequest", "ERabSetupRequest",
             "Paging",
             // X2
             "X2SetupRequest", "X2SetupResponse", "HandoverRequest", "HandoverRequestAcknowledge",
             "HandoverPreparationFailure", "SnStatusTransfer", "UeContextRelease", "LoadInformation"})
      out.insert(normalize(n));
    return out;
  }();
  return names;
}

std::set<std::string> rrc_names() {
  std::set<std::string> out;
  for (int k = 0; k <= static_cast<int>(lte::RrcKind::Mcch); ++k)
    out.insert(std::string(lte::rrc_kind_name(static_cast<lte::RrcKind>(k))));
  return out;
}

std::set<std::string> frame_names() {
  std::set<std::string> out;
  for (int t = 0; t <= static_cast<int>(frames::FrameType::Data); ++t)
    out.insert(std::string(frames::frame_type_name(static_cast<frames::FrameType>(t))));
  return out;
}

}  // namespace

std::vector<std::string> call_flow(const std::vector<TraceRecord>& records, const std::string& ue) {
  std::vector<std::string> out;
  bool beacon_seen = false;
  for (const auto& r : records) {
    if (!involves(r, ue)) continue;
    const std::string msg = r.get("msg");
    if (r.kind == TraceKind::Mgmt && msg == "Beacon") {
      if (r.node == ue && out.empty() && !beacon_seen) {
        out.push_back("Beacon/" + r.get("bearer") + " dl");
        beacon_seen = true;
      }
      continue;
    }
    if (r.kind == TraceKind::Rrc) {
      out.push_back(entry(r));
    } else if (r.kind == TraceKind::Mgmt && r.get("bearer").rfind("DRB", 0) == 0) {
      out.push_back(entry(r));
    } else if (r.kind == TraceKind::Data) {
      out.push_back(entry(r));
      break;
    }
  }
  return out;
}

std::vector<std::string> reference_call_flow() {
  return {
      "Beacon/MRB1 dl",
      "ConnectionRequest/SRB0 ul",
      "ConnectionSetup/SRB0 dl",
      "SetupComplete/SRB1 ul",
      "UlInformationTransfer[ProbeRequest]/SRB1 ul",
      "ConnectionReconfiguration[ProbeResponse]/SRB1 dl drb=1 qci=9",
      "ReconfigurationComplete/SRB1 ul",
      "AssociationRequest/DRB1 ul",
      "AssociationResponse/DRB1 dl",
      "Data/DRB1 ul",
  };
}

std::vector<std::string> mgmt_projection(const std::vector<TraceRecord>& records, const std::string& ue) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (!involves(r, ue)) continue;
    if (r.kind == TraceKind::Data) break;
    if (r.kind != TraceKind::Mgmt) continue;
    const std::string msg = r.get("msg");
    if (msg == "Beacon") continue;
    out.push_back((r.node == ue ? "ue:" : "ap:") + msg + " " + r.get("dir"));
  }
  return out;
}

std::vector<TraceRecord> protocol_violations(const std::vector<TraceRecord>& records) {
  static const std::set<std::string> rrc = rrc_names();
  static const std::set<std::string> frame = frame_names();
  static const std::set<std::string> mrb = {"Sib13", "Mcch"};
  std::vector<TraceRecord> out;
  for (const auto& r : records) {
    bool bad = false;
    for (const auto& [k, v] : r.fields)
      if ((k == "msg" || k == "pdu" || k == "event" || k == "decision") && denied().count(normalize(v))) bad = true;
    const std::string msg = r.get("msg");
    switch (r.kind) {
      case TraceKind::Rrc: bad = bad || !rrc.count(msg); break;
      case TraceKind::Mrb: bad = bad || !mrb.count(msg); break;
      case TraceKind::Mgmt:
      case TraceKind::Data: bad = bad || !frame.count(msg); break;
      default: break;
    }
    if (r.has("pdu") && !frame.count(r.get("pdu")) && r.get("pdu") != "opaque") bad = true;
    if (bad) out.push_back(r);
  }
  return out;
}

std::vector<TraceRecord> mrb_precedence_violations(const std::vector<TraceRecord>& records) {
  std::map<std::string, SimTime> first_mcch;
  std::vector<TraceRecord> out;
  for (const auto& r : records) {
    if (r.kind == TraceKind::Mrb && r.get("msg") == "Mcch" && !first_mcch.count(r.node)) first_mcch[r.node] = r.t;
    if (r.kind != TraceKind::Mgmt || r.get("msg") != "Beacon" || r.get("bearer") != "MRB1") continue;
    const std::string enb = r.has("ap") ? r.get("ap") : r.node;
    auto it = first_mcch.find(enb);
    if (it == first_mcch.end() || r.t <= it->second) out.push_back(r);
  }
  return out;
}

std::vector<std::string> northbound_projection(const std::vector<TraceRecord>& records, const std::string& ue) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (r.kind != TraceKind::Auth && r.kind != TraceKind::Boundary) continue;
    if (r.get("ue") != ue) continue;
    std::string line = r.node + " " + std::string(trace_kind_name(r.kind));
    for (const auto& [k, v] : r.fields)
      if (k != "via" && k != "ap") line += " " + k + "=" + v;
    out.push_back(line);
  }
  return out;
}

}  // namespace f5g::analysis
