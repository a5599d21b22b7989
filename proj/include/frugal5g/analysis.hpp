#pragma once

// Trace projections and conformance checks shared by the CLI and the tests.

#include <string>
#include <vector>

#include "frugal5g/trace.hpp"

namespace f5g::analysis {

// One UE's attach as a call flow, ending with its first data frame:
// a "Beacon" entry when beacons preceded the exchange, the RRC messages and
// the association frames on the DRB. Each entry is "Msg[pdu]/bearer dir",
// plus "drb=N qci=Q" when the message activates a DRB.
std::vector<std::string> call_flow(const std::vector<TraceRecord>& records, const std::string& ue);

// The call flow an emulated attach must produce.
std::vector<std::string> reference_call_flow();

// Management frames of one UE's association, probe onward, with bearer and
// AP names erased and the sender replaced by its role ("ue" or "ap").
std::vector<std::string> mgmt_projection(const std::vector<TraceRecord>& records, const std::string& ue);

// Records that name a NAS procedure or an S1/X2 message, or whose message
// lies outside the RRC / MRB / MAC frame vocabularies.
std::vector<TraceRecord> protocol_violations(const std::vector<TraceRecord>& records);

// Beacon deliveries that are not strictly after their eNB's first MCCH.
std::vector<TraceRecord> mrb_precedence_violations(const std::vector<TraceRecord>& records);

// What the core side sees of `ue`: its auth and boundary records with time,
// sequence numbers and the serving AP erased.
std::vector<std::string> northbound_projection(const std::vector<TraceRecord>& records, const std::string& ue);

}  // namespace f5g::analysis
