#pragma once

// Simplified 802.11-style MAC frames carried by both the native Wi-Fi links
// and the LTE bearers of the emulation layer.
//
// Wire layout (multi-byte fields little-endian):
//
//   0      frame control: (subtype << 4) | (type << 2) | version
//   1      flags, always 0
//   2..7   addr1 = dst
//   8..13  addr2 = src
//   14..19 addr3 = bssid
//   20..21 sequence control = seq << 4
//   22..23 body length
//   24..   body
//
// There is no duration field; an encoded frame is 24 + body.size() bytes.

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace f5g::frames {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kHeaderLen = 24;
inline constexpr std::size_t kMaxBody = 2304;
inline constexpr std::uint16_t kSeqModulo = 4096;
inline constexpr int kMaxAssocId = 255;

class MacAddress {
 public:
  constexpr MacAddress() = default;
  constexpr explicit MacAddress(std::array<std::uint8_t, 6> octets)
      : octets_(octets) {}

  static constexpr MacAddress broadcast() {
    return MacAddress({0xff, 0xff, 0xff, 0xff, 0xff, 0xff});
  }
  // Locally administered unicast address 02:00:<index as 4 bytes BE>.
  static MacAddress local(std::uint32_t index);
  static std::optional<MacAddress> parse(std::string_view text);

  const std::array<std::uint8_t, 6>& octets() const { return octets_; }
  bool is_broadcast() const { return *this == broadcast(); }
  bool is_group() const { return (octets_[0] & 0x01) != 0; }
  bool is_unicast() const { return !is_group(); }
  bool is_locally_administered() const { return (octets_[0] & 0x02) != 0; }
  std::string to_string() const;

  friend bool operator==(const MacAddress&, const MacAddress&) = default;
  friend auto operator<=>(const MacAddress&, const MacAddress&) = default;

 private:
  std::array<std::uint8_t, 6> octets_{};
};

enum class FrameType : std::uint8_t {
  Beacon,
  ProbeRequest,
  ProbeResponse,
  AssociationRequest,
  AssociationResponse,
  Deauthentication,
  Data,
};

std::string_view frame_type_name(FrameType type);

struct MacFrame {
  FrameType type = FrameType::Data;
  MacAddress dst;
  MacAddress src;
  MacAddress bssid;
  std::uint16_t seq = 0;
  Bytes body;

  friend bool operator==(const MacFrame&, const MacFrame&) = default;
};

// Throws Error(InvariantViolation) if `frame` breaks an addressing, sequence
// or body-size rule.
void validate(const MacFrame& frame);

Bytes encode_frame(const MacFrame& frame);

// Total: returns a valid frame or throws Error with Truncated, UnknownType or
// InvariantViolation. Never reads outside `bytes`.
MacFrame decode_frame(ByteView bytes);

// Cheap header peek used by tracing; nullopt if the type bits are unassigned.
std::optional<FrameType> peek_type(ByteView bytes);

// Association IDs 1..255 with pending downlink traffic.
class Tim {
 public:
  void set(int aid);
  void clear(int aid);
  bool test(int aid) const;
  bool empty() const { return bits_.none(); }
  std::vector<int> ids() const;

  friend bool operator==(const Tim&, const Tim&) = default;

 private:
  std::bitset<kMaxAssocId + 1> bits_;
};

struct BeaconBody {
  std::string ssid;
  std::uint16_t interval_tu = 100;  // 1 TU = 1024 us
  std::uint16_t capabilities = 0;
  Tim tim;

  friend bool operator==(const BeaconBody&, const BeaconBody&) = default;
};

Bytes encode_beacon_body(const BeaconBody& body);
BeaconBody decode_beacon_body(ByteView bytes);

MacFrame build_beacon(std::string_view ssid, std::uint16_t interval_tu,
                      const Tim& tim, const MacAddress& bssid = MacAddress::local(0),
                      std::uint16_t seq = 0, std::uint16_t capabilities = 0x0001);

// Body of probe/association requests and responses: ssid_len (1) + ssid +
// status (2), and for AssociationResponse the granted association id (2).
struct MgmtBody {
  std::string ssid;
  std::uint16_t status = 0;  // 0 = success
  std::optional<std::uint16_t> aid;

  friend bool operator==(const MgmtBody&, const MgmtBody&) = default;
};

Bytes encode_mgmt_body(const MgmtBody& body);
MgmtBody decode_mgmt_body(ByteView bytes);

inline constexpr std::uint16_t kReasonLeaving = 3;

Bytes encode_deauth_body(std::uint16_t reason);
std::uint16_t decode_deauth_body(ByteView bytes);

}  // namespace f5g::frames
