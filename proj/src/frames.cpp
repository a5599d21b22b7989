#include "frugal5g/frames.hpp"

#include <cstdio>

#include "frugal5g/error.hpp"

namespace f5g::frames {

namespace {

constexpr std::uint8_t kTypeMgmt = 0b00;
constexpr std::uint8_t kTypeData = 0b10;

struct TypeBits {
  std::uint8_t type;
  std::uint8_t subtype;
};

TypeBits type_bits(FrameType t) {
  switch (t) {
    case FrameType::AssociationRequest: return {kTypeMgmt, 0b0000};
    case FrameType::AssociationResponse: return {kTypeMgmt, 0b0001};
    case FrameType::ProbeRequest: return {kTypeMgmt, 0b0100};
    case FrameType::ProbeResponse: return {kTypeMgmt, 0b0101};
    case FrameType::Beacon: return {kTypeMgmt, 0b1000};
    case FrameType::Deauthentication: return {kTypeMgmt, 0b1100};
    case FrameType::Data: return {kTypeData, 0b0000};
  }
  return {0xff, 0xff};
}

std::optional<FrameType> type_from_control(std::uint8_t fc) {
  const std::uint8_t version = fc & 0x03;
  const std::uint8_t type = (fc >> 2) & 0x03;
  const std::uint8_t subtype = fc >> 4;
  if (version != 0) return std::nullopt;
  if (type == kTypeData) {
    if (subtype == 0) return FrameType::Data;
    return std::nullopt;
  }
  if (type != kTypeMgmt) return std::nullopt;
  switch (subtype) {
    case 0b0000: return FrameType::AssociationRequest;
    case 0b0001: return FrameType::AssociationResponse;
    case 0b0100: return FrameType::ProbeRequest;
    case 0b0101: return FrameType::ProbeResponse;
    case 0b1000: return FrameType::Beacon;
    case 0b1100: return FrameType::Deauthentication;
    default: return std::nullopt;
  }
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(ByteView in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

void put_addr(Bytes& out, const MacAddress& a) {
  out.insert(out.end(), a.octets().begin(), a.octets().end());
}

MacAddress get_addr(ByteView in, std::size_t at) {
  std::array<std::uint8_t, 6> o{};
  for (std::size_t i = 0; i < 6; ++i) o[i] = in[at + i];
  return MacAddress(o);
}

// Cursor over a body that reports Truncated instead of overrunning.
class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    auto v = get_u16(in_, pos_);
    pos_ += 2;
    return v;
  }
  ByteView take(std::size_t n) {
    need(n);
    auto v = in_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  bool at_end() const { return pos_ == in_.size(); }
  void finish(const char* what) const {
    if (pos_ != in_.size()) fail(Errc::InvariantViolation, std::string(what) + " has trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail(Errc::Truncated, "body ends early");
  }
  ByteView in_;
  std::size_t pos_ = 0;
};

std::string check_ssid(ByteView raw) {
  if (raw.empty() || raw.size() > 32) fail(Errc::InvariantViolation, "ssid must be 1..32 bytes");
  return std::string(raw.begin(), raw.end());
}

}  // namespace

MacAddress MacAddress::local(std::uint32_t index) {
  return MacAddress({0x02, 0x00, static_cast<std::uint8_t>(index >> 24),
                     static_cast<std::uint8_t>(index >> 16),
                     static_cast<std::uint8_t>(index >> 8),
                     static_cast<std::uint8_t>(index)});
}

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  std::array<std::uint8_t, 6> o{};
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < 6; ++i) {
    int hi = hex(text[i * 3]);
    int lo = hex(text[i * 3 + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    if (i < 5 && text[i * 3 + 2] != ':') return std::nullopt;
    o[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return MacAddress(o);
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", octets_[0],
                octets_[1], octets_[2], octets_[3], octets_[4], octets_[5]);
  return buf;
}

std::string_view frame_type_name(FrameType type) {
  switch (type) {
    case FrameType::Beacon: return "Beacon";
    case FrameType::ProbeRequest: return "ProbeRequest";
    case FrameType::ProbeResponse: return "ProbeResponse";
    case FrameType::AssociationRequest: return "AssociationRequest";
    case FrameType::AssociationResponse: return "AssociationResponse";
    case FrameType::Deauthentication: return "Deauthentication";
    case FrameType::Data: return "Data";
  }
  return "?";
}

void validate(const MacFrame& f) {
  if (f.body.size() > kMaxBody)
    fail(Errc::InvariantViolation, "body of " + std::to_string(f.body.size()) + " bytes exceeds 2304");
  if (f.seq >= kSeqModulo) fail(Errc::InvariantViolation, "seq outside 0..4095");
  if (!f.src.is_unicast()) fail(Errc::InvariantViolation, "src must be unicast");
  switch (f.type) {
    case FrameType::Beacon:
    case FrameType::ProbeRequest:
      if (!f.dst.is_broadcast())
        fail(Errc::InvariantViolation, std::string(frame_type_name(f.type)) + " dst must be broadcast");
      break;
    case FrameType::Data:
      if (!f.dst.is_unicast()) fail(Errc::InvariantViolation, "Data dst must be unicast");
      break;
    default:
      break;
  }
}

Bytes encode_frame(const MacFrame& f) {
  validate(f);
  const auto bits = type_bits(f.type);
  Bytes out;
  out.reserve(kHeaderLen + f.body.size());
  out.push_back(static_cast<std::uint8_t>((bits.subtype << 4) | (bits.type << 2)));
  out.push_back(0);
  put_addr(out, f.dst);
  put_addr(out, f.src);
  put_addr(out, f.bssid);
  put_u16(out, static_cast<std::uint16_t>(f.seq << 4));
  put_u16(out, static_cast<std::uint16_t>(f.body.size()));
  out.insert(out.end(), f.body.begin(), f.body.end());
  return out;
}

std::optional<FrameType> peek_type(ByteView bytes) {
  if (bytes.empty()) return std::nullopt;
  return type_from_control(bytes[0]);
}

MacFrame decode_frame(ByteView bytes) {
  if (bytes.size() < kHeaderLen)
    fail(Errc::Truncated, "need " + std::to_string(kHeaderLen) + " header bytes, have " +
                              std::to_string(bytes.size()));
  auto type = type_from_control(bytes[0]);
  if (!type) fail(Errc::UnknownType, "frame control byte " + std::to_string(bytes[0]));
  if (bytes[1] != 0) fail(Errc::InvariantViolation, "flags byte must be 0");

  MacFrame f;
  f.type = *type;
  f.dst = get_addr(bytes, 2);
  f.src = get_addr(bytes, 8);
  f.bssid = get_addr(bytes, 14);
  const std::uint16_t seq_ctrl = get_u16(bytes, 20);
  if ((seq_ctrl & 0x0f) != 0) fail(Errc::InvariantViolation, "fragment number must be 0");
  f.seq = seq_ctrl >> 4;

  const std::size_t body_len = get_u16(bytes, 22);
  if (body_len > kMaxBody) fail(Errc::InvariantViolation, "declared body exceeds 2304");
  if (bytes.size() - kHeaderLen < body_len)
    fail(Errc::Truncated, "declared body " + std::to_string(body_len) + " bytes, have " +
                              std::to_string(bytes.size() - kHeaderLen));
  if (bytes.size() - kHeaderLen > body_len) fail(Errc::InvariantViolation, "trailing bytes after body");
  f.body.assign(bytes.begin() + kHeaderLen, bytes.end());
  validate(f);
  return f;
}

void Tim::set(int aid) {
  if (aid < 1 || aid > kMaxAssocId) fail(Errc::InvariantViolation, "association id outside 1..255");
  bits_.set(static_cast<std::size_t>(aid));
}

void Tim::clear(int aid) {
  if (aid >= 1 && aid <= kMaxAssocId) bits_.reset(static_cast<std::size_t>(aid));
}

bool Tim::test(int aid) const {
  return aid >= 1 && aid <= kMaxAssocId && bits_.test(static_cast<std::size_t>(aid));
}

std::vector<int> Tim::ids() const {
  std::vector<int> out;
  for (int aid = 1; aid <= kMaxAssocId; ++aid)
    if (bits_.test(static_cast<std::size_t>(aid))) out.push_back(aid);
  return out;
}

// The TIM bitmap is the shortest byte run covering the highest set id, so the
// encoding stays canonical.
Bytes encode_beacon_body(const BeaconBody& b) {
  if (b.ssid.empty() || b.ssid.size() > 32) fail(Errc::InvariantViolation, "ssid must be 1..32 bytes");
  if (b.interval_tu == 0) fail(Errc::InvariantViolation, "beacon interval must be > 0");
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(b.ssid.size()));
  out.insert(out.end(), b.ssid.begin(), b.ssid.end());
  put_u16(out, b.interval_tu);
  put_u16(out, b.capabilities);
  const auto ids = b.tim.ids();
  const std::size_t tim_len = ids.empty() ? 0 : static_cast<std::size_t>(ids.back()) / 8 + 1;
  out.push_back(static_cast<std::uint8_t>(tim_len));
  Bytes bitmap(tim_len, 0);
  for (int aid : ids) bitmap[static_cast<std::size_t>(aid) / 8] |= static_cast<std::uint8_t>(1u << (aid % 8));
  out.insert(out.end(), bitmap.begin(), bitmap.end());
  return out;
}

BeaconBody decode_beacon_body(ByteView bytes) {
  Reader r(bytes);
  BeaconBody b;
  const std::size_t ssid_len = r.u8();
  b.ssid = check_ssid(r.take(ssid_len));
  b.interval_tu = r.u16();
  if (b.interval_tu == 0) fail(Errc::InvariantViolation, "beacon interval must be > 0");
  b.capabilities = r.u16();
  const std::size_t tim_len = r.u8();
  if (tim_len > 32) fail(Errc::InvariantViolation, "tim longer than 32 bytes");
  auto bitmap = r.take(tim_len);
  r.finish("beacon body");
  if (tim_len > 0 && bitmap[tim_len - 1] == 0) fail(Errc::InvariantViolation, "tim not minimal");
  if (tim_len > 0 && (bitmap[0] & 0x01)) fail(Errc::InvariantViolation, "tim bit 0 is reserved");
  for (std::size_t i = 0; i < tim_len; ++i)
    for (int bit = 0; bit < 8; ++bit)
      if (bitmap[i] & (1u << bit)) b.tim.set(static_cast<int>(i * 8 + bit));
  return b;
}

MacFrame build_beacon(std::string_view ssid, std::uint16_t interval_tu, const Tim& tim,
                      const MacAddress& bssid, std::uint16_t seq, std::uint16_t capabilities) {
  BeaconBody body{std::string(ssid), interval_tu, capabilities, tim};
  MacFrame f;
  f.type = FrameType::Beacon;
  f.dst = MacAddress::broadcast();
  f.src = bssid;
  f.bssid = bssid;
  f.seq = static_cast<std::uint16_t>(seq % kSeqModulo);
  f.body = encode_beacon_body(body);
  validate(f);
  return f;
}

Bytes encode_mgmt_body(const MgmtBody& b) {
  if (b.ssid.empty() || b.ssid.size() > 32) fail(Errc::InvariantViolation, "ssid must be 1..32 bytes");
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(b.ssid.size()));
  out.insert(out.end(), b.ssid.begin(), b.ssid.end());
  put_u16(out, b.status);
  if (b.aid) {
    if (*b.aid < 1 || *b.aid > kMaxAssocId) fail(Errc::InvariantViolation, "association id outside 1..255");
    put_u16(out, *b.aid);
  }
  return out;
}

MgmtBody decode_mgmt_body(ByteView bytes) {
  Reader r(bytes);
  MgmtBody b;
  const std::size_t ssid_len = r.u8();
  b.ssid = check_ssid(r.take(ssid_len));
  b.status = r.u16();
  if (!r.at_end()) {
    b.aid = r.u16();
    if (*b.aid < 1 || *b.aid > kMaxAssocId) fail(Errc::InvariantViolation, "association id outside 1..255");
  }
  r.finish("management body");
  return b;
}

Bytes encode_deauth_body(std::uint16_t reason) {
  Bytes out;
  put_u16(out, reason);
  return out;
}

std::uint16_t decode_deauth_body(ByteView bytes) {
  Reader r(bytes);
  auto reason = r.u16();
  r.finish("deauthentication body");
  return reason;
}

}  // namespace f5g::frames
