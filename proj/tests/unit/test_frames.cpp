#include <gtest/gtest.h>

#include "frugal5g/error.hpp"
#include "frugal5g/frames.hpp"

using namespace f5g;
using namespace f5g::frames;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::Io;
}

MacFrame data_frame(Bytes body) {
  MacFrame f;
  f.type = FrameType::Data;
  f.src = MacAddress::local(1);
  f.dst = MacAddress::local(2);
  f.bssid = MacAddress::local(2);
  f.seq = 5;
  f.body = std::move(body);
  return f;
}

}  // namespace

TEST(MacAddress, LocalLayoutAndText) {
  auto a = MacAddress::local(0x01020304);
  EXPECT_EQ(a.to_string(), "02:00:01:02:03:04");
  EXPECT_TRUE(a.is_unicast());
  EXPECT_TRUE(a.is_locally_administered());
  EXPECT_TRUE(MacAddress::broadcast().is_broadcast());
  EXPECT_EQ(MacAddress::parse("02:00:01:02:03:04"), a);
  EXPECT_FALSE(MacAddress::parse("02:00:01:02:03"));
  EXPECT_FALSE(MacAddress::parse("zz:00:01:02:03:04"));
}

TEST(Frames, DataFrameBytes) {
  const Bytes expected = {0x08, 0x00, 0x02, 0x00, 0x00, 0x00, 0x00, 0x02, 0x02, 0x00, 0x00, 0x00, 0x00,
                          0x01, 0x02, 0x00, 0x00, 0x00, 0x00, 0x02, 0x50, 0x00, 0x02, 0x00, 0xaa, 0xbb};
  EXPECT_EQ(encode_frame(data_frame({0xaa, 0xbb})), expected);
  EXPECT_EQ(decode_frame(expected), data_frame({0xaa, 0xbb}));
}

TEST(Frames, EmptyBodyIsHeaderOnly) {
  EXPECT_EQ(encode_frame(data_frame({})).size(), kHeaderLen);
  EXPECT_EQ(kHeaderLen, 24u);
}

TEST(Frames, FrameControlPerType) {
  const std::pair<FrameType, std::uint8_t> cases[] = {
      {FrameType::AssociationRequest, 0x00}, {FrameType::AssociationResponse, 0x10},
      {FrameType::ProbeRequest, 0x40},       {FrameType::ProbeResponse, 0x50},
      {FrameType::Beacon, 0x80},             {FrameType::Deauthentication, 0xc0},
      {FrameType::Data, 0x08}};
  for (auto [type, fc] : cases) {
    MacFrame f = data_frame({});
    f.type = type;
    if (type == FrameType::Beacon || type == FrameType::ProbeRequest) f.dst = MacAddress::broadcast();
    auto bytes = encode_frame(f);
    EXPECT_EQ(bytes[0], fc) << frame_type_name(type);
    EXPECT_EQ(peek_type(bytes), type);
  }
}

TEST(Frames, SequenceControlShiftedLittleEndian) {
  MacFrame f = data_frame({});
  f.seq = 4095;
  auto bytes = encode_frame(f);
  EXPECT_EQ(bytes[20], 0xf0);
  EXPECT_EQ(bytes[21], 0xff);
}

TEST(Frames, ValidationRules) {
  MacFrame f = data_frame({});
  f.seq = 4096;
  EXPECT_EQ(code_of([&] { validate(f); }), Errc::InvariantViolation);
  f = data_frame(Bytes(kMaxBody + 1, 0));
  EXPECT_EQ(code_of([&] { encode_frame(f); }), Errc::InvariantViolation);
  f = data_frame({});
  f.dst = MacAddress::broadcast();
  EXPECT_EQ(code_of([&] { validate(f); }), Errc::InvariantViolation);
  f = data_frame({});
  f.type = FrameType::Beacon;
  EXPECT_EQ(code_of([&] { validate(f); }), Errc::InvariantViolation);
  EXPECT_NO_THROW(validate(data_frame(Bytes(kMaxBody, 1))));
}

TEST(Frames, DecodeErrors) {
  auto bytes = encode_frame(data_frame({1, 2, 3}));
  EXPECT_EQ(code_of([&] { decode_frame(ByteView(bytes).first(10)); }), Errc::Truncated);
  EXPECT_EQ(code_of([&] { decode_frame(ByteView(bytes).first(25)); }), Errc::Truncated);
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_EQ(code_of([&] { decode_frame(extra); }), Errc::InvariantViolation);
  auto unknown = bytes;
  unknown[0] = 0x0c;  // type 3 is unassigned
  EXPECT_EQ(code_of([&] { decode_frame(unknown); }), Errc::UnknownType);
  EXPECT_FALSE(peek_type(unknown));
}

TEST(Beacon, BodyBytes) {
  BeaconBody b;
  b.ssid = "ab";
  b.interval_tu = 100;
  b.capabilities = 1;
  b.tim.set(1);
  b.tim.set(9);
  const Bytes expected = {0x02, 'a', 'b', 0x64, 0x00, 0x01, 0x00, 0x02, 0x02, 0x02};
  EXPECT_EQ(encode_beacon_body(b), expected);
  EXPECT_EQ(decode_beacon_body(expected), b);
}

TEST(Beacon, EmptyTimHasNoBitmap) {
  BeaconBody b;
  b.ssid = "x";
  const Bytes expected = {0x01, 'x', 0x64, 0x00, 0x00, 0x00, 0x00};
  EXPECT_EQ(encode_beacon_body(b), expected);
}

TEST(Beacon, BuiltFrameIsBroadcast) {
  Tim tim;
  tim.set(3);
  auto f = build_beacon("frugal5g", 100, tim, MacAddress::local(7), 12);
  EXPECT_EQ(f.type, FrameType::Beacon);
  EXPECT_TRUE(f.dst.is_broadcast());
  EXPECT_EQ(f.src, MacAddress::local(7));
  EXPECT_EQ(decode_beacon_body(f.body).tim.ids(), std::vector<int>{3});
}

TEST(Tim, SetClearAndBounds) {
  Tim t;
  EXPECT_TRUE(t.empty());
  t.set(255);
  t.set(4);
  EXPECT_EQ(t.ids(), (std::vector<int>{4, 255}));
  t.clear(4);
  EXPECT_FALSE(t.test(4));
  EXPECT_EQ(code_of([&] { t.set(0); }), Errc::InvariantViolation);
  EXPECT_EQ(code_of([&] { t.set(256); }), Errc::InvariantViolation);
}

TEST(MgmtBody, ResponseWithAid) {
  MgmtBody b{"ab", 0, 7};
  const Bytes expected = {0x02, 'a', 'b', 0x00, 0x00, 0x07, 0x00};
  EXPECT_EQ(encode_mgmt_body(b), expected);
  EXPECT_EQ(decode_mgmt_body(expected), b);
  MgmtBody req{"ab", 0, std::nullopt};
  EXPECT_EQ(encode_mgmt_body(req).size(), 5u);
}

TEST(MgmtBody, Deauth) {
  EXPECT_EQ(encode_deauth_body(kReasonLeaving), (Bytes{0x03, 0x00}));
  EXPECT_EQ(decode_deauth_body(Bytes{0x03, 0x00}), kReasonLeaving);
  EXPECT_EQ(code_of([&] { decode_deauth_body(Bytes{0x03}); }), Errc::Truncated);
}
