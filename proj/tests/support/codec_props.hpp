#pragma once

// Generated-frame round trips and fuzzed decoding, shared by the property
// tests and the acceptance runner.

#include <cstdint>
#include <random>
#include <string>

#include "frugal5g/error.hpp"
#include "frugal5g/frames.hpp"

namespace f5g::testing {

struct CodecReport {
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
  std::uint64_t rejected = 0;  // fuzz: inputs refused with a defined error
  std::string first_failure;
};

inline frames::MacAddress random_unicast(std::mt19937_64& rng) {
  std::array<std::uint8_t, 6> o{};
  for (auto& b : o) b = static_cast<std::uint8_t>(rng());
  o[0] &= 0xfe;
  return frames::MacAddress(o);
}

inline std::string random_ssid(std::mt19937_64& rng) {
  std::string s(1 + rng() % 32, 'a');
  for (auto& c : s) c = static_cast<char>(0x21 + rng() % 94);
  return s;
}

inline frames::MacFrame random_frame(std::mt19937_64& rng) {
  using frames::FrameType;
  frames::MacFrame f;
  f.type = static_cast<FrameType>(rng() % 7);
  f.src = random_unicast(rng);
  f.bssid = random_unicast(rng);
  f.seq = static_cast<std::uint16_t>(rng() % frames::kSeqModulo);
  f.dst = (f.type == FrameType::Beacon || f.type == FrameType::ProbeRequest) ? frames::MacAddress::broadcast()
                                                                               : random_unicast(rng);
  switch (f.type) {
    case FrameType::Beacon: {
      frames::BeaconBody b;
      b.ssid = random_ssid(rng);
      b.interval_tu = static_cast<std::uint16_t>(1 + rng() % 1000);
      b.capabilities = static_cast<std::uint16_t>(rng());
      const int n = static_cast<int>(rng() % 6);
      for (int i = 0; i < n; ++i) b.tim.set(1 + static_cast<int>(rng() % frames::kMaxAssocId));
      f.body = frames::encode_beacon_body(b);
      break;
    }
    case FrameType::Deauthentication:
      f.body = frames::encode_deauth_body(static_cast<std::uint16_t>(rng()));
      break;
    case FrameType::Data: {
      // Mostly small bodies, sometimes up to the 2304-byte maximum.
      const std::size_t len = rng() % 16 == 0 ? rng() % (frames::kMaxBody + 1) : rng() % 256;
      f.body.resize(len);
      for (auto& b : f.body) b = static_cast<std::uint8_t>(rng());
      break;
    }
    default: {
      frames::MgmtBody m;
      m.ssid = random_ssid(rng);
      m.status = static_cast<std::uint16_t>(rng() % 3 == 0 ? rng() : 0);
      if (f.type == FrameType::AssociationResponse)
        m.aid = static_cast<std::uint16_t>(1 + rng() % frames::kMaxAssocId);
      f.body = frames::encode_mgmt_body(m);
      break;
    }
  }
  return f;
}

// Encodes and decodes `count` generated frames; the decoded frame, and for
// structured bodies the decoded body, must equal the original.
inline CodecReport codec_roundtrip(std::uint64_t seed, std::uint64_t count) {
  std::mt19937_64 rng(seed);
  CodecReport r;
  for (std::uint64_t i = 0; i < count; ++i) {
    ++r.cases;
    const auto f = random_frame(rng);
    bool ok = false;
    try {
      const auto bytes = frames::encode_frame(f);
      const auto back = frames::decode_frame(bytes);
      ok = back == f && bytes.size() == frames::kHeaderLen + f.body.size() && frames::peek_type(bytes) == f.type;
      if (ok && f.type == frames::FrameType::Beacon)
        ok = frames::encode_beacon_body(frames::decode_beacon_body(back.body)) == back.body;
      if (ok && f.type != frames::FrameType::Beacon && f.type != frames::FrameType::Data &&
          f.type != frames::FrameType::Deauthentication)
        ok = frames::encode_mgmt_body(frames::decode_mgmt_body(back.body)) == back.body;
    } catch (const std::exception& e) {
      if (r.first_failure.empty()) r.first_failure = e.what();
    }
    if (!ok) {
      ++r.failures;
      if (r.first_failure.empty()) r.first_failure = "mismatch at case " + std::to_string(i);
    }
  }
  return r;
}

inline bool defined_decode_error(Errc c) {
  return c == Errc::Truncated || c == Errc::UnknownType || c == Errc::InvariantViolation;
}

// Feeds `count` random and mutated buffers to every decoder. Each call must
// either succeed or throw Error with a decode error code.
inline CodecReport codec_fuzz(std::uint64_t seed, std::uint64_t count) {
  std::mt19937_64 rng(seed);
  CodecReport r;
  for (std::uint64_t i = 0; i < count; ++i) {
    ++r.cases;
    frames::Bytes buf;
    if (i % 2 == 0) {
      buf.resize(rng() % 80);
      for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
      if (buf.size() > 1 && rng() % 2) buf[1] = 0;  // get past the flags check more often
    } else {
      buf = frames::encode_frame(random_frame(rng));
      const int edits = 1 + static_cast<int>(rng() % 4);
      for (int e = 0; e < edits; ++e) {
        switch (rng() % 4) {
          case 0: buf[rng() % buf.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8)); break;
          case 1: buf.resize(rng() % (buf.size() + 1)); break;
          case 2: buf.push_back(static_cast<std::uint8_t>(rng())); break;
          default: if (!buf.empty()) buf[rng() % buf.size()] = static_cast<std::uint8_t>(rng()); break;
        }
        if (buf.empty()) break;
      }
    }
    const frames::ByteView view(buf);
    auto attempt = [&](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        if (defined_decode_error(e.code())) {
          ++r.rejected;
          return;
        }
        ++r.failures;
        if (r.first_failure.empty()) r.first_failure = e.what();
      } catch (const std::exception& e) {
        ++r.failures;
        if (r.first_failure.empty()) r.first_failure = std::string("undefined error: ") + e.what();
      }
    };
    attempt([&] { frames::decode_frame(view); });
    attempt([&] { frames::peek_type(view); });
    attempt([&] { frames::decode_beacon_body(view); });
    attempt([&] { frames::decode_mgmt_body(view); });
    attempt([&] { frames::decode_deauth_body(view); });
  }
  return r;
}

}  // namespace f5g::testing
