#include <gtest/gtest.h>

#include <chrono>

#include "../support/codec_props.hpp"

using namespace f5g::testing;

TEST(CodecProperties, MillionRoundTripsAndFuzz) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rt = codec_roundtrip(0x5eed, 1'000'000);
  auto fz = codec_fuzz(0xf022, 100'000);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(rt.cases, 1'000'000u);
  EXPECT_EQ(rt.failures, 0u) << rt.first_failure;
  EXPECT_EQ(fz.cases, 100'000u);
  EXPECT_EQ(fz.failures, 0u) << fz.first_failure;
  EXPECT_GT(fz.rejected, 0u);
  EXPECT_LT(secs, 30.0);
  RecordProperty("seconds", std::to_string(secs));
}

TEST(CodecProperties, SeedsAreReproducible) {
  auto a = codec_fuzz(11, 2'000);
  auto b = codec_fuzz(11, 2'000);
  EXPECT_EQ(a.rejected, b.rejected);
}

TEST(CodecProperties, EveryPrefixOfAFrameIsRejectedCleanly) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto bytes = f5g::frames::encode_frame(random_frame(rng));
    for (std::size_t n = 0; n < bytes.size(); ++n) {
      try {
        f5g::frames::decode_frame(f5g::frames::ByteView(bytes).first(n));
        ADD_FAILURE() << "prefix of " << n << " bytes decoded";
      } catch (const f5g::Error& e) {
        EXPECT_EQ(e.code(), f5g::Errc::Truncated);
      }
    }
  }
}
