#include <gtest/gtest.h>

#include "frugal5g/error.hpp"
#include "frugal5g/interworking.hpp"
#include "frugal5g/trace.hpp"

using namespace f5g;
using namespace f5g::iw;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

AuthSession authed(const std::string& ue) {
  AuthSession s;
  s.ue_id = ue;
  s.state = AuthState::Authenticated;
  return s;
}

}  // namespace

TEST(Auth, ChallengeDigestVector) {
  EXPECT_EQ(digest_hex(challenge_digest("secret", 1)), "50131b5099fc71eb70a8a7c77952f8ee");
  EXPECT_EQ(auth_nonce("ue1", 0), 0x944fd00538a13d31ULL);
}

TEST(Auth, FourMessageSuccess) {
  auto r = authenticate("ue1", "pw", {{"ue1", "pw"}}, NetworkMode::FixedBroadband, 7);
  ASSERT_EQ(r.messages.size(), 4u);
  EXPECT_EQ(r.messages[0].type, EapType::IdentityRequest);
  EXPECT_FALSE(r.messages[0].from_ue);
  EXPECT_EQ(r.messages[1].identity, "ue1");
  EXPECT_EQ(r.messages[2].nonce, 7u);
  EXPECT_EQ(r.messages[3].response, challenge_digest("pw", 7));
  EXPECT_EQ(r.session.state, AuthState::Authenticated);
  EXPECT_EQ(r.session.key_digest, challenge_digest("pw", 7));
  EXPECT_FALSE(r.session.nas_stub);
  EXPECT_NO_THROW(check_auth(r));
}

TEST(Auth, CoreModeMarksRegistrationStub) {
  auto r = authenticate("ue1", "pw", {{"ue1", "pw"}}, NetworkMode::FiveGCore);
  EXPECT_TRUE(r.session.nas_stub);
  EXPECT_EQ(r.session.method, AuthMethod::Dot1x);
}

TEST(Auth, WrongOrMissingCredential) {
  auto wrong = authenticate("ue1", "nope", {{"ue1", "pw"}}, NetworkMode::FixedBroadband);
  EXPECT_EQ(wrong.session.state, AuthState::Failed);
  EXPECT_EQ(wrong.messages.size(), 4u);
  EXPECT_EQ(code_of([&] { check_auth(wrong); }), Errc::BadCredentials);
  auto missing = authenticate("ue9", "pw", {{"ue1", "pw"}}, NetworkMode::FixedBroadband);
  EXPECT_EQ(missing.session.state, AuthState::Failed);
}

TEST(Auth, OutOfOrderFails) {
  Authenticator a(Registry{{"ue1", "pw"}});
  a.start("ue1", 3);
  a.on_message(EapMessage{EapType::ChallengeResponse, true, "ue1", {}, 0, challenge_digest("pw", 3)});
  EXPECT_EQ(a.session("ue1")->state, AuthState::Failed);
  EXPECT_EQ(code_of([&] { a.on_message(EapMessage{EapType::IdentityResponse, true, "ghost", "ghost", 0, {}}); }),
            Errc::UnknownUe);
}

TEST(Forwarding, EgressPerMode) {
  auto s = authed("ue1");
  auto core = forward_uplink(s, NetworkMode::FiveGCore, true);
  EXPECT_EQ(core.egress, Egress::CoreNetwork);
  EXPECT_EQ(core.access_tag, "non-3gpp");
  EXPECT_EQ(forward_uplink(s, NetworkMode::FixedBroadband, true).egress, Egress::Gateway);
  EXPECT_EQ(forward_uplink(s, NetworkMode::Standalone, false).egress, Egress::Local);
  EXPECT_EQ(forward_uplink(s, NetworkMode::FiveGCore, false).egress, Egress::Local);
  EXPECT_EQ(code_of([&] { forward_uplink(s, NetworkMode::Standalone, true); }), Errc::NoExternalNetwork);
  s.state = AuthState::Failed;
  EXPECT_EQ(code_of([&] { forward_uplink(s, NetworkMode::FixedBroadband, false); }), Errc::NotAuthenticated);
}

TEST(Modes, Names) {
  EXPECT_EQ(parse_network_mode("five_g_core"), NetworkMode::FiveGCore);
  EXPECT_EQ(parse_network_mode("fixed_broadband"), NetworkMode::FixedBroadband);
  EXPECT_EQ(parse_network_mode("standalone"), NetworkMode::Standalone);
  EXPECT_FALSE(parse_network_mode("lte"));
}

TEST(Sync, CoreWinsSubscriptionAccessWinsRadio) {
  NetworkState an, cn;
  an["ue1"] = {true, "an-digest", "ap1", AuthState::Authenticated};
  cn["ue1"] = {true, "cn-digest", "stale-ap", AuthState::Idle};
  an["ue2"] = {true, "x", "enb", AuthState::Authenticated};
  cn["ue2"] = {false, "y", "", AuthState::Idle};
  auto rec = sync_cn(NetworkMode::FiveGCore, an, cn, 1, 0);
  EXPECT_EQ(rec.reconciled.at("ue1"), (SessionSummary{true, "cn-digest", "ap1", AuthState::Authenticated}));
  EXPECT_EQ(rec.reconciled.at("ue2"), (SessionSummary{false, "y", "enb", AuthState::Failed}));
  EXPECT_EQ(rec.an_digest, rec.cn_digest);
  EXPECT_EQ(rec.an_digest, state_digest(rec.reconciled));
  // Idempotent: syncing the reconciled state again changes nothing.
  auto again = sync_cn(NetworkMode::FiveGCore, rec.reconciled, rec.reconciled, 2, 1);
  EXPECT_EQ(again.reconciled, rec.reconciled);
}

TEST(Sync, UeOnlyInAccessNetworkIsUnsubscribed) {
  NetworkState an;
  an["ue3"] = {true, "d", "ap1", AuthState::Authenticated};
  auto rec = sync_cn(NetworkMode::FiveGCore, an, {}, 1, 0);
  EXPECT_FALSE(rec.reconciled.at("ue3").subscribed);
  EXPECT_EQ(rec.reconciled.at("ue3").auth, AuthState::Failed);
}

TEST(Sync, Errors) {
  EXPECT_EQ(code_of([] { sync_cn(NetworkMode::Standalone, {}, {}, 1, 0); }), Errc::ModeMismatch);
  EXPECT_EQ(code_of([] { sync_cn(NetworkMode::FiveGCore, {}, {}, 3, 3); }), Errc::EpochRegression);
}

TEST(Sync, DigestFormat) {
  NetworkState s;
  s["ue1"] = {true, "d", "ap1", AuthState::Authenticated};
  EXPECT_EQ(state_digest(s), fnv1a("ue1|1|d|ap1|Authenticated\n"));
}
