#pragma once

// Northbound side of the access network: how it attaches upward (5G core as
// a non-3GPP access, fixed broadband, or nothing), the 802.1x-style
// authentication stub, uplink egress choice and AN/CN reconciliation.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace f5g::iw {

enum class NetworkMode { FiveGCore, FixedBroadband, Standalone };
std::string_view network_mode_name(NetworkMode m);
std::optional<NetworkMode> parse_network_mode(std::string_view name);

enum class AuthState { Idle, Challenged, Authenticated, Failed };
enum class AuthMethod { Dot1x, NasStub };
std::string_view auth_state_name(AuthState s);
std::string_view auth_method_name(AuthMethod m);

using KeyDigest = std::array<std::uint8_t, 16>;

struct AuthSession {
  std::string ue_id;
  AuthState state = AuthState::Idle;
  AuthMethod method = AuthMethod::Dot1x;
  KeyDigest key_digest{};
  // Set in FiveGCore mode: the core registration the full NAS procedure
  // would perform is represented by this marker only.
  bool nas_stub = false;

  friend bool operator==(const AuthSession&, const AuthSession&) = default;
};

enum class EapType { IdentityRequest, IdentityResponse, Challenge, ChallengeResponse };
std::string_view eap_type_name(EapType t);

struct EapMessage {
  EapType type;
  bool from_ue = false;
  std::string ue;
  std::string identity;   // IdentityResponse
  std::uint64_t nonce = 0;  // Challenge
  KeyDigest response{};   // ChallengeResponse

  friend bool operator==(const EapMessage&, const EapMessage&) = default;
};

// ue -> credential.
using Registry = std::map<std::string, std::string>;

// Deterministic challenge response: digest of credential and nonce.
KeyDigest challenge_digest(std::string_view credential, std::uint64_t nonce);
std::string digest_hex(const KeyDigest& d);
// Nonce for the n-th authentication of `ue`.
std::uint64_t auth_nonce(std::string_view ue, std::uint64_t attempt);

// Authenticator side. start() opens a session with an IdentityRequest;
// on_message() consumes the supplicant's answers.
class Authenticator {
 public:
  explicit Authenticator(Registry registry) : registry_(std::move(registry)) {}

  EapMessage start(const std::string& ue, std::uint64_t nonce);
  // Reply to send back, if any. A ChallengeResponse settles the session.
  std::optional<EapMessage> on_message(const EapMessage& msg);

  const AuthSession* session(const std::string& ue) const;
  const Registry& registry() const { return registry_; }

 private:
  Registry registry_;
  std::map<std::string, AuthSession> sessions_;
  std::map<std::string, std::uint64_t> nonces_;
};

// Supplicant side: the UE's answer to an authenticator message.
EapMessage supplicant_reply(const std::string& ue, std::string_view credential, const EapMessage& msg);

struct AuthResult {
  AuthSession session;
  std::vector<EapMessage> messages;  // always the four-message exchange
};

// Runs the whole exchange. A credential mismatch (or a UE missing from the
// registry) ends in state Failed; check_auth() turns that into
// Error(BadCredentials).
AuthResult authenticate(const std::string& ue, std::string_view credential, const Registry& registry,
                        NetworkMode mode, std::uint64_t nonce = 0);
void check_auth(const AuthResult& result);

enum class Egress { CoreNetwork, Gateway, Local };
std::string_view egress_name(Egress e);

struct Forwarding {
  Egress egress;
  std::string access_tag;  // "non-3gpp" toward the core, else empty
};

// Throws Error(NotAuthenticated) or Error(NoExternalNetwork).
Forwarding forward_uplink(const AuthSession& session, NetworkMode mode, bool external_destination);

// ---- AN / CN reconciliation -------------------------------------------------

struct SessionSummary {
  // Subscription data: the core is authoritative.
  bool subscribed = true;
  std::string credential_digest;
  // Radio / association state: the access network is authoritative.
  std::string serving_ap;
  AuthState auth = AuthState::Idle;

  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

using NetworkState = std::map<std::string, SessionSummary>;

std::uint64_t state_digest(const NetworkState& state);

struct SyncRecord {
  std::uint64_t epoch = 0;
  std::uint64_t an_digest = 0;
  std::uint64_t cn_digest = 0;
  NetworkState reconciled;
};

// CN wins subscription fields, AN wins radio fields; an unsubscribed UE's
// session ends Failed. Throws Error(ModeMismatch) outside FiveGCore and
// Error(EpochRegression) unless epoch > last_epoch.
SyncRecord sync_cn(NetworkMode mode, const NetworkState& an, const NetworkState& cn,
                   std::uint64_t epoch, std::uint64_t last_epoch);

}  // namespace f5g::iw
