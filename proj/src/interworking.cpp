#include "frugal5g/interworking.hpp"

#include <sstream>

#include "frugal5g/error.hpp"
#include "frugal5g/trace.hpp"

namespace f5g::iw {

std::string_view network_mode_name(NetworkMode m) {
  switch (m) {
    case NetworkMode::FiveGCore: return "five_g_core";
    case NetworkMode::FixedBroadband: return "fixed_broadband";
    case NetworkMode::Standalone: return "standalone";
  }
  return "?";
}

std::optional<NetworkMode> parse_network_mode(std::string_view name) {
  for (auto m : {NetworkMode::FiveGCore, NetworkMode::FixedBroadband, NetworkMode::Standalone})
    if (network_mode_name(m) == name) return m;
  return std::nullopt;
}

std::string_view auth_state_name(AuthState s) {
  switch (s) {
    case AuthState::Idle: return "Idle";
    case AuthState::Challenged: return "Challenged";
    case AuthState::Authenticated: return "Authenticated";
    case AuthState::Failed: return "Failed";
  }
  return "?";
}

std::string_view auth_method_name(AuthMethod m) { return m == AuthMethod::Dot1x ? "dot1x" : "nas-stub"; }

std::string_view eap_type_name(EapType t) {
  switch (t) {
    case EapType::IdentityRequest: return "EAP-Request/Identity";
    case EapType::IdentityResponse: return "EAP-Response/Identity";
    case EapType::Challenge: return "EAP-Request/Challenge";
    case EapType::ChallengeResponse: return "EAP-Response/Challenge";
  }
  return "?";
}

KeyDigest challenge_digest(std::string_view credential, std::uint64_t nonce) {
  std::string material(credential);
  for (int i = 0; i < 8; ++i) material.push_back(static_cast<char>((nonce >> (8 * i)) & 0xff));
  const std::uint64_t lo = fnv1a(material);
  const std::uint64_t hi = fnv1a(material, lo ^ 0x9e3779b97f4a7c15ULL);
  KeyDigest d{};
  for (int i = 0; i < 8; ++i) {
    d[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(lo >> (8 * i));
    d[static_cast<std::size_t>(8 + i)] = static_cast<std::uint8_t>(hi >> (8 * i));
  }
  return d;
}

std::string digest_hex(const KeyDigest& d) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (auto b : d) {
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 0xf]);
  }
  return out;
}

std::uint64_t auth_nonce(std::string_view ue, std::uint64_t attempt) {
  return fnv1a(std::string(ue) + "#" + std::to_string(attempt));
}

EapMessage Authenticator::start(const std::string& ue, std::uint64_t nonce) {
  AuthSession s;
  s.ue_id = ue;
  sessions_[ue] = s;
  nonces_[ue] = nonce;
  return EapMessage{EapType::IdentityRequest, false, ue, {}, 0, {}};
}

std::optional<EapMessage> Authenticator::on_message(const EapMessage& msg) {
  auto it = sessions_.find(msg.ue);
  if (it == sessions_.end()) fail(Errc::UnknownUe, "no authentication in progress for " + msg.ue);
  AuthSession& s = it->second;
  switch (msg.type) {
    case EapType::IdentityResponse:
      if (s.state != AuthState::Idle) break;
      s.state = AuthState::Challenged;
      return EapMessage{EapType::Challenge, false, msg.ue, {}, nonces_.at(msg.ue), {}};
    case EapType::ChallengeResponse: {
      if (s.state != AuthState::Challenged) break;
      auto cred = registry_.find(msg.ue);
      const bool ok = cred != registry_.end() && challenge_digest(cred->second, nonces_.at(msg.ue)) == msg.response;
      s.state = ok ? AuthState::Authenticated : AuthState::Failed;
      if (ok) s.key_digest = msg.response;
      return std::nullopt;
    }
    default: break;
  }
  s.state = AuthState::Failed;
  return std::nullopt;
}

const AuthSession* Authenticator::session(const std::string& ue) const {
  auto it = sessions_.find(ue);
  return it == sessions_.end() ? nullptr : &it->second;
}

EapMessage supplicant_reply(const std::string& ue, std::string_view credential, const EapMessage& msg) {
  switch (msg.type) {
    case EapType::IdentityRequest: return EapMessage{EapType::IdentityResponse, true, ue, ue, 0, {}};
    case EapType::Challenge:
      return EapMessage{EapType::ChallengeResponse, true, ue, {}, 0, challenge_digest(credential, msg.nonce)};
    default: fail(Errc::InvariantViolation, "supplicant cannot answer " + std::string(eap_type_name(msg.type)));
  }
}

AuthResult authenticate(const std::string& ue, std::string_view credential, const Registry& registry,
                        NetworkMode mode, std::uint64_t nonce) {
  Authenticator auth(registry);
  AuthResult out;
  auto req = auth.start(ue, nonce == 0 ? auth_nonce(ue, 0) : nonce);
  out.messages.push_back(req);
  auto id = supplicant_reply(ue, credential, req);
  out.messages.push_back(id);
  auto challenge = auth.on_message(id);
  out.messages.push_back(*challenge);
  auto answer = supplicant_reply(ue, credential, *challenge);
  out.messages.push_back(answer);
  auth.on_message(answer);
  out.session = *auth.session(ue);
  out.session.nas_stub = mode == NetworkMode::FiveGCore;
  return out;
}

void check_auth(const AuthResult& result) {
  if (result.session.state == AuthState::Failed)
    fail(Errc::BadCredentials, "credential rejected for " + result.session.ue_id);
}

std::string_view egress_name(Egress e) {
  switch (e) {
    case Egress::CoreNetwork: return "cn";
    case Egress::Gateway: return "gateway";
    case Egress::Local: return "local";
  }
  return "?";
}

Forwarding forward_uplink(const AuthSession& session, NetworkMode mode, bool external_destination) {
  if (session.state != AuthState::Authenticated)
    fail(Errc::NotAuthenticated, session.ue_id + " is not authenticated");
  if (!external_destination) return {Egress::Local, {}};
  switch (mode) {
    case NetworkMode::FiveGCore: return {Egress::CoreNetwork, "non-3gpp"};
    case NetworkMode::FixedBroadband: return {Egress::Gateway, {}};
    case NetworkMode::Standalone: break;
  }
  fail(Errc::NoExternalNetwork, "standalone access network has no external network");
}

std::uint64_t state_digest(const NetworkState& state) {
  std::ostringstream os;
  for (const auto& [ue, s] : state)
    os << ue << '|' << s.subscribed << '|' << s.credential_digest << '|' << s.serving_ap << '|'
       << auth_state_name(s.auth) << '\n';
  return fnv1a(os.str());
}

SyncRecord sync_cn(NetworkMode mode, const NetworkState& an, const NetworkState& cn,
                   std::uint64_t epoch, std::uint64_t last_epoch) {
  if (mode != NetworkMode::FiveGCore)
    fail(Errc::ModeMismatch, "sync needs five_g_core mode, not " + std::string(network_mode_name(mode)));
  if (epoch <= last_epoch)
    fail(Errc::EpochRegression, "epoch " + std::to_string(epoch) + " is not after " + std::to_string(last_epoch));

  SyncRecord rec;
  rec.epoch = epoch;
  std::map<std::string, bool> ues;
  for (const auto& [ue, _] : an) ues[ue] = true;
  for (const auto& [ue, _] : cn) ues[ue] = true;
  for (const auto& [ue, _] : ues) {
    auto a = an.find(ue);
    auto c = cn.find(ue);
    SessionSummary s;
    if (c != cn.end()) {
      s.subscribed = c->second.subscribed;
      s.credential_digest = c->second.credential_digest;
    } else {
      s.subscribed = false;
    }
    if (a != an.end()) {
      s.serving_ap = a->second.serving_ap;
      s.auth = a->second.auth;
    } else {
      s.serving_ap = c->second.serving_ap;
      s.auth = c->second.auth;
    }
    if (!s.subscribed && s.auth != AuthState::Idle) s.auth = AuthState::Failed;
    rec.reconciled[ue] = s;
  }
  rec.an_digest = state_digest(rec.reconciled);
  rec.cn_digest = rec.an_digest;
  return rec;
}

}  // namespace f5g::iw
