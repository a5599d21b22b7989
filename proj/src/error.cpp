#include "frugal5g/error.hpp"

namespace f5g {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::Truncated: return "Truncated";
    case Errc::UnknownType: return "UnknownType";
    case Errc::Unreachable: return "Unreachable";
    case Errc::AlreadyConnected: return "AlreadyConnected";
    case Errc::BearerNotActive: return "BearerNotActive";
    case Errc::DuplicateDrb: return "DuplicateDrb";
    case Errc::MrbNotReady: return "MrbNotReady";
    case Errc::UnknownUe: return "UnknownUe";
    case Errc::AssocIdExhausted: return "AssocIdExhausted";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NotData: return "NotData";
    case Errc::NotAssociated: return "NotAssociated";
    case Errc::ApAsleep: return "ApAsleep";
    case Errc::StaleReport: return "StaleReport";
    case Errc::NoCapacity: return "NoCapacity";
    case Errc::Disconnected: return "Disconnected";
    case Errc::BadCredentials: return "BadCredentials";
    case Errc::NotAuthenticated: return "NotAuthenticated";
    case Errc::NoExternalNetwork: return "NoExternalNetwork";
    case Errc::ModeMismatch: return "ModeMismatch";
    case Errc::EpochRegression: return "EpochRegression";
    case Errc::SchemaError: return "SchemaError";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace f5g
