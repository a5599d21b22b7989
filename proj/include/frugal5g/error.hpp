#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace f5g {

// Every failure the library can report. The C API maps these one-to-one onto
// f5g_status values, so append only.
enum class Errc {
  InvariantViolation = 1,
  Truncated,
  UnknownType,
  Unreachable,
  AlreadyConnected,
  BearerNotActive,
  DuplicateDrb,
  MrbNotReady,
  UnknownUe,
  AssocIdExhausted,
  TooLarge,
  NotData,
  NotAssociated,
  ApAsleep,
  StaleReport,
  NoCapacity,
  Disconnected,
  BadCredentials,
  NotAuthenticated,
  NoExternalNetwork,
  ModeMismatch,
  EpochRegression,
  SchemaError,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, std::string(errc_name(code)) + ": " + what);
}

}  // namespace f5g
