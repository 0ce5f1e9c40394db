#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace busyburst {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Io,
  InvalidParameter,
  InvalidProbability,
  NonNegativeDrift,
  ReducibleChain,
  DuplicateStateValue,
  NonConvergence,
  NoPositiveRoot,
  OutOfSupport,
  ExcessiveTruncation,
  EmptyTable,
  InsufficientData,
  SingleState,
  NonNegativeSampleDrift,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// C API and the CLI can map it to a status or exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace busyburst
