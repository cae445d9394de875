#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lwm {

enum class Errc {
  MalformedName,
  DuplicateName,
  MalformedEncoding,
  RateLimited,
  RangeError,
  LogUnreachable,
  IndexGapUnfillable,
  SnapshotMismatch,
  BatchEvicted,
  UnknownSubscription,
  MalformedRecord,
  CorpusMissing,
  Config,
  Io,
  Crypto,
};

std::string_view to_string(Errc code);

/// Base exception for every failure surfaced by the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace lwm
