#pragma once

#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "lwm/codec.hpp"
#include "lwm/evidence.hpp"
#include "lwm/logsource.hpp"

namespace lwm {

struct AuditVerdict {
  std::uint64_t index = 0;
  bool ok = true;
  std::optional<Evidence> evidence;

  [[nodiscard]] Json to_json() const;
};

/// Full audit of one STH against its predecessor: signatures, index
/// succession, that `batch` is exactly the new part of the main tree, and
/// that the batch rebuilds to the signed snapshot. `prev` is absent only for
/// the first STH; `consistency` may be empty when prev->tree_size is 0.
AuditVerdict audit_sth(const PublicKey& log_key, const std::optional<SignedTreeHead>& prev,
                       const SignedTreeHead& cur, const std::vector<LogEntry>& batch,
                       std::span<const Digest> consistency, std::uint64_t now);

/// Follows a log and audits every STH from `from_index` on.
class Monitor {
 public:
  Monitor(LogSource& source, PublicKey log_key, std::uint64_t from_index = 0,
          std::function<std::uint64_t()> clock = {});

  /// Audits every STH issued since the last step, in index order.
  std::vector<AuditVerdict> step();

  [[nodiscard]] std::uint64_t next_index() const { return next_index_; }

 private:
  LogSource& source_;
  PublicKey log_key_;
  std::uint64_t next_index_;
  std::optional<SignedTreeHead> prev_;
  std::function<std::uint64_t()> clock_;
  std::set<Digest> reported_;
};

}  // namespace lwm
