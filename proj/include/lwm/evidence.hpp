#pragma once

// Self-contained records of log misbehaviour. Each record carries the signed
// artifacts needed to re-run the failed check without any other state.

#include <optional>
#include <string>
#include <vector>

#include "lwm/crypto.hpp"
#include "lwm/logsim.hpp"
#include "lwm/notification.hpp"

namespace lwm {

enum class EvidenceKind : std::uint8_t {
  BadSignature = 1,
  IndexGap,
  IndexReplay,
  StaleTimestamp,
  ProofInvalid,
  SnapshotMismatch,
  InconsistentSTHs,
};

std::string_view to_string(EvidenceKind kind);
std::optional<EvidenceKind> evidence_kind_from(std::string_view name);

enum class ArtifactTag : std::uint8_t {
  Sth = 1,
  PrevSth,
  Proof,
  Query,
  Certificates,
  Entries,
  Consistency,
  Param,
};

struct Artifact {
  ArtifactTag tag;
  Bytes data;

  bool operator==(const Artifact&) const = default;
};

struct Evidence {
  EvidenceKind kind = EvidenceKind::BadSignature;
  std::uint64_t detected_at = 0;  // ms since epoch
  std::vector<Artifact> artifacts;

  /// kind:u8 || detected_at:u64 || u16 count || (tag:u8 || u32 data)* ||
  /// SHA-256 of everything before it.
  [[nodiscard]] Bytes encode() const;
  /// Throws Error(MalformedRecord), including on a checksum mismatch.
  static Evidence decode(ByteView data);

  [[nodiscard]] const Bytes* find(ArtifactTag tag) const;
  /// The STH the record is about.
  [[nodiscard]] std::optional<SignedTreeHead> sth() const;

  bool operator==(const Evidence&) const = default;
};

/// Signature fails under the log key.
Evidence evidence_bad_signature(const SignedTreeHead& sth, std::uint64_t now);
/// IndexGap or IndexReplay relative to `expected`, the index the observer
/// was waiting for; `prev` is the last STH it accepted, if any.
Evidence evidence_index(EvidenceKind kind, const std::optional<SignedTreeHead>& prev, const SignedTreeHead& cur,
                        std::uint64_t expected, std::uint64_t now);
/// Two validly signed, different STHs carrying the same index.
Evidence evidence_equivocation(const SignedTreeHead& a, const SignedTreeHead& b, std::uint64_t now);
/// The main tree at `cur` does not extend `prev` by exactly `batch`.
Evidence evidence_binding(const SignedTreeHead& prev, const SignedTreeHead& cur, const std::vector<LogEntry>& batch,
                          std::span<const Digest> consistency, std::uint64_t now);
Evidence evidence_stale(const SignedTreeHead& sth, std::uint64_t now, std::uint64_t last_timestamp,
                        std::uint64_t window_ms, std::uint64_t skew_ms);
/// The notification for `query` does not verify. `proof` is the wire form,
/// which need not decode.
Evidence evidence_proof(const SignedTreeHead& sth, const WildcardQuery& query, ByteView proof,
                        const std::vector<std::vector<Bytes>>& certificates, bool require_certificates,
                        std::uint64_t now);
/// The batch bound to `cur` by a consistency proof from `prev` does not
/// rebuild to the signed snapshot. `prev` is absent for index 0.
Evidence evidence_snapshot(const std::optional<SignedTreeHead>& prev, const SignedTreeHead& cur,
                           const std::vector<LogEntry>& batch, std::span<const Digest> consistency,
                           std::uint64_t now);

/// Re-runs the recorded check. True when the record is intact and the check
/// still fails for the reason its kind names.
bool verify_evidence(const Evidence& evidence, const PublicKey& log_key);
bool verify_evidence(ByteView record, const PublicKey& log_key);

/// Verifies the proof and certificates of a notification body under the
/// STH's snapshot. An empty certificate list for a match means the blobs
/// were withheld, which is refused when `require_certificates` is set.
/// Throws VerifyError or Error.
std::vector<LeafValue> check_notification_body(const SignedTreeHead& sth, const WildcardQuery& query,
                                               const WildcardProof& proof,
                                               const std::vector<std::vector<Bytes>>& certificates,
                                               bool require_certificates);

}  // namespace lwm
