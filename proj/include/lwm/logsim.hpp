#pragma once

// A minimal CT-style log. Certificates accumulate between STHs; each STH
// closes a batch, builds that batch's wild-card tree with a fresh constant,
// and signs the snapshot in the "lwm" extension next to an "index" counter.

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "lwm/crypto.hpp"
#include "lwm/hashcore.hpp"
#include "lwm/merkle.hpp"
#include "lwm/wtree.hpp"

namespace lwm {

struct LogEntry {
  std::uint64_t seq = 0;
  SubjectName subject;
  Bytes blob;

  /// seq:u64 || u16 subject || u32 blob; also the main-tree leaf input.
  [[nodiscard]] Bytes serialize() const;
  static LogEntry parse(ByteView data);

  bool operator==(const LogEntry&) const = default;
};

/// Groups a batch by subject name, the input shape of WildTree::build.
CertificateMap group_by_subject(const std::vector<LogEntry>& entries);

struct Extension {
  std::string key;
  Bytes value;

  bool operator==(const Extension&) const = default;
};

inline constexpr std::string_view kLwmKey = "lwm";
inline constexpr std::string_view kIndexKey = "index";

struct SignedTreeHead {
  std::uint64_t tree_size = 0;
  std::uint64_t timestamp = 0;  // ms since epoch
  Digest main_root;
  std::vector<Extension> extensions;
  Bytes signature;

  /// tree_size:u64 || timestamp:u64 || main_root || u16 count ||
  /// (u8 key || u16 value)*; the signature covers SHA-256 of these bytes.
  [[nodiscard]] Bytes signed_bytes() const;
  /// signed_bytes() || u16 signature
  [[nodiscard]] Bytes encode() const;
  static SignedTreeHead decode(ByteView data);

  [[nodiscard]] bool verify_signature(const PublicKey& key) const;
  [[nodiscard]] const Extension* find(std::string_view key) const;

  bool operator==(const SignedTreeHead&) const = default;
};

/// Throws Error(MalformedEncoding) unless keys are sorted and unique and both
/// "index" and "lwm" are present and decodable.
void check_extensions(const SignedTreeHead& sth);
std::uint64_t sth_index(const SignedTreeHead& sth);
Snapshot sth_snapshot(const SignedTreeHead& sth);

/// Checks that `batch` is exactly leaves [prev_size, cur_size) of the tree
/// with root cur_root, and that the two trees are consistent. `proof` is the
/// ordinary consistency proof from prev_size to cur_size.
bool verify_batch_binding(std::uint64_t prev_size, const Digest& prev_root, std::uint64_t cur_size,
                          const Digest& cur_root, const std::vector<LogEntry>& batch,
                          std::span<const Digest> proof);

/// Deliberate misbehaviour for fault-injection runs, keyed by the index the
/// next STH would carry.
struct LogFaults {
  std::optional<std::uint64_t> forge_snapshot_at;  // lwm tree omits one entry
  std::optional<std::uint64_t> replay_index_at;    // reuse the previous index
  std::optional<std::uint64_t> stale_timestamp_at;
  std::uint64_t stale_by_ms = 48ull * 3600 * 1000;
};

struct LogOptions {
  std::uint64_t interval_ms = 3600ull * 1000;
  /// When set, entries and STHs are journaled there and replayed on open.
  std::optional<std::filesystem::path> data_dir;
};

/// Single writer (submit/issue_sth), concurrent readers.
class Log {
 public:
  Log(SigningKey key, LogOptions options);
  ~Log();
  Log(const Log&) = delete;
  Log& operator=(const Log&) = delete;

  /// Throws Error(MalformedName).
  std::uint64_t submit(std::string_view subject, Bytes blob);
  /// Throws Error(RateLimited) within one interval of the previous STH.
  SignedTreeHead issue_sth(std::uint64_t now_ms);

  /// Throws Error(RangeError) before the first STH.
  [[nodiscard]] SignedTreeHead get_sth() const;
  [[nodiscard]] SignedTreeHead get_sth_at(std::uint64_t index) const;
  [[nodiscard]] std::vector<LogEntry> get_entries(std::uint64_t from_size, std::uint64_t to_size) const;
  [[nodiscard]] std::vector<Digest> consistency_proof(std::uint64_t size1, std::uint64_t size2) const;
  [[nodiscard]] AuditPath inclusion_proof(std::uint64_t seq, std::uint64_t size) const;
  [[nodiscard]] Digest root_at(std::uint64_t size) const;

  [[nodiscard]] std::uint64_t size() const;
  [[nodiscard]] std::uint64_t sth_count() const;
  [[nodiscard]] const PublicKey& public_key() const { return key_.public_key(); }
  [[nodiscard]] std::uint64_t interval_ms() const { return options_.interval_ms; }

  void set_faults(LogFaults faults);

 private:
  void replay_journals();
  void append_entry_locked(LogEntry entry, bool journal);
  void append_sth_locked(SignedTreeHead sth, bool journal);

  SigningKey key_;
  LogOptions options_;
  LogFaults faults_;

  mutable std::shared_mutex mutex_;
  std::vector<LogEntry> entries_;
  merkle::HashLevels main_tree_;
  std::vector<SignedTreeHead> history_;
  std::map<std::uint64_t, std::size_t> by_index_;
  std::uint64_t next_index_ = 0;
};

}  // namespace lwm
