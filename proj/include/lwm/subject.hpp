#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "lwm/codec.hpp"
#include "lwm/evidence.hpp"
#include "lwm/notification.hpp"

namespace lwm {

struct SubjectConfig {
  PublicKey log_key;
  WildcardQuery query = WildcardQuery::parse("example.com");
  std::uint64_t window_ms = 25ull * 3600 * 1000;
  std::uint64_t skew_ms = 10ull * 60 * 1000;
  bool require_certificates = true;
};

struct VerifiedMatch {
  SubjectName name;
  std::vector<Bytes> certificates;
};

struct VerifyOutcome {
  enum class Status { Accepted, Duplicate, Rejected };
  Status status = Status::Rejected;
  std::vector<VerifiedMatch> matches;
  std::optional<EvidenceKind> rejection;

  [[nodiscard]] bool accepted() const { return status == Status::Accepted; }
};

/// Per (log, query) verifier state. Not thread-safe.
class Subject {
 public:
  /// Starts expecting index 0.
  explicit Subject(SubjectConfig config);
  /// Starts after an STH obtained out of band; its signature is checked.
  static Subject bootstrap(SubjectConfig config, const SignedTreeHead& trusted);

  /// Runs every check in order; on the first failure appends one Evidence
  /// record and leaves the state unchanged.
  VerifyOutcome verify_notification(const Notification& n, std::uint64_t now_ms);

  [[nodiscard]] const SubjectConfig& config() const { return config_; }
  [[nodiscard]] std::uint64_t expected_next_index() const { return expected_next_index_; }
  [[nodiscard]] std::uint64_t last_timestamp() const { return last_timestamp_; }
  [[nodiscard]] const std::vector<Evidence>& evidence() const { return evidence_; }
  [[nodiscard]] const std::map<std::uint64_t, SignedTreeHead>& accepted_sths() const { return accepted_; }

  /// Concatenated length-prefixed evidence records.
  [[nodiscard]] Bytes export_evidence() const;

  [[nodiscard]] Json to_json() const;
  static Subject from_json(const Json& j);
  void save(const std::filesystem::path& file) const;
  static Subject load(const std::filesystem::path& file);

 private:
  VerifyOutcome reject(Evidence e);

  SubjectConfig config_;
  std::uint64_t expected_next_index_ = 0;
  std::uint64_t last_timestamp_ = 0;
  std::map<std::uint64_t, SignedTreeHead> accepted_;
  std::vector<Evidence> evidence_;
};

}  // namespace lwm
