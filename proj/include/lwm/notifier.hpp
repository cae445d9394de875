#pragma once

// The untrusted notifier: follows the log batch by batch, rebuilds each
// batch tree under the published constant, and answers per-subscription
// queries with proofs. Holds no keys; subjects verify everything it serves.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lwm/evidence.hpp"
#include "lwm/logsource.hpp"
#include "lwm/notification.hpp"

namespace lwm {

std::uint64_t system_now_ms();

struct NotifierOptions {
  std::size_t retention = 168;
  /// Compare each rebuilt tree with the signed snapshot and keep evidence.
  bool audit = true;
  /// Omit certificate blobs from notifications.
  bool proofs_only = false;
  /// Subscriptions and evidence are kept here when set.
  std::optional<std::filesystem::path> state_dir;
  /// When set, STHs with a bad signature are refused.
  std::optional<PublicKey> log_key;
  std::function<std::uint64_t()> clock = system_now_ms;
};

struct Subscription {
  std::string id;
  WildcardQuery query;
  std::optional<std::uint64_t> last_acknowledged_index;
  /// Push target for the HTTP front end; empty for pull-only.
  std::string callback_url;
};

/// One rebuilt batch. Immutable once published.
struct Batch {
  SignedTreeHead sth;
  std::vector<LogEntry> entries;
  WildTree tree;
  CertificateMap certificates;
  /// Rebuilt tree equals the signed snapshot (always true with audit off).
  bool snapshot_ok = true;
};

class Notifier {
 public:
  using Callback = std::function<void(const Subscription&, const Notification&)>;

  Notifier(LogSource& source, NotifierOptions options);

  /// Ingests every STH issued since the last poll, in index order, and then
  /// pushes to subscribers. Returns the new batches. Throws LogUnreachable
  /// (nothing is lost; the next poll resumes) or IndexGapUnfillable.
  std::vector<std::shared_ptr<const Batch>> poll();

  std::string subscribe(const WildcardQuery& query, Callback callback = {}, std::string callback_url = {});
  /// Throws Error(UnknownSubscription).
  void unsubscribe(const std::string& id);
  [[nodiscard]] Subscription subscription(const std::string& id) const;

  /// Throws UnknownSubscription, RangeError (not issued yet), BatchEvicted,
  /// or SnapshotMismatch (the log's snapshot for that batch is wrong).
  [[nodiscard]] Notification notify(const std::string& id, std::uint64_t index) const;
  /// Notifications for (since, latest]; from index 0 when `since` is absent.
  /// Stops before the first index that cannot be served and throws its error
  /// only when nothing precedes it. Records `since` as acknowledged.
  std::vector<Notification> whats_new(const std::string& id, std::optional<std::uint64_t> since);

  /// Callback for subscriptions registered with a callback_url.
  void set_push(Callback push);

  [[nodiscard]] std::optional<std::uint64_t> latest_index() const;
  [[nodiscard]] std::shared_ptr<const Batch> batch(std::uint64_t index) const;
  [[nodiscard]] std::vector<Evidence> evidence() const;
  [[nodiscard]] std::size_t cached_batches() const;

 private:
  std::shared_ptr<const Batch> ingest(const SignedTreeHead& sth, const std::optional<SignedTreeHead>& prev);
  void record(Evidence e);
  Notification build(const Batch& b, const WildcardQuery& query) const;
  void load_state();
  void save_subscriptions_locked() const;

  LogSource& source_;
  NotifierOptions options_;

  std::mutex poll_mutex_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<const Batch>> batches_;
  std::optional<std::uint64_t> last_index_;
  std::map<std::string, Subscription> subscriptions_;
  std::map<std::string, Callback> callbacks_;
  Callback push_;
  std::vector<Evidence> evidence_;
  std::set<Digest> evidence_keys_;
};

}  // namespace lwm
