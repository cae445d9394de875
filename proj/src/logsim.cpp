#include "lwm/logsim.hpp"

#include <algorithm>
#include <mutex>

#include "lwm/error.hpp"
#include "lwm/journal.hpp"

namespace lwm {

Bytes LogEntry::serialize() const {
  ByteWriter w;
  w.u64(seq);
  w.var16(as_bytes(subject.str()));
  w.var32(blob);
  return std::move(w).take();
}

LogEntry LogEntry::parse(ByteView data) {
  ByteReader r(data);
  auto seq = r.u64();
  auto name = r.var16();
  std::string_view text(reinterpret_cast<const char*>(name.data()), name.size());
  auto subject = SubjectName::parse(text);
  if (subject.str() != text) throw Error(Errc::MalformedEncoding, "non-canonical subject");
  auto blob = r.var32();
  LogEntry e{seq, std::move(subject), Bytes(blob.begin(), blob.end())};
  r.expect_done();
  return e;
}

CertificateMap group_by_subject(const std::vector<LogEntry>& entries) {
  CertificateMap m;
  for (const auto& e : entries) m[e.subject].push_back(e.blob);
  return m;
}

Bytes SignedTreeHead::signed_bytes() const {
  ByteWriter w;
  w.u64(tree_size);
  w.u64(timestamp);
  w.raw(main_root.bytes);
  w.u16(static_cast<std::uint16_t>(extensions.size()));
  for (const auto& e : extensions) {
    if (e.key.size() > 255) throw Error(Errc::MalformedEncoding, "extension key too long");
    w.u8(static_cast<std::uint8_t>(e.key.size()));
    w.raw(as_bytes(e.key));
    w.var16(e.value);
  }
  return std::move(w).take();
}

Bytes SignedTreeHead::encode() const {
  ByteWriter w;
  w.raw(signed_bytes());
  w.var16(signature);
  return std::move(w).take();
}

SignedTreeHead SignedTreeHead::decode(ByteView data) {
  ByteReader r(data);
  SignedTreeHead s;
  s.tree_size = r.u64();
  s.timestamp = r.u64();
  s.main_root = Digest::from(r.raw(Digest::kSize));
  std::uint16_t count = r.u16();
  for (std::uint16_t i = 0; i < count; ++i) {
    auto key = r.raw(r.u8());
    auto value = r.var16();
    s.extensions.push_back({std::string(key.begin(), key.end()), Bytes(value.begin(), value.end())});
  }
  auto sig = r.var16();
  s.signature.assign(sig.begin(), sig.end());
  r.expect_done();
  return s;
}

bool SignedTreeHead::verify_signature(const PublicKey& key) const {
  return key.verify(sha256(signed_bytes()).bytes, signature);
}

const Extension* SignedTreeHead::find(std::string_view key) const {
  for (const auto& e : extensions)
    if (e.key == key) return &e;
  return nullptr;
}

void check_extensions(const SignedTreeHead& sth) {
  for (std::size_t i = 1; i < sth.extensions.size(); ++i)
    if (!(sth.extensions[i - 1].key < sth.extensions[i].key))
      throw Error(Errc::MalformedEncoding, "extension keys not sorted and unique");
  (void)sth_index(sth);
  (void)sth_snapshot(sth);
}

std::uint64_t sth_index(const SignedTreeHead& sth) {
  const auto* e = sth.find(kIndexKey);
  if (e == nullptr) throw Error(Errc::MalformedEncoding, "missing index extension");
  ByteReader r(e->value);
  auto v = r.u64();
  r.expect_done();
  return v;
}

Snapshot sth_snapshot(const SignedTreeHead& sth) {
  const auto* e = sth.find(kLwmKey);
  if (e == nullptr) throw Error(Errc::MalformedEncoding, "missing lwm extension");
  return Snapshot::decode(e->value);
}

bool verify_batch_binding(std::uint64_t prev_size, const Digest& prev_root, std::uint64_t cur_size,
                          const Digest& cur_root, const std::vector<LogEntry>& batch,
                          std::span<const Digest> proof) {
  if (prev_size > cur_size || batch.size() != cur_size - prev_size) return false;
  std::vector<Digest> hashes;
  hashes.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].seq != prev_size + i) return false;
    hashes.push_back(rfc6962_leaf_hash(batch[i].serialize()));
  }
  if (prev_size == cur_size) return proof.empty() && prev_root == cur_root;
  if (prev_size == 0) return proof.empty() && merkle::reconstruct(cur_size, 0, hashes, {}) == cur_root;
  if (!merkle::verify_consistency(prev_size, cur_size, prev_root, cur_root, proof)) return false;
  // The proof's nodes left of prev_size plus the batch leaves must rebuild the
  // new root; nodes over the batch are recomputed, not trusted.
  auto ranges = merkle::consistency_ranges(prev_size, cur_size);
  std::vector<merkle::KnownNode> known{{{0, prev_size}, prev_root}};
  for (std::size_t i = 0; i < ranges.size(); ++i)
    if (ranges[i].end <= prev_size) known.push_back({ranges[i], proof[i]});
  return merkle::reconstruct(cur_size, prev_size, hashes, known) == cur_root;
}

namespace {
constexpr const char* kEntriesFile = "entries.log";
constexpr const char* kSthFile = "sth.log";
}  // namespace

Log::Log(SigningKey key, LogOptions options) : key_(std::move(key)), options_(std::move(options)) {
  if (options_.data_dir) {
    std::filesystem::create_directories(*options_.data_dir);
    replay_journals();
  }
}

Log::~Log() = default;

void Log::replay_journals() {
  for (const auto& rec : journal::read_all(*options_.data_dir / kEntriesFile)) {
    auto e = LogEntry::parse(rec);
    if (e.seq != entries_.size()) throw Error(Errc::Io, "entry journal out of sequence");
    append_entry_locked(std::move(e), false);
  }
  for (const auto& rec : journal::read_all(*options_.data_dir / kSthFile)) {
    auto sth = SignedTreeHead::decode(rec);
    if (sth.tree_size > entries_.size()) throw Error(Errc::Io, "STH journal ahead of entries");
    append_sth_locked(std::move(sth), false);
  }
}

void Log::append_entry_locked(LogEntry entry, bool journal) {
  if (journal && options_.data_dir) journal::append(*options_.data_dir / kEntriesFile, entry.serialize());
  main_tree_.append(rfc6962_leaf_hash(entry.serialize()));
  entries_.push_back(std::move(entry));
}

void Log::append_sth_locked(SignedTreeHead sth, bool journal) {
  if (journal && options_.data_dir) journal::append(*options_.data_dir / kSthFile, sth.encode());
  auto index = sth_index(sth);
  by_index_[index] = history_.size();
  next_index_ = std::max(next_index_, index + 1);
  history_.push_back(std::move(sth));
}

std::uint64_t Log::submit(std::string_view subject, Bytes blob) {
  auto name = SubjectName::parse(subject);
  std::unique_lock lock(mutex_);
  LogEntry e{entries_.size(), std::move(name), std::move(blob)};
  auto seq = e.seq;
  append_entry_locked(std::move(e), true);
  return seq;
}

SignedTreeHead Log::issue_sth(std::uint64_t now_ms) {
  std::unique_lock lock(mutex_);
  if (!history_.empty()) {
    // Max over the history so that a backdated STH does not relax the gate.
    std::uint64_t last = 0;
    for (const auto& s : history_) last = std::max(last, s.timestamp);
    if (now_ms < last + options_.interval_ms) throw Error(Errc::RateLimited, "STH interval not elapsed");
  }
  const std::uint64_t prev_size = history_.empty() ? 0 : history_.back().tree_size;
  std::vector<LogEntry> batch(entries_.begin() + static_cast<std::ptrdiff_t>(prev_size), entries_.end());

  const bool forge = faults_.forge_snapshot_at == next_index_;
  if (forge) {
    faults_.forge_snapshot_at.reset();
    if (!batch.empty()) batch.pop_back();
  }
  auto tree = WildTree::build(BatchConstant::random(), group_by_subject(batch));
  Snapshot snap = tree.snapshot();
  if (forge && entries_.size() == prev_size) snap.root = sha256(random_bytes(32));

  std::uint64_t index = next_index_;
  if (faults_.replay_index_at == next_index_ && next_index_ > 0) {
    faults_.replay_index_at.reset();
    index = next_index_ - 1;
  }
  std::uint64_t timestamp = now_ms;
  if (faults_.stale_timestamp_at == next_index_) {
    faults_.stale_timestamp_at.reset();
    timestamp = now_ms > faults_.stale_by_ms ? now_ms - faults_.stale_by_ms : 0;
  }

  SignedTreeHead sth;
  sth.tree_size = entries_.size();
  sth.timestamp = timestamp;
  sth.main_root = main_tree_.root(sth.tree_size, rfc6962_empty_root());
  ByteWriter idx;
  idx.u64(index);
  sth.extensions = {{std::string(kIndexKey), std::move(idx).take()}, {std::string(kLwmKey), snap.encode()}};
  sth.signature = key_.sign(sha256(sth.signed_bytes()).bytes);
  append_sth_locked(sth, true);
  return sth;
}

SignedTreeHead Log::get_sth() const {
  std::shared_lock lock(mutex_);
  if (history_.empty()) throw Error(Errc::RangeError, "no STH issued yet");
  return history_.back();
}

SignedTreeHead Log::get_sth_at(std::uint64_t index) const {
  std::shared_lock lock(mutex_);
  auto it = by_index_.find(index);
  if (it == by_index_.end()) throw Error(Errc::RangeError, "no STH with index " + std::to_string(index));
  return history_[it->second];
}

std::vector<LogEntry> Log::get_entries(std::uint64_t from_size, std::uint64_t to_size) const {
  std::shared_lock lock(mutex_);
  if (from_size > to_size || to_size > entries_.size()) throw Error(Errc::RangeError, "entry range");
  return {entries_.begin() + static_cast<std::ptrdiff_t>(from_size),
          entries_.begin() + static_cast<std::ptrdiff_t>(to_size)};
}

std::vector<Digest> Log::consistency_proof(std::uint64_t size1, std::uint64_t size2) const {
  std::shared_lock lock(mutex_);
  if (size1 == 0 || size1 > size2 || size2 > entries_.size()) throw Error(Errc::RangeError, "consistency range");
  return main_tree_.consistency_proof(size1, size2);
}

AuditPath Log::inclusion_proof(std::uint64_t seq, std::uint64_t size) const {
  std::shared_lock lock(mutex_);
  if (seq >= size || size > entries_.size()) throw Error(Errc::RangeError, "inclusion range");
  return {seq, main_tree_.audit_path(seq, size)};
}

Digest Log::root_at(std::uint64_t size) const {
  std::shared_lock lock(mutex_);
  if (size > entries_.size()) throw Error(Errc::RangeError, "tree size");
  return main_tree_.root(size, rfc6962_empty_root());
}

std::uint64_t Log::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::uint64_t Log::sth_count() const {
  std::shared_lock lock(mutex_);
  return history_.size();
}

void Log::set_faults(LogFaults faults) {
  std::unique_lock lock(mutex_);
  faults_ = faults;
}

}  // namespace lwm
