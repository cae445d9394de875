#include "lwm/monitor.hpp"

#include "lwm/error.hpp"
#include "lwm/notifier.hpp"

namespace lwm {

Json AuditVerdict::to_json() const {
  Json j = {{"index", index}, {"ok", ok}};
  if (evidence) {
    j["kind"] = to_string(evidence->kind);
    j["evidence"] = lwm::to_json(*evidence);
  }
  return j;
}

AuditVerdict audit_sth(const PublicKey& log_key, const std::optional<SignedTreeHead>& prev,
                       const SignedTreeHead& cur, const std::vector<LogEntry>& batch,
                       std::span<const Digest> consistency, std::uint64_t now) {
  AuditVerdict v;
  auto fail = [&](std::optional<Evidence> e) {
    v.ok = false;
    v.evidence = std::move(e);
    return v;
  };
  if (!cur.verify_signature(log_key)) return fail(evidence_bad_signature(cur, now));
  if (prev && !prev->verify_signature(log_key)) return fail(evidence_bad_signature(*prev, now));
  try {
    check_extensions(cur);
    v.index = sth_index(cur);
  } catch (const Error&) {
    return fail(std::nullopt);
  }

  const std::uint64_t expected = prev ? sth_index(*prev) + 1 : 0;
  if (v.index > expected) return fail(evidence_index(EvidenceKind::IndexGap, prev, cur, expected, now));
  if (v.index < expected) return fail(evidence_index(EvidenceKind::IndexReplay, prev, cur, expected, now));

  const std::uint64_t prev_size = prev ? prev->tree_size : 0;
  const Digest prev_root = prev ? prev->main_root : rfc6962_empty_root();
  if (!verify_batch_binding(prev_size, prev_root, cur.tree_size, cur.main_root, batch, consistency)) {
    if (prev) return fail(evidence_binding(*prev, cur, batch, consistency, now));
    return fail(std::nullopt);
  }

  auto snap = sth_snapshot(cur);
  auto tree = WildTree::build(snap.constant, group_by_subject(batch));
  if (tree.root() != snap.root || tree.size() != snap.batch_size)
    return fail(evidence_snapshot(prev, cur, batch, consistency, now));
  return v;
}

Monitor::Monitor(LogSource& source, PublicKey log_key, std::uint64_t from_index,
                 std::function<std::uint64_t()> clock)
    : source_(source), log_key_(log_key), next_index_(from_index), clock_(clock ? std::move(clock) : system_now_ms) {}

std::vector<AuditVerdict> Monitor::step() {
  auto latest = source_.latest_sth();
  if (!latest) return {};
  const auto now = clock_();
  std::vector<AuditVerdict> out;

  if (!latest->verify_signature(log_key_)) {
    AuditVerdict v{next_index_, false, evidence_bad_signature(*latest, now)};
    return {v};
  }
  std::uint64_t idx = 0;
  try {
    idx = sth_index(*latest);
  } catch (const Error&) {
    return {AuditVerdict{next_index_, false, std::nullopt}};
  }

  if (!prev_ && next_index_ > 0) prev_ = source_.sth_at(next_index_ - 1);
  if (idx < next_index_) {
    if (prev_ && *latest == *prev_) return {};
    if (reported_.insert(sha256(latest->encode())).second)
      out.push_back({idx, false, evidence_index(EvidenceKind::IndexReplay, prev_, *latest, next_index_, now)});
    return out;
  }

  for (std::uint64_t i = next_index_; i <= idx; ++i) {
    SignedTreeHead cur;
    try {
      cur = i == idx ? *latest : source_.sth_at(i);
    } catch (const Error& e) {
      if (e.code() != Errc::RangeError) throw;
      out.push_back({i, false, evidence_index(EvidenceKind::IndexGap, prev_, *latest, i, now)});
      prev_ = *latest;
      next_index_ = idx + 1;
      return out;
    }
    const std::uint64_t prev_size = prev_ ? prev_->tree_size : 0;
    std::vector<LogEntry> batch;
    std::vector<Digest> consistency;
    if (cur.tree_size >= prev_size) {
      batch = source_.entries(prev_size, cur.tree_size);
      if (prev_size > 0) consistency = source_.consistency(prev_size, cur.tree_size);
    }
    auto v = audit_sth(log_key_, prev_, cur, batch, consistency, now);
    v.index = i;
    out.push_back(std::move(v));
    prev_ = cur;
    next_index_ = i + 1;
  }
  return out;
}

}  // namespace lwm
