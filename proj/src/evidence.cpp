#include "lwm/evidence.hpp"

#include "lwm/error.hpp"
#include "lwm/journal.hpp"

namespace lwm {

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {
    "BadSignature",   "IndexGap",         "IndexReplay",      "StaleTimestamp",
    "ProofInvalid",   "SnapshotMismatch", "InconsistentSTHs",
};

Bytes u64_bytes(std::initializer_list<std::uint64_t> values) {
  ByteWriter w;
  for (auto v : values) w.u64(v);
  return std::move(w).take();
}

Bytes digests_bytes(std::span<const Digest> ds) {
  Bytes out;
  for (const auto& d : ds) out.insert(out.end(), d.bytes.begin(), d.bytes.end());
  return out;
}

std::vector<Digest> digests_from(ByteView b) {
  if (b.size() % Digest::kSize != 0) throw Error(Errc::MalformedRecord, "digest list length");
  std::vector<Digest> out;
  for (std::size_t i = 0; i < b.size(); i += Digest::kSize) out.push_back(Digest::from(b.subspan(i, Digest::kSize)));
  return out;
}

Bytes entries_bytes(const std::vector<LogEntry>& batch) {
  std::vector<Bytes> recs;
  recs.reserve(batch.size());
  for (const auto& e : batch) recs.push_back(e.serialize());
  return journal::pack(recs);
}

std::vector<LogEntry> entries_from(ByteView b) {
  std::vector<LogEntry> out;
  for (const auto& r : journal::unpack(b)) out.push_back(LogEntry::parse(r));
  return out;
}

Bytes query_bytes(const WildcardQuery& q) {
  ByteWriter w;
  w.u8(q.apex_included() ? 1 : 0);
  w.raw(as_bytes(q.raw()));
  return std::move(w).take();
}

WildcardQuery query_from(ByteView b) {
  if (b.empty() || b[0] > 1) throw Error(Errc::MalformedRecord, "query artifact");
  std::string_view raw(reinterpret_cast<const char*>(b.data() + 1), b.size() - 1);
  return WildcardQuery::parse(raw, b[0] == 1);
}

class Reader {
 public:
  explicit Reader(const Evidence& e) : e_(e) {}

  SignedTreeHead sth(ArtifactTag tag) const { return SignedTreeHead::decode(need(tag)); }
  std::optional<SignedTreeHead> maybe_sth(ArtifactTag tag) const {
    const Bytes* b = e_.find(tag);
    if (b == nullptr) return std::nullopt;
    return SignedTreeHead::decode(*b);
  }
  std::vector<std::uint64_t> params(std::size_t n) const {
    ByteReader r(need(ArtifactTag::Param));
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(r.u64());
    r.expect_done();
    return out;
  }
  const Bytes& need(ArtifactTag tag) const {
    const Bytes* b = e_.find(tag);
    if (b == nullptr) throw Error(Errc::MalformedRecord, "missing artifact");
    return *b;
  }

 private:
  const Evidence& e_;
};

bool check_recorded(const Evidence& e, const PublicKey& key) {
  Reader r(e);
  switch (e.kind) {
    case EvidenceKind::BadSignature: return !r.sth(ArtifactTag::Sth).verify_signature(key);

    case EvidenceKind::IndexGap:
    case EvidenceKind::IndexReplay: {
      auto cur = r.sth(ArtifactTag::Sth);
      auto prev = r.maybe_sth(ArtifactTag::PrevSth);
      auto expected = r.params(1)[0];
      if (!cur.verify_signature(key)) return false;
      if (prev) {
        if (!prev->verify_signature(key) || sth_index(*prev) + 1 != expected || *prev == cur) return false;
      }
      auto idx = sth_index(cur);
      return e.kind == EvidenceKind::IndexGap ? idx > expected : idx < expected;
    }

    case EvidenceKind::InconsistentSTHs: {
      auto prev = r.sth(ArtifactTag::PrevSth);
      auto cur = r.sth(ArtifactTag::Sth);
      if (!prev.verify_signature(key) || !cur.verify_signature(key)) return false;
      if (e.find(ArtifactTag::Entries) == nullptr) return sth_index(prev) == sth_index(cur) && prev != cur;
      auto batch = entries_from(r.need(ArtifactTag::Entries));
      auto proof = digests_from(r.need(ArtifactTag::Consistency));
      return !verify_batch_binding(prev.tree_size, prev.main_root, cur.tree_size, cur.main_root, batch, proof);
    }

    case EvidenceKind::StaleTimestamp: {
      auto sth = r.sth(ArtifactTag::Sth);
      auto p = r.params(4);
      const auto now = p[0], last = p[1], window = p[2], skew = p[3];
      if (!sth.verify_signature(key)) return false;
      return sth.timestamp < last || sth.timestamp > now + skew || now > sth.timestamp + window;
    }

    case EvidenceKind::ProofInvalid: {
      auto sth = r.sth(ArtifactTag::Sth);
      if (!sth.verify_signature(key)) return false;
      auto query = query_from(r.need(ArtifactTag::Query));
      try {
        auto proof = WildcardProof::decode(r.need(ArtifactTag::Proof));
        auto certs = decode_certificate_lists(r.need(ArtifactTag::Certificates));
        (void)check_notification_body(sth, query, proof, certs, r.params(1)[0] != 0);
      } catch (const VerifyError&) {
        return true;
      } catch (const Error&) {
        return true;
      }
      return false;
    }

    case EvidenceKind::SnapshotMismatch: {
      auto cur = r.sth(ArtifactTag::Sth);
      auto prev = r.maybe_sth(ArtifactTag::PrevSth);
      auto batch = entries_from(r.need(ArtifactTag::Entries));
      auto proof = digests_from(r.need(ArtifactTag::Consistency));
      if (!cur.verify_signature(key)) return false;
      std::uint64_t prev_size = 0;
      Digest prev_root = rfc6962_empty_root();
      if (prev) {
        if (!prev->verify_signature(key) || sth_index(*prev) + 1 != sth_index(cur)) return false;
        prev_size = prev->tree_size;
        prev_root = prev->main_root;
      } else if (sth_index(cur) != 0) {
        return false;
      }
      if (!verify_batch_binding(prev_size, prev_root, cur.tree_size, cur.main_root, batch, proof)) return false;
      auto snap = sth_snapshot(cur);
      auto tree = WildTree::build(snap.constant, group_by_subject(batch));
      return tree.root() != snap.root || tree.size() != snap.batch_size;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(EvidenceKind kind) {
  auto i = static_cast<std::size_t>(kind) - 1;
  return i < kKindNames.size() ? kKindNames[i] : "Unknown";
}

std::optional<EvidenceKind> evidence_kind_from(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<EvidenceKind>(i + 1);
  return std::nullopt;
}

Bytes Evidence::encode() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(kind));
  w.u64(detected_at);
  w.u16(static_cast<std::uint16_t>(artifacts.size()));
  for (const auto& a : artifacts) {
    w.u8(static_cast<std::uint8_t>(a.tag));
    w.var32(a.data);
  }
  auto sum = sha256(w.bytes());
  w.raw(sum.bytes);
  return std::move(w).take();
}

Evidence Evidence::decode(ByteView data) {
  if (data.size() < Digest::kSize) throw Error(Errc::MalformedRecord, "evidence too short");
  auto body = data.first(data.size() - Digest::kSize);
  if (sha256(body) != Digest::from(data.last(Digest::kSize)))
    throw Error(Errc::MalformedRecord, "evidence checksum mismatch");
  try {
    ByteReader r(body);
    Evidence e;
    auto kind = r.u8();
    if (kind < 1 || kind > kKindNames.size()) throw Error(Errc::MalformedRecord, "evidence kind");
    e.kind = static_cast<EvidenceKind>(kind);
    e.detected_at = r.u64();
    auto n = r.u16();
    for (std::uint16_t i = 0; i < n; ++i) {
      auto tag = r.u8();
      if (tag < 1 || tag > static_cast<std::uint8_t>(ArtifactTag::Param))
        throw Error(Errc::MalformedRecord, "artifact tag");
      auto d = r.var32();
      e.artifacts.push_back({static_cast<ArtifactTag>(tag), Bytes(d.begin(), d.end())});
    }
    r.expect_done();
    return e;
  } catch (const Error& err) {
    if (err.code() == Errc::MalformedRecord) throw;
    throw Error(Errc::MalformedRecord, err.what());
  }
}

const Bytes* Evidence::find(ArtifactTag tag) const {
  for (const auto& a : artifacts)
    if (a.tag == tag) return &a.data;
  return nullptr;
}

std::optional<SignedTreeHead> Evidence::sth() const {
  const Bytes* b = find(ArtifactTag::Sth);
  if (b == nullptr) return std::nullopt;
  try {
    return SignedTreeHead::decode(*b);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Evidence evidence_bad_signature(const SignedTreeHead& sth, std::uint64_t now) {
  return {EvidenceKind::BadSignature, now, {{ArtifactTag::Sth, sth.encode()}}};
}

Evidence evidence_index(EvidenceKind kind, const std::optional<SignedTreeHead>& prev, const SignedTreeHead& cur,
                        std::uint64_t expected, std::uint64_t now) {
  Evidence e{kind, now, {{ArtifactTag::Sth, cur.encode()}, {ArtifactTag::Param, u64_bytes({expected})}}};
  if (prev) e.artifacts.push_back({ArtifactTag::PrevSth, prev->encode()});
  return e;
}

Evidence evidence_equivocation(const SignedTreeHead& a, const SignedTreeHead& b, std::uint64_t now) {
  return {EvidenceKind::InconsistentSTHs, now, {{ArtifactTag::PrevSth, a.encode()}, {ArtifactTag::Sth, b.encode()}}};
}

Evidence evidence_binding(const SignedTreeHead& prev, const SignedTreeHead& cur, const std::vector<LogEntry>& batch,
                          std::span<const Digest> consistency, std::uint64_t now) {
  return {EvidenceKind::InconsistentSTHs,
          now,
          {{ArtifactTag::PrevSth, prev.encode()},
           {ArtifactTag::Sth, cur.encode()},
           {ArtifactTag::Entries, entries_bytes(batch)},
           {ArtifactTag::Consistency, digests_bytes(consistency)}}};
}

Evidence evidence_stale(const SignedTreeHead& sth, std::uint64_t now, std::uint64_t last_timestamp,
                        std::uint64_t window_ms, std::uint64_t skew_ms) {
  return {EvidenceKind::StaleTimestamp,
          now,
          {{ArtifactTag::Sth, sth.encode()}, {ArtifactTag::Param, u64_bytes({now, last_timestamp, window_ms, skew_ms})}}};
}

Evidence evidence_proof(const SignedTreeHead& sth, const WildcardQuery& query, ByteView proof,
                        const std::vector<std::vector<Bytes>>& certificates, bool require_certificates,
                        std::uint64_t now) {
  return {EvidenceKind::ProofInvalid,
          now,
          {{ArtifactTag::Sth, sth.encode()},
           {ArtifactTag::Query, query_bytes(query)},
           {ArtifactTag::Proof, Bytes(proof.begin(), proof.end())},
           {ArtifactTag::Certificates, encode_certificate_lists(certificates)},
           {ArtifactTag::Param, u64_bytes({require_certificates ? 1u : 0u})}}};
}

Evidence evidence_snapshot(const std::optional<SignedTreeHead>& prev, const SignedTreeHead& cur,
                           const std::vector<LogEntry>& batch, std::span<const Digest> consistency,
                           std::uint64_t now) {
  Evidence e{EvidenceKind::SnapshotMismatch,
             now,
             {{ArtifactTag::Sth, cur.encode()},
              {ArtifactTag::Entries, entries_bytes(batch)},
              {ArtifactTag::Consistency, digests_bytes(consistency)}}};
  if (prev) e.artifacts.push_back({ArtifactTag::PrevSth, prev->encode()});
  return e;
}

bool verify_evidence(const Evidence& evidence, const PublicKey& log_key) {
  try {
    return check_recorded(evidence, log_key);
  } catch (const Error&) {
    return false;
  } catch (const VerifyError&) {
    return false;
  }
}

bool verify_evidence(ByteView record, const PublicKey& log_key) {
  try {
    return verify_evidence(Evidence::decode(record), log_key);
  } catch (const Error&) {
    return false;
  }
}

std::vector<LeafValue> check_notification_body(const SignedTreeHead& sth, const WildcardQuery& query,
                                               const WildcardProof& proof,
                                               const std::vector<std::vector<Bytes>>& certificates,
                                               bool require_certificates) {
  check_extensions(sth);
  auto matches = verify(sth_snapshot(sth), query, proof);
  if (certificates.size() != matches.size())
    throw VerifyError(VerifyErrc::Malformed, "certificate lists do not line up with matches");
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (certificates[i].empty()) {
      if (require_certificates) throw VerifyError(VerifyErrc::Malformed, "certificates withheld for " + matches[i].name.str());
      continue;
    }
    if (LeafValue::hash_certificates(certificates[i]) != matches[i].cert_list_hash)
      throw VerifyError(VerifyErrc::Malformed, "certificates do not hash to " + matches[i].name.str());
  }
  return matches;
}

}  // namespace lwm
