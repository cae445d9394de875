#include "lwm/wtree.hpp"

#include <algorithm>

#include "lwm/error.hpp"

namespace lwm {

void LeafValue::write(ByteWriter& w) const {
  w.var16(as_bytes(name.str()));
  w.raw(cert_list_hash.bytes);
}

Bytes LeafValue::serialize() const {
  ByteWriter w;
  write(w);
  return std::move(w).take();
}

LeafValue LeafValue::read(ByteReader& r) {
  auto name = r.var16();
  std::string_view text(reinterpret_cast<const char*>(name.data()), name.size());
  LeafValue v{SubjectName::parse(text), Digest::from(r.raw(Digest::kSize))};
  // Only canonical names are accepted so the encoding stays injective.
  if (v.name.str() != text) throw Error(Errc::MalformedEncoding, "non-canonical leaf name");
  return v;
}

Digest LeafValue::hash_certificates(std::span<const Bytes> blobs) {
  std::vector<Digest> digests;
  digests.reserve(blobs.size());
  for (const auto& b : blobs) digests.push_back(sha256(b));
  std::sort(digests.begin(), digests.end());
  Sha256 h;
  for (const auto& d : digests) h.update(d.bytes);
  return h.finish();
}

std::size_t WildcardProof::sibling_count() const {
  return (left ? left->path.siblings.size() : 0) + (right ? right->path.siblings.size() : 0);
}

Bytes WildcardProof::encode() const {
  ByteWriter w;
  w.u8(kVersion);
  w.u64(tree_size);
  w.u64(match_lo);
  w.u32(static_cast<std::uint32_t>(matches.size()));
  for (const auto& m : matches) m.write(w);
  w.u8(static_cast<std::uint8_t>((left ? 1 : 0) | (right ? 2 : 0)));
  if (left) left->leaf.write(w);
  if (right) right->leaf.write(w);
  if (left) w.u16(static_cast<std::uint16_t>(left->path.siblings.size()));
  if (right) w.u16(static_cast<std::uint16_t>(right->path.siblings.size()));
  if (left)
    for (const auto& d : left->path.siblings) w.raw(d.bytes);
  if (right)
    for (const auto& d : right->path.siblings) w.raw(d.bytes);
  return std::move(w).take();
}

WildcardProof WildcardProof::decode(ByteView data) {
  ByteReader r(data);
  if (r.u8() != kVersion) throw Error(Errc::MalformedEncoding, "unknown proof version");
  WildcardProof p;
  p.tree_size = r.u64();
  p.match_lo = r.u64();
  std::uint32_t count = r.u32();
  // Each serialized leaf takes at least 35 bytes; reject counts the buffer
  // cannot hold before reserving.
  if (count > r.remaining() / 35) throw Error(Errc::MalformedEncoding, "match count exceeds input");
  p.matches.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) p.matches.push_back(LeafValue::read(r));
  std::uint8_t flags = r.u8();
  if (flags & ~0x03) throw Error(Errc::MalformedEncoding, "unknown presence flags");
  if (flags & 1) {
    if (p.match_lo == 0) throw Error(Errc::MalformedEncoding, "left boundary before index 0");
    p.left = Boundary{LeafValue::read(r), {p.match_lo - 1, {}}};
  }
  if (flags & 2) p.right = Boundary{LeafValue::read(r), {p.match_lo + count, {}}};
  std::uint16_t left_len = p.left ? r.u16() : 0;
  std::uint16_t right_len = p.right ? r.u16() : 0;
  for (std::uint16_t i = 0; i < left_len; ++i) p.left->path.siblings.push_back(Digest::from(r.raw(Digest::kSize)));
  for (std::uint16_t i = 0; i < right_len; ++i) p.right->path.siblings.push_back(Digest::from(r.raw(Digest::kSize)));
  r.expect_done();
  return p;
}

Bytes Snapshot::encode() const {
  ByteWriter w;
  w.u8(kVersion);
  w.raw(constant.bytes);
  w.u64(batch_size);
  w.raw(root.bytes);
  return std::move(w).take();
}

Snapshot Snapshot::decode(ByteView data) {
  ByteReader r(data);
  if (r.u8() != kVersion) throw Error(Errc::MalformedEncoding, "unknown snapshot version");
  Snapshot s;
  s.constant = BatchConstant::from(r.raw(BatchConstant::kSize));
  s.batch_size = r.u64();
  s.root = Digest::from(r.raw(Digest::kSize));
  r.expect_done();
  return s;
}

WildTree::WildTree(const BatchConstant& c, std::vector<LeafValue> sorted)
    : constant_(c), leaves_(std::move(sorted)) {
  std::vector<Digest> hashes;
  hashes.reserve(leaves_.size());
  for (const auto& leaf : leaves_) hashes.push_back(leaf_hash(constant_, leaf.serialize()));
  levels_ = merkle::HashLevels(std::move(hashes));
  root_ = levels_.root(leaves_.size(), empty_hash(constant_));
}

WildTree WildTree::from_leaves(const BatchConstant& constant, std::vector<LeafValue> leaves) {
  std::vector<std::pair<std::string, std::size_t>> keyed;
  keyed.reserve(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i)
    keyed.emplace_back(std::string(leaves[i].name.str().rbegin(), leaves[i].name.str().rend()), i);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return omega_compare(a.first, b.first) < 0; });
  std::vector<LeafValue> sorted;
  sorted.reserve(leaves.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first == keyed[i - 1].first)
      throw Error(Errc::DuplicateName, leaves[keyed[i].second].name.str());
    sorted.push_back(std::move(leaves[keyed[i].second]));
  }
  return WildTree(constant, std::move(sorted));
}

WildTree WildTree::build(const BatchConstant& constant, const CertificateMap& entries) {
  std::vector<LeafValue> leaves;
  leaves.reserve(entries.size());
  for (const auto& [name, blobs] : entries) leaves.push_back({name, LeafValue::hash_certificates(blobs)});
  return from_leaves(constant, std::move(leaves));
}

MatchRange WildTree::find(const WildcardQuery& query) const {
  return resolve_range(query, leaves_, [](const LeafValue& v) -> const SubjectName& { return v.name; });
}

WildcardProof WildTree::prove(const WildcardQuery& query) const {
  WildcardProof p;
  p.tree_size = size();
  if (leaves_.empty()) return p;
  auto range = find(query);
  p.match_lo = range.lo;
  p.matches.assign(leaves_.begin() + static_cast<std::ptrdiff_t>(range.lo),
                   leaves_.begin() + static_cast<std::ptrdiff_t>(range.hi));
  if (range.lo > 0) {
    std::uint64_t i = range.lo - 1;
    p.left = Boundary{leaves_[i], {i, levels_.audit_path(i, size())}};
  }
  if (range.hi < size()) {
    std::uint64_t i = range.hi;
    p.right = Boundary{leaves_[i], {i, levels_.audit_path(i, size())}};
  }
  return p;
}

std::string_view to_string(VerifyErrc kind) {
  switch (kind) {
    case VerifyErrc::SizeMismatch: return "SizeMismatch";
    case VerifyErrc::BoundaryMissing: return "BoundaryMissing";
    case VerifyErrc::OrderViolation: return "OrderViolation";
    case VerifyErrc::RootMismatch: return "RootMismatch";
    case VerifyErrc::Malformed: return "Malformed";
  }
  return "Unknown";
}

namespace {

std::string reversed(const SubjectName& n) { return {n.str().rbegin(), n.str().rend()}; }

void check_order(const WildcardQuery& query, const WildcardProof& proof) {
  const std::string& key = query.lower_key();
  std::optional<std::string> prev;
  auto step = [&](const SubjectName& name) {
    std::string r = reversed(name);
    if (prev && omega_compare(*prev, r) >= 0)
      throw VerifyError(VerifyErrc::OrderViolation, "leaves not strictly increasing at " + name.str());
    prev = std::move(r);
  };
  if (proof.left) {
    const auto& name = proof.left->leaf.name;
    if (query.matches(name) || omega_compare_to_key(name, key) >= 0)
      throw VerifyError(VerifyErrc::OrderViolation, "left boundary not below the query range");
    step(name);
  }
  for (const auto& m : proof.matches) {
    if (!query.matches(m.name)) throw VerifyError(VerifyErrc::OrderViolation, "non-matching leaf " + m.name.str());
    step(m.name);
  }
  if (proof.right) {
    const auto& name = proof.right->leaf.name;
    if (query.matches(name) || omega_compare_to_key(name, key) < 0)
      throw VerifyError(VerifyErrc::OrderViolation, "right boundary not above the query range");
    step(name);
  }
}

void collect_outside(const Boundary& b, std::uint64_t n, merkle::NodeRange span,
                     std::vector<merkle::KnownNode>& known) {
  auto ranges = merkle::path_ranges(b.path.leaf_index, n);
  if (ranges.size() != b.path.siblings.size())
    throw VerifyError(VerifyErrc::Malformed, "audit path length does not fit tree size");
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    if (r.end <= span.begin || r.begin >= span.end) known.push_back({r, b.path.siblings[i]});
  }
}

}  // namespace

std::vector<LeafValue> verify(const Snapshot& snapshot, const WildcardQuery& query,
                              const WildcardProof& proof) {
  const std::uint64_t n = proof.tree_size;
  if (n != snapshot.batch_size) throw VerifyError(VerifyErrc::SizeMismatch, "proof and snapshot sizes differ");

  if (n == 0) {
    if (proof.left || proof.right || !proof.matches.empty() || proof.match_lo != 0)
      throw VerifyError(VerifyErrc::Malformed, "non-empty proof for an empty batch");
    if (empty_hash(snapshot.constant) != snapshot.root)
      throw VerifyError(VerifyErrc::RootMismatch, "empty batch root");
    return {};
  }

  const std::uint64_t lo = proof.match_lo;
  const std::uint64_t t = proof.matches.size();
  if (lo > n || t > n - lo) throw VerifyError(VerifyErrc::Malformed, "match range outside tree");
  const std::uint64_t hi = lo + t;

  if (lo > 0 && !proof.left) throw VerifyError(VerifyErrc::BoundaryMissing, "left boundary absent");
  if (hi < n && !proof.right) throw VerifyError(VerifyErrc::BoundaryMissing, "right boundary absent");
  if (lo == 0 && proof.left) throw VerifyError(VerifyErrc::Malformed, "left boundary at tree edge");
  if (hi == n && proof.right) throw VerifyError(VerifyErrc::Malformed, "right boundary at tree edge");
  if (proof.left && proof.left->path.leaf_index != lo - 1)
    throw VerifyError(VerifyErrc::BoundaryMissing, "left boundary not adjacent to the range");
  if (proof.right && proof.right->path.leaf_index != hi)
    throw VerifyError(VerifyErrc::BoundaryMissing, "right boundary not adjacent to the range");

  check_order(query, proof);

  // The known span runs from the left boundary (or index 0) through the right
  // boundary (or the last leaf).
  merkle::NodeRange span{proof.left ? lo - 1 : lo, proof.right ? hi + 1 : hi};
  std::vector<Digest> span_hashes;
  span_hashes.reserve(span.size());
  if (proof.left) span_hashes.push_back(leaf_hash(snapshot.constant, proof.left->leaf.serialize()));
  for (const auto& m : proof.matches) span_hashes.push_back(leaf_hash(snapshot.constant, m.serialize()));
  if (proof.right) span_hashes.push_back(leaf_hash(snapshot.constant, proof.right->leaf.serialize()));

  // Siblings outside the span fill the gaps; siblings the span already covers
  // are redundant and get checked by re-deriving the root from each path.
  std::vector<merkle::KnownNode> known;
  if (proof.left) collect_outside(*proof.left, n, span, known);
  if (proof.right) collect_outside(*proof.right, n, span, known);
  for (std::size_t i = 0; i < known.size(); ++i)
    for (std::size_t j = i + 1; j < known.size(); ++j)
      if (known[i].range == known[j].range && known[i].digest != known[j].digest)
        throw VerifyError(VerifyErrc::RootMismatch, "boundary paths disagree on a shared sibling");

  auto root = merkle::reconstruct(n, span.begin, span_hashes, known);
  if (!root) throw VerifyError(VerifyErrc::Malformed, "proof lacks a sibling needed for the root");
  if (*root != snapshot.root) throw VerifyError(VerifyErrc::RootMismatch, "reconstructed root differs");

  if (proof.left) {
    auto r = merkle::root_from_path(lo - 1, n, span_hashes.front(), proof.left->path.siblings);
    if (!r || *r != snapshot.root) throw VerifyError(VerifyErrc::RootMismatch, "left audit path inconsistent");
  }
  if (proof.right) {
    auto r = merkle::root_from_path(hi, n, span_hashes.back(), proof.right->path.siblings);
    if (!r || *r != snapshot.root) throw VerifyError(VerifyErrc::RootMismatch, "right audit path inconsistent");
  }
  return proof.matches;
}

}  // namespace lwm
