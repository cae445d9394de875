#include "lwm/merkle.hpp"

#include <algorithm>
#include <bit>

#include "lwm/error.hpp"

namespace lwm::merkle {

std::uint64_t split_point(std::uint64_t n) {
  // bit_floor(n - 1) is the largest power of two <= n - 1, i.e. < n.
  return std::bit_floor(n - 1);
}

unsigned ceil_log2(std::uint64_t n) {
  if (n <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(n - 1));
}

std::vector<NodeRange> path_ranges(std::uint64_t index, std::uint64_t size) {
  if (index >= size) throw Error(Errc::RangeError, "leaf index outside tree");
  std::vector<NodeRange> out;
  std::uint64_t begin = 0;
  std::uint64_t end = size;
  while (end - begin > 1) {
    std::uint64_t mid = begin + split_point(end - begin);
    if (index < mid) {
      out.push_back({mid, end});
      end = mid;
    } else {
      out.push_back({begin, mid});
      begin = mid;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

void subproof(std::uint64_t m, NodeRange node, bool whole, std::vector<NodeRange>& out) {
  if (m == node.size()) {
    if (!whole) out.push_back(node);
    return;
  }
  std::uint64_t k = split_point(node.size());
  if (m <= k) {
    subproof(m, {node.begin, node.begin + k}, whole, out);
    out.push_back({node.begin + k, node.end});
  } else {
    subproof(m - k, {node.begin + k, node.end}, false, out);
    out.push_back({node.begin, node.begin + k});
  }
}

class Rebuilder {
 public:
  Rebuilder(std::uint64_t span_begin, std::span<const Digest> leaves,
            std::span<const KnownNode> known)
      : span_begin_(span_begin), span_end_(span_begin + leaves.size()), leaves_(leaves),
        known_(known) {}

  std::optional<Digest> node(NodeRange r) const {
    if (!leaves_.empty() && r.begin >= span_begin_ && r.end <= span_end_) return inside(r);
    bool overlaps = !leaves_.empty() && r.begin < span_end_ && r.end > span_begin_;
    if (!overlaps) {
      for (const auto& k : known_)
        if (k.range == r) return k.digest;
      // Only descend into a disjoint node if something known lies below it;
      // otherwise a hostile tree size could force an unbounded walk.
      bool has_descendant = std::any_of(known_.begin(), known_.end(), [&](const KnownNode& k) {
        return k.range.begin >= r.begin && k.range.end <= r.end;
      });
      if (!has_descendant) return std::nullopt;
    }
    if (r.size() == 1) return std::nullopt;
    std::uint64_t k = split_point(r.size());
    auto left = node({r.begin, r.begin + k});
    if (!left) return std::nullopt;
    auto right = node({r.begin + k, r.end});
    if (!right) return std::nullopt;
    return node_hash(*left, *right);
  }

 private:
  Digest inside(NodeRange r) const {
    if (r.size() == 1) return leaves_[r.begin - span_begin_];
    std::uint64_t k = split_point(r.size());
    return node_hash(inside({r.begin, r.begin + k}), inside({r.begin + k, r.end}));
  }

  std::uint64_t span_begin_;
  std::uint64_t span_end_;
  std::span<const Digest> leaves_;
  std::span<const KnownNode> known_;
};

}  // namespace

std::vector<NodeRange> consistency_ranges(std::uint64_t old_size, std::uint64_t new_size) {
  if (old_size == 0 || old_size > new_size)
    throw Error(Errc::RangeError, "consistency proof needs 0 < old <= new");
  std::vector<NodeRange> out;
  subproof(old_size, {0, new_size}, true, out);
  return out;
}

std::optional<Digest> reconstruct(std::uint64_t size, std::uint64_t span_begin,
                                  std::span<const Digest> span_leaves,
                                  std::span<const KnownNode> known) {
  if (size == 0) return std::nullopt;
  if (span_begin > size || span_leaves.size() > size - span_begin) return std::nullopt;
  return Rebuilder(span_begin, span_leaves, known).node({0, size});
}

std::optional<Digest> root_from_path(std::uint64_t index, std::uint64_t size, const Digest& leaf,
                                     std::span<const Digest> siblings) {
  if (index >= size) return std::nullopt;
  auto ranges = path_ranges(index, size);
  if (ranges.size() != siblings.size()) return std::nullopt;
  Digest acc = leaf;
  NodeRange cur{index, index + 1};
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].end == cur.begin) {
      acc = node_hash(siblings[i], acc);
      cur.begin = ranges[i].begin;
    } else {
      acc = node_hash(acc, siblings[i]);
      cur.end = ranges[i].end;
    }
  }
  return acc;
}

bool verify_consistency(std::uint64_t old_size, std::uint64_t new_size, const Digest& old_root,
                        const Digest& new_root, std::span<const Digest> proof) {
  if (old_size == 0 || old_size > new_size) return false;
  if (old_size == new_size) return proof.empty() && old_root == new_root;
  auto ranges = consistency_ranges(old_size, new_size);
  if (ranges.size() != proof.size()) return false;
  std::vector<KnownNode> known;
  known.reserve(ranges.size() + 1);
  for (std::size_t i = 0; i < ranges.size(); ++i) known.push_back({ranges[i], proof[i]});
  // When the old tree is a complete left subtree of the new one, its root is
  // the first node and the proof omits it.
  if (std::none_of(known.begin(), known.end(),
                   [&](const KnownNode& k) { return k.range == NodeRange{0, old_size}; }) &&
      std::has_single_bit(old_size)) {
    bool aligned = true;
    for (std::uint64_t b = 0, e = new_size; e - b > old_size;) {
      std::uint64_t k = split_point(e - b);
      if (old_size > k) { aligned = false; break; }
      e = b + k;
    }
    if (aligned) known.push_back({{0, old_size}, old_root});
  }
  auto old_calc = reconstruct(old_size, 0, {}, known);
  auto new_calc = reconstruct(new_size, 0, {}, known);
  return old_calc && new_calc && *old_calc == old_root && *new_calc == new_root;
}

HashLevels::HashLevels(std::vector<Digest> leaves) {
  levels_.push_back(std::move(leaves));
  for (std::size_t j = 0; levels_[j].size() >= 2; ++j) {
    const auto& below = levels_[j];
    std::vector<Digest> next;
    next.reserve(below.size() / 2);
    for (std::size_t i = 0; i + 1 < below.size(); i += 2) next.push_back(node_hash(below[i], below[i + 1]));
    levels_.push_back(std::move(next));
  }
  rebuild_spine();
}

void HashLevels::rebuild_spine() {
  spine_.clear();
  const std::uint64_t n = size();
  std::vector<std::uint64_t> begins;
  for (std::uint64_t b = 0; b < n && !(std::has_single_bit(n - b) && b % (n - b) == 0); b += split_point(n - b))
    begins.push_back(b);
  spine_.resize(begins.size());
  for (std::size_t i = begins.size(); i-- > 0;) {
    const std::uint64_t b = begins[i];
    const std::uint64_t k = split_point(n - b);
    const auto& left = levels_[static_cast<std::size_t>(std::countr_zero(k))][b / k];
    Digest right;
    if (i + 1 < begins.size()) {
      right = spine_[i + 1].second;
    } else {
      const std::uint64_t m = n - b - k;
      right = levels_[static_cast<std::size_t>(std::countr_zero(m))][(b + k) / m];
    }
    spine_[i] = {b, node_hash(left, right)};
  }
}

void HashLevels::append(const Digest& leaf) {
  if (levels_.empty()) levels_.emplace_back();
  levels_[0].push_back(leaf);
  for (std::size_t j = 0; levels_[j].size() % 2 == 0; ++j) {
    if (levels_.size() == j + 1) levels_.emplace_back();
    const auto& below = levels_[j];
    levels_[j + 1].push_back(node_hash(below[below.size() - 2], below.back()));
  }
  rebuild_spine();
}

std::span<const Digest> HashLevels::leaves() const {
  if (levels_.empty()) return {};
  return levels_[0];
}

Digest HashLevels::subtree(NodeRange range) const {
  if (range.end > size() || range.begin >= range.end) throw Error(Errc::RangeError, "subtree outside tree");
  std::uint64_t n = range.size();
  if (std::has_single_bit(n) && range.begin % n == 0) {
    auto level = static_cast<std::size_t>(std::countr_zero(n));
    return levels_[level][range.begin / n];
  }
  if (range.end == size())
    for (const auto& [begin, digest] : spine_)
      if (begin == range.begin) return digest;
  std::uint64_t k = split_point(n);
  return node_hash(subtree({range.begin, range.begin + k}), subtree({range.begin + k, range.end}));
}

Digest HashLevels::root(std::uint64_t tree_size, const Digest& empty) const {
  if (tree_size == 0) return empty;
  return subtree({0, tree_size});
}

std::vector<Digest> HashLevels::audit_path(std::uint64_t index, std::uint64_t tree_size) const {
  if (tree_size > size()) throw Error(Errc::RangeError, "tree size beyond cached leaves");
  std::vector<Digest> out;
  for (const auto& r : path_ranges(index, tree_size)) out.push_back(subtree(r));
  return out;
}

std::vector<Digest> HashLevels::consistency_proof(std::uint64_t old_size, std::uint64_t new_size) const {
  if (new_size > size()) throw Error(Errc::RangeError, "tree size beyond cached leaves");
  if (old_size == new_size && old_size > 0) return {};
  std::vector<Digest> out;
  for (const auto& r : consistency_ranges(old_size, new_size)) out.push_back(subtree(r));
  return out;
}

}  // namespace lwm::merkle
