#pragma once

// Tree-shape arithmetic shared by the main log tree and the per-batch
// wild-card trees. Both use the RFC 6962 shape: a tree over n > 1 leaves
// splits at the largest power of two strictly below n.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lwm/hashcore.hpp"

namespace lwm::merkle {

/// Half-open leaf interval [begin, end) covered by one tree node.
struct NodeRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  [[nodiscard]] std::uint64_t size() const { return end - begin; }
  bool operator==(const NodeRange&) const = default;
};

struct KnownNode {
  NodeRange range;
  Digest digest;
};

/// Largest power of two strictly less than n (n >= 2).
std::uint64_t split_point(std::uint64_t n);
unsigned ceil_log2(std::uint64_t n);

/// Ranges of the audit-path siblings of leaf `index` in a tree of `size`,
/// ordered leaf to root.
std::vector<NodeRange> path_ranges(std::uint64_t index, std::uint64_t size);

/// Ranges of the nodes in a consistency proof from old_size to new_size,
/// in proof order. Requires 0 < old_size <= new_size.
std::vector<NodeRange> consistency_ranges(std::uint64_t old_size, std::uint64_t new_size);

/// Rebuilds the root of a tree of `size` leaves. Leaves
/// [span_begin, span_begin + span_leaves.size()) are known by hash; every other
/// node that is needed must be supplied in `known`. A node fully inside the
/// span is always recomputed, never taken from `known`. Returns nullopt when a
/// needed node is missing.
std::optional<Digest> reconstruct(std::uint64_t size, std::uint64_t span_begin,
                                  std::span<const Digest> span_leaves,
                                  std::span<const KnownNode> known);

/// Root from a single leaf and its audit path; nullopt if the path length does
/// not fit the tree shape.
std::optional<Digest> root_from_path(std::uint64_t index, std::uint64_t size, const Digest& leaf,
                                     std::span<const Digest> siblings);

bool verify_consistency(std::uint64_t old_size, std::uint64_t new_size, const Digest& old_root,
                        const Digest& new_root, std::span<const Digest> proof);

/// Caches the hash of every complete, aligned power-of-two subtree so that
/// roots of any prefix, audit paths and consistency proofs cost O(log n).
class HashLevels {
 public:
  HashLevels() = default;
  explicit HashLevels(std::vector<Digest> leaves);

  void append(const Digest& leaf);

  [[nodiscard]] std::uint64_t size() const { return levels_.empty() ? 0 : levels_[0].size(); }
  [[nodiscard]] const Digest& leaf(std::uint64_t i) const { return levels_[0][i]; }
  [[nodiscard]] std::span<const Digest> leaves() const;

  /// Hash of any node of the RFC 6962 tree over the first `range.end` leaves.
  [[nodiscard]] Digest subtree(NodeRange range) const;
  /// Root over the first `tree_size` leaves; `empty` when tree_size == 0.
  [[nodiscard]] Digest root(std::uint64_t tree_size, const Digest& empty) const;
  [[nodiscard]] std::vector<Digest> audit_path(std::uint64_t index, std::uint64_t tree_size) const;
  [[nodiscard]] std::vector<Digest> consistency_proof(std::uint64_t old_size,
                                                      std::uint64_t new_size) const;

 private:
  void rebuild_spine();

  std::vector<std::vector<Digest>> levels_;
  // Ragged subtrees {begin, size()} on the right edge, keyed by begin.
  std::vector<std::pair<std::uint64_t, Digest>> spine_;
};

}  // namespace lwm::merkle
