#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lwm/bytes.hpp"
#include "lwm/hashcore.hpp"
#include "lwm/merkle.hpp"
#include "lwm/omega.hpp"

namespace lwm {

/// One leaf of a batch tree: a subject name and a digest over every
/// certificate logged for it in the batch. The name alone orders the leaf.
struct LeafValue {
  SubjectName name;
  Digest cert_list_hash;

  /// u16 name length || name || cert_list_hash
  [[nodiscard]] Bytes serialize() const;
  void write(ByteWriter& w) const;
  static LeafValue read(ByteReader& r);

  /// SHA-256 over the bytewise-sorted SHA-256 digests of the blobs, so the
  /// result does not depend on submission order.
  static Digest hash_certificates(std::span<const Bytes> blobs);

  bool operator==(const LeafValue&) const = default;
};

struct AuditPath {
  std::uint64_t leaf_index = 0;
  std::vector<Digest> siblings;  // leaf to root

  bool operator==(const AuditPath&) const = default;
};

struct Boundary {
  LeafValue leaf;
  AuditPath path;

  bool operator==(const Boundary&) const = default;
};

/// The leaves just outside a query's match range, their audit paths, and the
/// matches in between. Either boundary is absent when the range touches that
/// edge of the tree.
struct WildcardProof {
  static constexpr std::uint8_t kVersion = 0x01;

  std::uint64_t tree_size = 0;
  std::uint64_t match_lo = 0;
  std::vector<LeafValue> matches;
  std::optional<Boundary> left;
  std::optional<Boundary> right;

  [[nodiscard]] std::size_t sibling_count() const;
  [[nodiscard]] Bytes encode() const;
  /// Throws Error(MalformedEncoding).
  static WildcardProof decode(ByteView data);

  bool operator==(const WildcardProof&) const = default;
};

/// What the log signs per batch: (root, constant, batch size).
struct Snapshot {
  static constexpr std::uint8_t kVersion = 0x01;
  static constexpr std::size_t kEncodedSize = 1 + BatchConstant::kSize + 8 + Digest::kSize;

  Digest root;
  BatchConstant constant;
  std::uint64_t batch_size = 0;

  /// version || constant || batch_size:u64 || root
  [[nodiscard]] Bytes encode() const;
  static Snapshot decode(ByteView data);

  bool operator==(const Snapshot&) const = default;
};

using CertificateMap = std::map<SubjectName, std::vector<Bytes>>;

/// Static Merkle tree over one batch, leaves in Ω order, all hashes cached.
/// Immutable after construction; prove() is safe to call concurrently.
class WildTree {
 public:
  static WildTree build(const BatchConstant& constant, const CertificateMap& entries);
  /// Throws Error(DuplicateName) if two leaves share a name.
  static WildTree from_leaves(const BatchConstant& constant, std::vector<LeafValue> leaves);

  [[nodiscard]] Snapshot snapshot() const { return {root_, constant_, size()}; }
  [[nodiscard]] WildcardProof prove(const WildcardQuery& query) const;
  [[nodiscard]] MatchRange find(const WildcardQuery& query) const;

  [[nodiscard]] const BatchConstant& constant() const { return constant_; }
  [[nodiscard]] const Digest& root() const { return root_; }
  [[nodiscard]] std::uint64_t size() const { return leaves_.size(); }
  [[nodiscard]] const std::vector<LeafValue>& leaves() const { return leaves_; }
  [[nodiscard]] const merkle::HashLevels& hashes() const { return levels_; }

 private:
  WildTree(const BatchConstant& c, std::vector<LeafValue> sorted);

  BatchConstant constant_;
  std::vector<LeafValue> leaves_;
  merkle::HashLevels levels_;
  Digest root_;
};

enum class VerifyErrc { SizeMismatch, BoundaryMissing, OrderViolation, RootMismatch, Malformed };

std::string_view to_string(VerifyErrc kind);

class VerifyError : public std::runtime_error {
 public:
  VerifyError(VerifyErrc kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  [[nodiscard]] VerifyErrc kind() const noexcept { return kind_; }

 private:
  VerifyErrc kind_;
};

/// Checks a proof against a signed snapshot for the verifier's own query and
/// returns the matches. Success means no other leaf of the committed tree
/// matches the query. Throws VerifyError.
std::vector<LeafValue> verify(const Snapshot& snapshot, const WildcardQuery& query,
                              const WildcardProof& proof);

}  // namespace lwm
