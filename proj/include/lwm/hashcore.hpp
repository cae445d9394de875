#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "lwm/bytes.hpp"

namespace lwm {

/// A SHA-256 output.
struct Digest {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};

  auto operator<=>(const Digest&) const = default;
  [[nodiscard]] std::string hex() const { return to_hex(bytes); }
  static Digest from(ByteView v);
};

/// Per-batch tree-wide constant mixed into leaf and empty hashes so that no
/// preimage is valid in two different batch trees. Public, not secret.
struct BatchConstant {
  static constexpr std::size_t kSize = 16;
  std::array<std::uint8_t, kSize> bytes{};

  auto operator<=>(const BatchConstant&) const = default;
  [[nodiscard]] std::string hex() const { return to_hex(bytes); }
  static BatchConstant from(ByteView v);
  /// Fresh constant from the OpenSSL CSPRNG.
  static BatchConstant random();
};

Digest sha256(ByteView data);

/// Incremental SHA-256 for preimages assembled from several pieces.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(ByteView data);
  Sha256& update(std::uint8_t byte) { return update(ByteView(&byte, 1)); }
  Digest finish();

 private:
  void* ctx_;
};

// Domain separation prefixes. The leaf and interior bytes are the usual CT
// ones; 0x02 extends the scheme to the empty batch tree.
inline constexpr std::uint8_t kLeafPrefix = 0x00;
inline constexpr std::uint8_t kNodePrefix = 0x01;
inline constexpr std::uint8_t kEmptyPrefix = 0x02;

/// SHA-256(0x00 || c || v)
Digest leaf_hash(const BatchConstant& c, ByteView v);
/// SHA-256(0x01 || left || right)
Digest node_hash(const Digest& left, const Digest& right);
/// SHA-256(0x02 || c), root of an empty batch tree.
Digest empty_hash(const BatchConstant& c);

// Plain RFC 6962 hashing for the main log tree, which carries no constant.
Digest rfc6962_leaf_hash(ByteView v);
Digest rfc6962_empty_root();

}  // namespace lwm
