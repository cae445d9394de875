#pragma once

#include <array>
#include <filesystem>
#include <memory>

#include "lwm/bytes.hpp"

namespace lwm {

/// Raw 32-byte Ed25519 public key.
struct PublicKey {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};

  [[nodiscard]] bool verify(ByteView message, ByteView signature) const;

  static PublicKey from(ByteView raw);
  /// File holds the base64 of the raw key.
  static PublicKey load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  bool operator==(const PublicKey&) const = default;
};

/// Ed25519 private key, kept as its 32-byte seed.
class SigningKey {
 public:
  static SigningKey generate();
  static SigningKey from_seed(ByteView seed);
  static SigningKey load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  [[nodiscard]] Bytes sign(ByteView message) const;
  [[nodiscard]] const PublicKey& public_key() const { return public_; }

 private:
  SigningKey() = default;

  std::array<std::uint8_t, 32> seed_{};
  PublicKey public_;
};

/// Bytes from the OpenSSL CSPRNG.
Bytes random_bytes(std::size_t n);

}  // namespace lwm
