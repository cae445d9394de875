#include "lwm/hashcore.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>

#include "lwm/error.hpp"

namespace lwm {

Digest Digest::from(ByteView v) {
  if (v.size() != kSize) throw Error(Errc::MalformedEncoding, "digest must be 32 bytes");
  Digest d;
  std::copy(v.begin(), v.end(), d.bytes.begin());
  return d;
}

BatchConstant BatchConstant::from(ByteView v) {
  if (v.size() != kSize) throw Error(Errc::MalformedEncoding, "batch constant must be 16 bytes");
  BatchConstant c;
  std::copy(v.begin(), v.end(), c.bytes.begin());
  return c;
}

BatchConstant BatchConstant::random() {
  BatchConstant c;
  if (RAND_bytes(c.bytes.data(), static_cast<int>(c.bytes.size())) != 1)
    throw Error(Errc::Crypto, "RAND_bytes failed");
  return c;
}

Digest sha256(ByteView data) {
  Digest d;
  SHA256(data.data(), data.size(), d.bytes.data());
  return d;
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
    throw Error(Errc::Crypto, "sha256 init");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(ByteView data) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
  return *this;
}

Digest Sha256::finish() {
  Digest d;
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), d.bytes.data(), &len);
  return d;
}

// The fixed-shape hashes below go through the low-level SHA256_* API: the EVP
// context allocation dominates for 50-byte preimages.
#if defined(__GNUC__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-declarations"
#endif

Digest leaf_hash(const BatchConstant& c, ByteView v) {
  SHA256_CTX ctx;
  SHA256_Init(&ctx);
  SHA256_Update(&ctx, &kLeafPrefix, 1);
  SHA256_Update(&ctx, c.bytes.data(), c.bytes.size());
  SHA256_Update(&ctx, v.data(), v.size());
  Digest d;
  SHA256_Final(d.bytes.data(), &ctx);
  return d;
}

Digest node_hash(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 1 + 2 * Digest::kSize> buf;
  buf[0] = kNodePrefix;
  std::copy(left.bytes.begin(), left.bytes.end(), buf.begin() + 1);
  std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 1 + Digest::kSize);
  Digest d;
  SHA256(buf.data(), buf.size(), d.bytes.data());
  return d;
}

Digest empty_hash(const BatchConstant& c) {
  std::array<std::uint8_t, 1 + BatchConstant::kSize> buf;
  buf[0] = kEmptyPrefix;
  std::copy(c.bytes.begin(), c.bytes.end(), buf.begin() + 1);
  return sha256(buf);
}

Digest rfc6962_leaf_hash(ByteView v) {
  SHA256_CTX ctx;
  SHA256_Init(&ctx);
  SHA256_Update(&ctx, &kLeafPrefix, 1);
  SHA256_Update(&ctx, v.data(), v.size());
  Digest d;
  SHA256_Final(d.bytes.data(), &ctx);
  return d;
}

#if defined(__GNUC__)
#pragma GCC diagnostic pop
#endif

Digest rfc6962_empty_root() { return sha256({}); }

}  // namespace lwm
