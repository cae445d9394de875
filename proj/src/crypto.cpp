#include "lwm/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <fstream>
#include <sstream>

#include "lwm/error.hpp"

namespace lwm {

namespace {

struct PkeyFree {
  void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
struct MdCtxFree {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyFree>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxFree>;

std::string read_trimmed(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::Io, "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + file.string());
  out << text << "\n";
}

}  // namespace

bool PublicKey::verify(ByteView message, ByteView signature) const {
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, bytes.data(), bytes.size()));
  if (!key) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(), message.size()) == 1;
}

PublicKey PublicKey::from(ByteView raw) {
  if (raw.size() != kSize) throw Error(Errc::MalformedEncoding, "public key must be 32 bytes");
  PublicKey k;
  std::copy(raw.begin(), raw.end(), k.bytes.begin());
  return k;
}

PublicKey PublicKey::load(const std::filesystem::path& file) { return from(base64_decode(read_trimmed(file))); }

void PublicKey::save(const std::filesystem::path& file) const { write_text(file, base64_encode(bytes)); }

SigningKey SigningKey::generate() { return from_seed(random_bytes(32)); }

SigningKey SigningKey::from_seed(ByteView seed) {
  if (seed.size() != 32) throw Error(Errc::MalformedEncoding, "Ed25519 seed must be 32 bytes");
  SigningKey k;
  std::copy(seed.begin(), seed.end(), k.seed_.begin());
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, k.seed_.data(), k.seed_.size()));
  if (!key) throw Error(Errc::Crypto, "cannot load Ed25519 key");
  std::size_t len = PublicKey::kSize;
  if (EVP_PKEY_get_raw_public_key(key.get(), k.public_.bytes.data(), &len) != 1)
    throw Error(Errc::Crypto, "cannot derive Ed25519 public key");
  return k;
}

SigningKey SigningKey::load(const std::filesystem::path& file) { return from_seed(base64_decode(read_trimmed(file))); }

void SigningKey::save(const std::filesystem::path& file) const {
  write_text(file, base64_encode(seed_));
  std::filesystem::permissions(file, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                               std::filesystem::perm_options::replace);
}

Bytes SigningKey::sign(ByteView message) const {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed_.data(), seed_.size()));
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!key || !ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
    throw Error(Errc::Crypto, "sign init");
  Bytes sig(64);
  std::size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
    throw Error(Errc::Crypto, "sign");
  sig.resize(len);
  return sig;
}

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (RAND_bytes(out.data(), static_cast<int>(n)) != 1) throw Error(Errc::Crypto, "RAND_bytes failed");
  return out;
}

}  // namespace lwm
