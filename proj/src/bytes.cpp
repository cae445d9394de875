#include "lwm/bytes.hpp"

#include <openssl/evp.h>

#include <limits>

#include "lwm/error.hpp"

namespace lwm {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedName: return "MalformedName";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::MalformedEncoding: return "MalformedEncoding";
    case Errc::RateLimited: return "RateLimited";
    case Errc::RangeError: return "RangeError";
    case Errc::LogUnreachable: return "LogUnreachable";
    case Errc::IndexGapUnfillable: return "IndexGapUnfillable";
    case Errc::SnapshotMismatch: return "SnapshotMismatch";
    case Errc::BatchEvicted: return "BatchEvicted";
    case Errc::UnknownSubscription: return "UnknownSubscription";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::CorpusMissing: return "CorpusMissing";
    case Errc::Config: return "Config";
    case Errc::Io: return "Io";
    case Errc::Crypto: return "Crypto";
  }
  return "Unknown";
}

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::MalformedEncoding, "odd-length hex");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::MalformedEncoding, "bad hex digit");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

std::string base64_encode(ByteView data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                          static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(Errc::MalformedEncoding, "base64 length");
  Bytes out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw Error(Errc::MalformedEncoding, "base64 alphabet");
  // EVP_DecodeBlock keeps the zero bytes produced by padding.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

void ByteWriter::u16(std::uint16_t v) {
  u8(static_cast<std::uint8_t>(v >> 8));
  u8(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) u8(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::var16(ByteView data) {
  if (data.size() > std::numeric_limits<std::uint16_t>::max())
    throw Error(Errc::MalformedEncoding, "field exceeds u16 length");
  u16(static_cast<std::uint16_t>(data.size()));
  raw(data);
}

void ByteWriter::var32(ByteView data) {
  if (data.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(Errc::MalformedEncoding, "field exceeds u32 length");
  u32(static_cast<std::uint32_t>(data.size()));
  raw(data);
}

ByteView ByteReader::raw(std::size_t n) {
  if (n > remaining()) throw Error(Errc::MalformedEncoding, "truncated input");
  auto v = data_.subspan(pos_, n);
  pos_ += n;
  return v;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto v = raw(2);
  return static_cast<std::uint16_t>(v[0] << 8 | v[1]);
}

std::uint32_t ByteReader::u32() {
  auto v = raw(4);
  std::uint32_t out = 0;
  for (auto b : v) out = out << 8 | b;
  return out;
}

std::uint64_t ByteReader::u64() {
  auto v = raw(8);
  std::uint64_t out = 0;
  for (auto b : v) out = out << 8 | b;
  return out;
}

void ByteReader::expect_done() const {
  if (!done()) throw Error(Errc::MalformedEncoding, "trailing bytes");
}

}  // namespace lwm
