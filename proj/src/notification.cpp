#include "lwm/notification.hpp"

#include "lwm/error.hpp"

namespace lwm {

namespace {

constexpr std::uint8_t kVersion = 0x01;

void write_lists(ByteWriter& w, const std::vector<std::vector<Bytes>>& lists) {
  w.u32(static_cast<std::uint32_t>(lists.size()));
  for (const auto& l : lists) {
    w.u32(static_cast<std::uint32_t>(l.size()));
    for (const auto& b : l) w.var32(b);
  }
}

std::vector<std::vector<Bytes>> read_lists(ByteReader& r) {
  std::uint32_t n = r.u32();
  if (n > r.remaining() / 4) throw Error(Errc::MalformedEncoding, "certificate list count");
  std::vector<std::vector<Bytes>> out(n);
  for (auto& l : out) {
    std::uint32_t k = r.u32();
    if (k > r.remaining() / 4) throw Error(Errc::MalformedEncoding, "certificate count");
    for (std::uint32_t i = 0; i < k; ++i) {
      auto b = r.var32();
      l.emplace_back(b.begin(), b.end());
    }
  }
  return out;
}

}  // namespace

Bytes Notification::encode() const {
  ByteWriter w;
  w.u8(kVersion);
  w.var32(sth.encode());
  w.var32(proof.encode());
  write_lists(w, certificates);
  return std::move(w).take();
}

Notification Notification::decode(ByteView data) {
  ByteReader r(data);
  if (r.u8() != kVersion) throw Error(Errc::MalformedEncoding, "notification version");
  Notification n;
  n.sth = SignedTreeHead::decode(r.var32());
  n.proof = WildcardProof::decode(r.var32());
  n.certificates = read_lists(r);
  r.expect_done();
  return n;
}

Bytes encode_certificate_lists(const std::vector<std::vector<Bytes>>& lists) {
  ByteWriter w;
  write_lists(w, lists);
  return std::move(w).take();
}

std::vector<std::vector<Bytes>> decode_certificate_lists(ByteView data) {
  ByteReader r(data);
  auto out = read_lists(r);
  r.expect_done();
  return out;
}

}  // namespace lwm
