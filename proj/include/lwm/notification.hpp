#pragma once

#include <vector>

#include "lwm/logsim.hpp"
#include "lwm/wtree.hpp"

namespace lwm {

/// One per (subscription, STH index). certificates[i] belongs to
/// proof.matches[i]; it is empty for every match when blobs are withheld.
struct Notification {
  SignedTreeHead sth;
  WildcardProof proof;
  std::vector<std::vector<Bytes>> certificates;

  /// 0x01 || u32 sth || u32 proof || u32 count || (u32 n || (u32 blob)*)*
  [[nodiscard]] Bytes encode() const;
  /// Throws Error(MalformedEncoding).
  static Notification decode(ByteView data);

  bool operator==(const Notification&) const = default;
};

/// Encodes one certificate list per match, as carried in evidence records.
Bytes encode_certificate_lists(const std::vector<std::vector<Bytes>>& lists);
std::vector<std::vector<Bytes>> decode_certificate_lists(ByteView data);

}  // namespace lwm
