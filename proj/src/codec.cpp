#include "lwm/codec.hpp"

#include "lwm/error.hpp"

namespace lwm {

namespace {

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(Errc::MalformedEncoding, e.what());
  }
}

Bytes b64(const Json& j) { return base64_decode(j.get<std::string>()); }

}  // namespace

Json to_json(const SignedTreeHead& sth) {
  Json ext = Json::array();
  for (const auto& e : sth.extensions) ext.push_back({{"key", e.key}, {"value", base64_encode(e.value)}});
  return {{"tree_size", sth.tree_size},
          {"timestamp", sth.timestamp},
          {"main_root", base64_encode(sth.main_root.bytes)},
          {"extensions", ext},
          {"signature", base64_encode(sth.signature)}};
}

SignedTreeHead sth_from_json(const Json& j) {
  return guarded([&] {
    SignedTreeHead s;
    s.tree_size = j.at("tree_size").get<std::uint64_t>();
    s.timestamp = j.at("timestamp").get<std::uint64_t>();
    s.main_root = Digest::from(b64(j.at("main_root")));
    for (const auto& e : j.at("extensions")) s.extensions.push_back({e.at("key").get<std::string>(), b64(e.at("value"))});
    s.signature = b64(j.at("signature"));
    return s;
  });
}

Json to_json(const LogEntry& entry) {
  return {{"seq", entry.seq}, {"subject", entry.subject.str()}, {"blob", base64_encode(entry.blob)}};
}

LogEntry entry_from_json(const Json& j) {
  return guarded([&] {
    auto name = j.at("subject").get<std::string>();
    auto subject = SubjectName::parse(name);
    if (subject.str() != name) throw Error(Errc::MalformedEncoding, "non-canonical subject");
    return LogEntry{j.at("seq").get<std::uint64_t>(), std::move(subject), b64(j.at("blob"))};
  });
}

Json to_json(const Notification& n) {
  Json certs = Json::array();
  for (const auto& list : n.certificates) {
    Json l = Json::array();
    for (const auto& b : list) l.push_back(base64_encode(b));
    certs.push_back(std::move(l));
  }
  return {{"sth", to_json(n.sth)}, {"proof", base64_encode(n.proof.encode())}, {"certificates", certs}};
}

Notification notification_from_json(const Json& j) {
  return guarded([&] {
    Notification n;
    n.sth = sth_from_json(j.at("sth"));
    n.proof = WildcardProof::decode(b64(j.at("proof")));
    for (const auto& list : j.at("certificates")) {
      auto& out = n.certificates.emplace_back();
      for (const auto& b : list) out.push_back(b64(b));
    }
    return n;
  });
}

Json to_json(const Evidence& e) {
  Json j = {{"kind", to_string(e.kind)}, {"detected_at", e.detected_at}, {"record", base64_encode(e.encode())}};
  if (auto sth = e.sth()) {
    try {
      j["sth_index"] = sth_index(*sth);
    } catch (const Error&) {
    }
  }
  return j;
}

Evidence evidence_from_json(const Json& j) {
  return guarded([&] { return Evidence::decode(b64(j.at("record"))); });
}

Json digests_to_json(std::span<const Digest> ds) {
  Json out = Json::array();
  for (const auto& d : ds) out.push_back(base64_encode(d.bytes));
  return out;
}

std::vector<Digest> digests_from_json(const Json& j) {
  return guarded([&] {
    std::vector<Digest> out;
    for (const auto& d : j) out.push_back(Digest::from(b64(d)));
    return out;
  });
}

Json parse_json(std::string_view text) {
  return guarded([&] { return Json::parse(text); });
}

std::optional<Errc> errc_from_string(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Errc::Crypto); ++i)
    if (to_string(static_cast<Errc>(i)) == name) return static_cast<Errc>(i);
  return std::nullopt;
}

}  // namespace lwm
