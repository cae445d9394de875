#include "lwm/subject.hpp"

#include <fstream>
#include <sstream>

#include "lwm/error.hpp"
#include "lwm/journal.hpp"

namespace lwm {

Subject::Subject(SubjectConfig config) : config_(std::move(config)) {}

Subject Subject::bootstrap(SubjectConfig config, const SignedTreeHead& trusted) {
  if (!trusted.verify_signature(config.log_key)) throw Error(Errc::Crypto, "trusted STH does not verify");
  Subject s(std::move(config));
  auto idx = sth_index(trusted);
  s.expected_next_index_ = idx + 1;
  s.last_timestamp_ = trusted.timestamp;
  s.accepted_[idx] = trusted;
  return s;
}

VerifyOutcome Subject::reject(Evidence e) {
  VerifyOutcome out;
  out.rejection = e.kind;
  evidence_.push_back(std::move(e));
  return out;
}

VerifyOutcome Subject::verify_notification(const Notification& n, std::uint64_t now) {
  const auto& sth = n.sth;
  if (!sth.verify_signature(config_.log_key)) return reject(evidence_bad_signature(sth, now));

  try {
    check_extensions(sth);
  } catch (const Error&) {
    return reject(evidence_proof(sth, config_.query, n.proof.encode(), n.certificates, config_.require_certificates, now));
  }

  const auto idx = sth_index(sth);
  std::optional<SignedTreeHead> prev;
  if (auto it = accepted_.find(expected_next_index_ - 1); expected_next_index_ > 0 && it != accepted_.end())
    prev = it->second;
  if (idx < expected_next_index_) {
    auto it = accepted_.find(idx);
    if (it != accepted_.end()) {
      if (it->second == sth) return {VerifyOutcome::Status::Duplicate, {}, std::nullopt};
      return reject(evidence_equivocation(it->second, sth, now));
    }
    return reject(evidence_index(EvidenceKind::IndexReplay, prev, sth, expected_next_index_, now));
  }
  if (idx > expected_next_index_)
    return reject(evidence_index(EvidenceKind::IndexGap, prev, sth, expected_next_index_, now));

  if (sth.timestamp < last_timestamp_ || sth.timestamp > now + config_.skew_ms ||
      now > sth.timestamp + config_.window_ms)
    return reject(evidence_stale(sth, now, last_timestamp_, config_.window_ms, config_.skew_ms));

  std::vector<LeafValue> leaves;
  try {
    leaves = check_notification_body(sth, config_.query, n.proof, n.certificates, config_.require_certificates);
  } catch (const VerifyError&) {
    return reject(evidence_proof(sth, config_.query, n.proof.encode(), n.certificates, config_.require_certificates, now));
  } catch (const Error&) {
    return reject(evidence_proof(sth, config_.query, n.proof.encode(), n.certificates, config_.require_certificates, now));
  }

  VerifyOutcome out;
  out.status = VerifyOutcome::Status::Accepted;
  for (std::size_t i = 0; i < leaves.size(); ++i) out.matches.push_back({leaves[i].name, n.certificates[i]});
  accepted_[idx] = sth;
  expected_next_index_ = idx + 1;
  last_timestamp_ = sth.timestamp;
  return out;
}

Bytes Subject::export_evidence() const {
  std::vector<Bytes> recs;
  for (const auto& e : evidence_) recs.push_back(e.encode());
  return journal::pack(recs);
}

Json Subject::to_json() const {
  Json accepted = Json::object();
  for (const auto& [idx, sth] : accepted_) accepted[std::to_string(idx)] = base64_encode(sth.encode());
  Json ev = Json::array();
  for (const auto& e : evidence_) ev.push_back(lwm::to_json(e));
  return {{"log_key", base64_encode(config_.log_key.bytes)},
          {"query", config_.query.raw()},
          {"apex_included", config_.query.apex_included()},
          {"window_ms", config_.window_ms},
          {"skew_ms", config_.skew_ms},
          {"require_certificates", config_.require_certificates},
          {"expected_next_index", expected_next_index_},
          {"last_timestamp", last_timestamp_},
          {"accepted", accepted},
          {"evidence", ev}};
}

Subject Subject::from_json(const Json& j) {
  try {
    SubjectConfig c;
    c.log_key = PublicKey::from(base64_decode(j.at("log_key").get<std::string>()));
    c.query = WildcardQuery::parse(j.at("query").get<std::string>(), j.value("apex_included", true));
    c.window_ms = j.at("window_ms").get<std::uint64_t>();
    c.skew_ms = j.at("skew_ms").get<std::uint64_t>();
    c.require_certificates = j.value("require_certificates", true);
    Subject s(std::move(c));
    s.expected_next_index_ = j.at("expected_next_index").get<std::uint64_t>();
    s.last_timestamp_ = j.at("last_timestamp").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("accepted").items())
      s.accepted_[std::stoull(k)] = SignedTreeHead::decode(base64_decode(v.get<std::string>()));
    for (const auto& e : j.at("evidence")) s.evidence_.push_back(evidence_from_json(e));
    return s;
  } catch (const Json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("subject state: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(Errc::MalformedRecord, "subject state: bad index key");
  }
}

void Subject::save(const std::filesystem::path& file) const {
  auto text = to_json().dump(2);
  journal::write_atomic(file, as_bytes(text));
}

Subject Subject::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::Io, "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(parse_json(ss.str()));
}

}  // namespace lwm
