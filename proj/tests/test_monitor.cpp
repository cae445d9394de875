#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lwm/error.hpp"
#include "protocol_support.hpp"

using namespace lwm;
using namespace lwm::test;

namespace {

SignedTreeHead resign(SignedTreeHead s) {
  s.signature = world_key().sign(sha256(s.signed_bytes()).bytes);
  return s;
}

SignedTreeHead with_ext(SignedTreeHead s, std::string_view key, Bytes value) {
  for (auto& e : s.extensions)
    if (e.key == key) e.value = std::move(value);
  return resign(std::move(s));
}

Bytes index_bytes(std::uint64_t i) {
  ByteWriter w;
  w.u64(i);
  return std::move(w).take();
}

// Two honest STHs (index 0 and 1) and everything needed to audit the second.
struct Pair {
  World w;
  SignedTreeHead prev;
  SignedTreeHead cur;
  std::vector<LogEntry> batch;
  std::vector<Digest> proof;

  Pair() {
    prev = w.interval({"a.example.com", "b.org"});
    cur = w.interval({"c.example.com", "d.net", "c.example.com"});
    batch = w.log->get_entries(prev.tree_size, cur.tree_size);
    proof = w.log->consistency_proof(prev.tree_size, cur.tree_size);
  }

  AuditVerdict audit(const SignedTreeHead& c) const {
    return audit_sth(w.log->public_key(), prev, c, batch, proof, w.now);
  }
  AuditVerdict audit(const SignedTreeHead& c, const std::vector<LogEntry>& b) const {
    return audit_sth(w.log->public_key(), prev, c, b, proof, w.now);
  }
};

void expect_caught(const Pair& p, const AuditVerdict& v, EvidenceKind kind) {
  CHECK_FALSE(v.ok);
  REQUIRE(v.evidence.has_value());
  CHECK(v.evidence->kind == kind);
  CHECK(verify_evidence(v.evidence->encode(), p.w.log->public_key()));
}

}  // namespace

TEST_CASE("honest run audits clean") {
  World w;
  Monitor m(w.source, w.log->public_key(), 0, [&] { return w.now; });
  lwm::test::NameGen gen(1);
  std::size_t seen = 0;
  for (int i = 0; i < 10; ++i) {
    std::vector<std::string> names;
    for (std::size_t k = gen.pick(6); k > 0; --k) names.push_back(gen.name().str());
    w.interval(names);
    for (const auto& v : m.step()) {
      CHECK(v.ok);
      CHECK(v.index == seen++);
    }
  }
  CHECK(seen == 10);
  CHECK(m.step().empty());
}

TEST_CASE("honest pair passes audit_sth") {
  Pair p;
  CHECK(p.audit(p.cur).ok);
  CHECK(audit_sth(p.w.log->public_key(), std::nullopt, p.prev, p.w.log->get_entries(0, p.prev.tree_size), {}, p.w.now)
            .ok);
}

TEST_CASE("each injection class yields its own evidence") {
  Pair p;
  auto snap = sth_snapshot(p.cur);

  SUBCASE("bad signature") {
    auto c = p.cur;
    c.signature[0] ^= 1;
    expect_caught(p, p.audit(c), EvidenceKind::BadSignature);
  }
  SUBCASE("entry omitted from the batch tree") {
    auto smaller = p.batch;
    smaller.erase(smaller.begin() + 1);
    auto forged = snap;
    forged.root = WildTree::build(snap.constant, group_by_subject(smaller)).root();
    forged.batch_size = 1;
    expect_caught(p, p.audit(with_ext(p.cur, kLwmKey, forged.encode())), EvidenceKind::SnapshotMismatch);
  }
  SUBCASE("entry added to the batch tree") {
    auto bigger = p.batch;
    bigger.push_back({99, SubjectName::parse("evil.example.com"), bytes_of("x")});
    auto forged = WildTree::build(snap.constant, group_by_subject(bigger)).snapshot();
    expect_caught(p, p.audit(with_ext(p.cur, kLwmKey, forged.encode())), EvidenceKind::SnapshotMismatch);
  }
  SUBCASE("wrong constant") {
    auto forged = snap;
    forged.constant.bytes[0] ^= 1;
    expect_caught(p, p.audit(with_ext(p.cur, kLwmKey, forged.encode())), EvidenceKind::SnapshotMismatch);
  }
  SUBCASE("wrong batch size") {
    auto forged = snap;
    forged.batch_size += 1;
    expect_caught(p, p.audit(with_ext(p.cur, kLwmKey, forged.encode())), EvidenceKind::SnapshotMismatch);
  }
  SUBCASE("stale root reused") {
    auto c = with_ext(p.cur, kLwmKey, sth_snapshot(p.prev).encode());
    expect_caught(p, p.audit(c), EvidenceKind::SnapshotMismatch);
  }
  SUBCASE("index replay") {
    expect_caught(p, p.audit(with_ext(p.cur, kIndexKey, index_bytes(0))), EvidenceKind::IndexReplay);
  }
  SUBCASE("index gap") {
    expect_caught(p, p.audit(with_ext(p.cur, kIndexKey, index_bytes(3))), EvidenceKind::IndexGap);
  }
  SUBCASE("main roots inconsistent") {
    auto c = p.cur;
    c.main_root.bytes[5] ^= 1;
    expect_caught(p, p.audit(resign(c)), EvidenceKind::InconsistentSTHs);
  }
  SUBCASE("batch that is not the new part of the tree") {
    auto b = p.batch;
    b.back().blob.push_back('!');
    expect_caught(p, p.audit(p.cur, b), EvidenceKind::InconsistentSTHs);
  }
}

TEST_CASE("monitor follows fault-injected logs") {
  SUBCASE("forged snapshot") {
    World w;
    Monitor m(w.source, w.log->public_key(), 0, [&] { return w.now; });
    w.log->set_faults({.forge_snapshot_at = 2});
    std::vector<AuditVerdict> all;
    for (int i = 0; i < 4; ++i) {
      w.interval({"n" + std::to_string(i) + ".com", "m" + std::to_string(i) + ".com"});
      for (auto& v : m.step()) all.push_back(std::move(v));
    }
    REQUIRE(all.size() == 4);
    CHECK(all[0].ok);
    CHECK(all[1].ok);
    CHECK_FALSE(all[2].ok);
    CHECK(all[2].evidence->kind == EvidenceKind::SnapshotMismatch);
    CHECK(verify_evidence(*all[2].evidence, w.log->public_key()));
    CHECK(all[3].ok);
  }
  SUBCASE("replayed index") {
    World w;
    Monitor m(w.source, w.log->public_key(), 0, [&] { return w.now; });
    w.log->set_faults({.replay_index_at = 2});
    std::vector<AuditVerdict> all;
    for (int i = 0; i < 4; ++i) {
      w.interval({"n" + std::to_string(i) + ".com"});
      for (auto& v : m.step()) all.push_back(std::move(v));
      for (auto& v : m.step()) all.push_back(std::move(v));
    }
    auto replay = std::find_if(all.begin(), all.end(), [](const AuditVerdict& v) {
      return v.evidence && v.evidence->kind == EvidenceKind::IndexReplay;
    });
    REQUIRE(replay != all.end());
    CHECK(verify_evidence(*replay->evidence, w.log->public_key()));
    CHECK(std::count_if(all.begin(), all.end(), [](const AuditVerdict& v) {
            return v.evidence && v.evidence->kind == EvidenceKind::IndexReplay;
          }) == 1);
  }
  SUBCASE("starting mid-log") {
    World w;
    for (int i = 0; i < 5; ++i) w.interval({"n" + std::to_string(i) + ".com"});
    Monitor m(w.source, w.log->public_key(), 3, [&] { return w.now; });
    auto vs = m.step();
    REQUIRE(vs.size() == 2);
    CHECK(vs[0].index == 3);
    CHECK(vs[0].ok);
    CHECK(vs[1].ok);
  }
}

TEST_CASE("verdict JSON names the evidence kind") {
  Pair p;
  auto c = p.cur;
  c.signature[0] ^= 1;
  auto j = p.audit(c).to_json();
  CHECK(j["ok"] == false);
  CHECK(j["kind"] == "BadSignature");
  CHECK(evidence_from_json(j["evidence"]).kind == EvidenceKind::BadSignature);
  CHECK(p.audit(p.cur).to_json()["ok"] == true);
}
