#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lwm/error.hpp"
#include "lwm/wtree.hpp"
#include "support.hpp"

using namespace lwm;
using lwm::test::digest_hex;

namespace {

// Frozen by tests/oracles/hash_vectors.py.
const Digest kH0 = digest_hex("97774ffe0a17016809e87ddc1eec0972ba3ea4eae5c64120393e61b75c6ea236");
const Digest kH1 = digest_hex("c90fe5d4616f82113a491a45ea0ab583450b0c79bac4733251a717539a075d7f");
const Digest kH2 = digest_hex("84ae7d5e18e12424c702877f5339d09dcaf4b5976c4b1ce61cf01947f7ed2806");
const Digest kH3 = digest_hex("93a7b88db9c75b0b0837150f64f4a5becf5495e0009b1049218747882f558883");
const Digest kH01 = digest_hex("f0da09370bbf288a396e8bfa24f823d2d73e4fdbd8847cb34f1d9876c4a6cfe2");
const Digest kH23 = digest_hex("d6790542689095c0c309aa2a86fc19d381d35af019f392c3614bfb83b74bbded");
const Digest kRoot = digest_hex("44f8c3accb0eaa0850c93e69bd04fd7412575a0143730bda53440ac8cf34ab95");

std::vector<std::string> names(const std::vector<LeafValue>& v) {
  std::vector<std::string> out;
  for (const auto& l : v) out.push_back(l.name.str());
  return out;
}

VerifyErrc verify_error(const Snapshot& s, const WildcardQuery& q, const WildcardProof& p) {
  try {
    verify(s, q, p);
  } catch (const VerifyError& e) {
    return e.kind();
  }
  FAIL("verification unexpectedly succeeded");
  return VerifyErrc::Malformed;
}

}  // namespace

TEST_CASE("worked batch builds the expected tree") {
  auto tree = WildTree::build(lwm::test::counting_constant(), lwm::test::worked_batch());
  CHECK(names(tree.leaves()) ==
        std::vector<std::string>{"example.org", "example.com", "sub.example.com", "example.net"});
  CHECK(tree.hashes().leaf(0) == kH0);
  CHECK(tree.hashes().leaf(3) == kH3);
  CHECK(node_hash(kH0, kH1) == kH01);
  CHECK(node_hash(kH2, kH3) == kH23);
  CHECK(tree.root() == kRoot);
  auto snap = tree.snapshot();
  CHECK(snap.root == kRoot);
  CHECK(snap.batch_size == 4);
  CHECK(snap.constant == lwm::test::counting_constant());
}

TEST_CASE("worked proof for *sub.example.com") {
  auto tree = WildTree::build(lwm::test::counting_constant(), lwm::test::worked_batch());
  auto q = WildcardQuery::parse("*sub.example.com");
  auto proof = tree.prove(q);
  REQUIRE(proof.left);
  REQUIRE(proof.right);
  CHECK(proof.left->path.leaf_index == 1);
  CHECK(proof.left->path.siblings == std::vector<Digest>{kH0, kH23});
  CHECK(proof.right->path.leaf_index == 3);
  CHECK(proof.right->path.siblings == std::vector<Digest>{kH2, kH01});
  CHECK(names(proof.matches) == std::vector<std::string>{"sub.example.com"});
  auto verified = verify(tree.snapshot(), q, proof);
  CHECK(names(verified) == std::vector<std::string>{"sub.example.com"});

  auto dropped = proof;
  dropped.matches.clear();
  auto kind = verify_error(tree.snapshot(), q, dropped);
  CHECK((kind == VerifyErrc::BoundaryMissing || kind == VerifyErrc::RootMismatch ||
         kind == VerifyErrc::OrderViolation));
}

TEST_CASE("empty and single-leaf batches") {
  auto c = lwm::test::counting_constant();
  auto empty = WildTree::build(c, {});
  CHECK(empty.size() == 0);
  CHECK(empty.root() == empty_hash(c));
  auto q = WildcardQuery::parse("*.example.com");
  auto p = empty.prove(q);
  CHECK_FALSE(p.left);
  CHECK_FALSE(p.right);
  CHECK(verify(empty.snapshot(), q, p).empty());

  CertificateMap one;
  one[SubjectName::parse("example.com")] = {lwm::test::bytes_of("x")};
  auto single = WildTree::build(c, one);
  auto hit = single.prove(q);
  CHECK(hit.matches.size() == 1);
  CHECK_FALSE(hit.left);
  CHECK_FALSE(hit.right);
  CHECK(verify(single.snapshot(), q, hit).size() == 1);
  auto miss_q = WildcardQuery::parse("*.example.org");
  auto miss = single.prove(miss_q);
  CHECK(miss.matches.empty());
  CHECK(static_cast<bool>(miss.left) != static_cast<bool>(miss.right));
  CHECK(verify(single.snapshot(), miss_q, miss).empty());
}

TEST_CASE("five leaves split into four and one") {
  CertificateMap m;
  for (const char* n : {"a.com", "b.com", "c.com", "d.com", "e.com"}) m[SubjectName::parse(n)] = {lwm::test::bytes_of(n)};
  auto tree = WildTree::build(lwm::test::counting_constant(), m);
  std::vector<Digest> hashes(tree.hashes().leaves().begin(), tree.hashes().leaves().end());
  auto left = lwm::test::naive_root(hashes, 0, 4);
  CHECK(tree.root() == node_hash(left, hashes[4]));
  CHECK(tree.root() == lwm::test::naive_root(hashes, 0, 5));
}

TEST_CASE("query covering every leaf has no boundaries") {
  auto tree = WildTree::build(lwm::test::counting_constant(), lwm::test::worked_batch());
  auto q = WildcardQuery::parse("*e.com");
  CertificateMap all_com;
  for (const char* n : {"example.com", "sub.example.com", "www.example.com"}) all_com[SubjectName::parse(n)] = {lwm::test::bytes_of(n)};
  auto t2 = WildTree::build(lwm::test::counting_constant(), all_com);
  auto q2 = WildcardQuery::parse("*.com");
  auto p = t2.prove(q2);
  CHECK_FALSE(p.left);
  CHECK_FALSE(p.right);
  CHECK(p.matches.size() == 3);
  CHECK(verify(t2.snapshot(), q2, p).size() == 3);
  CHECK(verify(tree.snapshot(), q, tree.prove(q)).size() == 2);
}

TEST_CASE("proofs equal a naive oracle that rebuilds paths from scratch") {
  lwm::test::NameGen gen(21);
  for (int round = 0; round < 200; ++round) {
    auto names_in = gen.unique_names(1 + gen.pick(64));
    auto tree = WildTree::build(BatchConstant::random(), lwm::test::batch_for(names_in, gen.rng()));
    std::vector<Digest> hashes(tree.hashes().leaves().begin(), tree.hashes().leaves().end());
    for (std::size_t i = 0; i < hashes.size(); ++i)
      REQUIRE(hashes[i] == leaf_hash(tree.constant(), tree.leaves()[i].serialize()));
    REQUIRE(tree.root() == lwm::test::naive_root(hashes, 0, hashes.size()));
    for (int qi = 0; qi < 8; ++qi) {
      auto q = gen.query(names_in);
      auto p = tree.prove(q);
      std::vector<SubjectName> sorted;
      for (const auto& l : tree.leaves()) sorted.push_back(l.name);
      auto expected = lwm::test::naive_matches(q, sorted);
      CHECK(names(p.matches) == expected);
      if (p.left) {
        CHECK(p.left->leaf == tree.leaves()[p.match_lo - 1]);
        CHECK(p.left->path.siblings == lwm::test::naive_path(hashes, p.match_lo - 1, 0, hashes.size()));
      }
      if (p.right) {
        CHECK(p.right->leaf == tree.leaves()[p.match_lo + p.matches.size()]);
        CHECK(p.right->path.siblings ==
              lwm::test::naive_path(hashes, p.match_lo + p.matches.size(), 0, hashes.size()));
      }
    }
  }
}

TEST_CASE("round trip: every generated query verifies to the oracle set (n <= 256)") {
  lwm::test::NameGen gen(33);
  int mismatches = 0;
  for (int round = 0; round < 60; ++round) {
    auto names_in = gen.unique_names(1 + gen.pick(256));
    auto tree = WildTree::build(BatchConstant::random(), lwm::test::batch_for(names_in, gen.rng()));
    std::vector<WildcardQuery> queries;
    for (const auto& n : names_in) {
      queries.push_back(WildcardQuery::parse(n.str()));
      queries.push_back(WildcardQuery::parse("*." + n.str()));
      auto dot = n.str().find('.');
      if (dot != std::string::npos) queries.push_back(WildcardQuery::parse("*" + n.str().substr(dot)));
    }
    for (int i = 0; i < 20; ++i) queries.push_back(WildcardQuery::parse(gen.name().str() + ".absent"));
    for (const auto& q : queries) {
      auto p = tree.prove(q);
      CHECK(p.sibling_count() <= 2 * merkle::ceil_log2(tree.size()));
      auto got = names(verify(tree.snapshot(), q, p));
      if (got != lwm::test::naive_matches(q, names_in)) ++mismatches;
      CHECK(WildcardProof::decode(p.encode()) == p);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("structured mutations never verify with a different match set") {
  lwm::test::NameGen gen(44);
  int accepted_wrong = 0;
  int attempts = 0;
  for (int round = 0; round < 150; ++round) {
    auto names_in = gen.unique_names(2 + gen.pick(40));
    auto tree = WildTree::build(BatchConstant::random(), lwm::test::batch_for(names_in, gen.rng()));
    auto q = gen.query(names_in);
    auto honest = tree.prove(q);
    auto snap = tree.snapshot();
    auto truth = names(verify(snap, q, honest));
    std::vector<WildcardProof> variants;
    if (!honest.matches.empty()) {
      auto v = honest;
      v.matches.erase(v.matches.begin() + static_cast<std::ptrdiff_t>(gen.pick(v.matches.size())));
      variants.push_back(v);
      auto first = honest;
      first.matches.erase(first.matches.begin());
      first.match_lo += 1;
      variants.push_back(first);
    }
    if (honest.matches.size() >= 2) {
      auto v = honest;
      std::swap(v.matches[0], v.matches[1]);
      variants.push_back(v);
    }
    {
      auto v = honest;
      v.matches.push_back(LeafValue{SubjectName::parse("zz." + q.suffix()), Digest{}});
      variants.push_back(v);
    }
    if (honest.left) {
      auto v = honest;
      v.left->path.siblings.back().bytes[0] ^= 1;
      variants.push_back(v);
      auto w = honest;
      w.left.reset();
      variants.push_back(w);
      auto x = honest;
      x.left->leaf.cert_list_hash.bytes[5] ^= 2;
      variants.push_back(x);
    }
    if (honest.right) {
      auto v = honest;
      v.right->path.siblings.front().bytes[31] ^= 1;
      variants.push_back(v);
      auto w = honest;
      w.right.reset();
      variants.push_back(w);
    }
    {
      auto v = honest;
      v.tree_size += 1;
      variants.push_back(v);
      auto w = honest;
      w.match_lo += 1;
      if (w.left) w.left->path.leaf_index += 1;
      if (w.right) w.right->path.leaf_index += 1;
      variants.push_back(w);
    }
    for (const auto& v : variants) {
      ++attempts;
      try {
        if (names(verify(snap, q, v)) != truth) ++accepted_wrong;
      } catch (const VerifyError&) {
      }
    }
  }
  CHECK(attempts > 500);
  CHECK(accepted_wrong == 0);
}

TEST_CASE("exhaustive single-byte flips of encoded proofs") {
  lwm::test::NameGen gen(55);
  int accepted_wrong = 0;
  for (int round = 0; round < 30; ++round) {
    auto names_in = gen.unique_names(3 + gen.pick(12));
    auto tree = WildTree::build(BatchConstant::random(), lwm::test::batch_for(names_in, gen.rng()));
    auto q = gen.query(names_in);
    auto encoded = tree.prove(q).encode();
    auto truth = names(verify(tree.snapshot(), q, tree.prove(q)));
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      for (std::uint8_t mask : {0x01, 0x80}) {
        auto bad = encoded;
        bad[i] ^= mask;
        try {
          auto got = names(verify(tree.snapshot(), q, WildcardProof::decode(bad)));
          if (got != truth) ++accepted_wrong;
        } catch (const VerifyError&) {
        } catch (const Error&) {
        }
      }
    }
  }
  CHECK(accepted_wrong == 0);
}

TEST_CASE("a proof never verifies under a different batch constant") {
  lwm::test::NameGen gen(66);
  for (int round = 0; round < 100; ++round) {
    auto names_in = gen.unique_names(1 + gen.pick(30));
    auto entries = lwm::test::batch_for(names_in, gen.rng());
    auto t1 = WildTree::build(BatchConstant::random(), entries);
    auto t2 = WildTree::build(BatchConstant::random(), entries);
    auto q = gen.query(names_in);
    auto p = t1.prove(q);
    if (p.sibling_count() == 0) {
      // Every leaf is disclosed, so the proof is the batch itself and is
      // valid for any snapshot of that batch.
      CHECK(names(verify(t2.snapshot(), q, p)) == names(p.matches));
      continue;
    }
    CHECK(verify_error(t2.snapshot(), q, p) == VerifyErrc::RootMismatch);
  }
}

TEST_CASE("size mismatch and malformed encodings") {
  auto tree = WildTree::build(lwm::test::counting_constant(), lwm::test::worked_batch());
  auto q = WildcardQuery::parse("*sub.example.com");
  auto snap = tree.snapshot();
  snap.batch_size = 5;
  CHECK(verify_error(snap, q, tree.prove(q)) == VerifyErrc::SizeMismatch);
  auto bytes = tree.prove(q).encode();
  bytes[0] = 0x02;
  CHECK_THROWS_AS(WildcardProof::decode(bytes), Error);
  auto trailing = tree.prove(q).encode();
  trailing.push_back(0);
  CHECK_THROWS_AS(WildcardProof::decode(trailing), Error);
  CHECK(Snapshot::decode(tree.snapshot().encode()) == tree.snapshot());
  CHECK(tree.snapshot().encode().size() == Snapshot::kEncodedSize);
}

TEST_CASE("build is deterministic and rejects duplicate leaves") {
  auto c = lwm::test::counting_constant();
  CHECK(WildTree::build(c, lwm::test::worked_batch()).snapshot().encode() ==
        WildTree::build(c, lwm::test::worked_batch()).snapshot().encode());
  std::vector<LeafValue> dup{{SubjectName::parse("a.com"), {}}, {SubjectName::parse("a.com"), {}}};
  CHECK_THROWS_AS(WildTree::from_leaves(c, dup), Error);
}
