#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "lwm/error.hpp"
#include "lwm/hashcore.hpp"
#include "support.hpp"

using namespace lwm;
using lwm::test::digest_hex;

// Expected digests come from tests/oracles/hash_vectors.py.

TEST_CASE("leaf_hash of the zero constant and empty value") {
  BatchConstant zero;
  CHECK(leaf_hash(zero, {}) == digest_hex("0a88111852095cae045340ea1f0b279944b2a756a213d9b50107d7489771e159"));
}

TEST_CASE("empty_hash of the zero constant") {
  BatchConstant zero;
  CHECK(empty_hash(zero) == digest_hex("401da6ea6a614dd6d773b1ba84c91ee6d981827bd0bdc5188aa2e5dbffba558c"));
  CHECK(empty_hash(zero) != leaf_hash(zero, {}));
}

TEST_CASE("two-leaf node matches the scripted oracle") {
  BatchConstant zero;
  auto a = leaf_hash(zero, lwm::test::bytes_of("a"));
  auto b = leaf_hash(zero, lwm::test::bytes_of("b"));
  CHECK(a == digest_hex("00dd26905a011f76971090252273bb861887a46a39770dda8cbdf49ac65f8d53"));
  CHECK(b == digest_hex("27dd6f3fc6c0737d89008d50af882b7c33275fcbb3fb65cbc2c45f5efdb44fcf"));
  CHECK(node_hash(a, b) == digest_hex("e1291d27b89dc4a2e872d1ceae00e45704f9d1e4a27d6fc9cd1ac9e96cd681a6"));
  CHECK(node_hash(a, b) != node_hash(b, a));
}

TEST_CASE("leaf value of example.com from the worked batch") {
  auto c = lwm::test::counting_constant();
  LeafValue v{SubjectName::parse("example.com"),
              LeafValue::hash_certificates(std::vector<Bytes>{lwm::test::bytes_of("cert:example.com")})};
  CHECK(to_hex(v.serialize()) ==
        "000b6578616d706c652e636f6d1ae1e9c56e89eb2c9a2ed2aeb9720416eabcf2a9af9462a133d4fb48a206ea72");
  CHECK(leaf_hash(c, v.serialize()) ==
        digest_hex("c90fe5d4616f82113a491a45ea0ab583450b0c79bac4733251a717539a075d7f"));
}

TEST_CASE("constants and digests reject wrong lengths") {
  CHECK_THROWS_AS(Digest::from(Bytes(31)), Error);
  CHECK_THROWS_AS(BatchConstant::from(Bytes(17)), Error);
  CHECK(BatchConstant::random() != BatchConstant::random());
}

TEST_CASE("domain separation across leaf, node and empty hashes") {
  std::mt19937_64 rng(7);
  std::set<Digest> seen;
  std::size_t produced = 0;
  for (int i = 0; i < 2000; ++i) {
    BatchConstant c;
    for (auto& b : c.bytes) b = static_cast<std::uint8_t>(rng());
    Bytes v(rng() % 80);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng());
    Digest l = leaf_hash(c, v);
    Digest e = empty_hash(c);
    Digest n = node_hash(l, e);
    seen.insert(l);
    seen.insert(e);
    seen.insert(n);
    produced += 3;
    // A leaf whose value is the 32-byte tail of a node preimage still differs.
    Bytes tail(l.bytes.begin(), l.bytes.end());
    tail.insert(tail.end(), e.bytes.begin(), e.bytes.end());
    CHECK(leaf_hash(c, tail) != n);
  }
  CHECK(seen.size() == produced);
}

TEST_CASE("multi-instance separation over 10^4 constant pairs") {
  std::mt19937_64 rng(11);
  Bytes v = lwm::test::bytes_of("sub.example.com");
  int collisions = 0;
  for (int i = 0; i < 10000; ++i) {
    BatchConstant c1, c2;
    for (auto& b : c1.bytes) b = static_cast<std::uint8_t>(rng());
    c2 = c1;
    c2.bytes[rng() % BatchConstant::kSize] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    if (leaf_hash(c1, v) == leaf_hash(c2, v)) ++collisions;
  }
  CHECK(collisions == 0);
}

TEST_CASE("hashing is deterministic") {
  auto c = lwm::test::counting_constant();
  auto v = lwm::test::bytes_of("value");
  CHECK(leaf_hash(c, v) == leaf_hash(c, v));
  CHECK(empty_hash(c) == empty_hash(c));
  Sha256 h;
  h.update(kLeafPrefix).update(c.bytes).update(v);
  CHECK(h.finish() == leaf_hash(c, v));
}

TEST_CASE("certificate list hash ignores blob order") {
  std::vector<Bytes> a{lwm::test::bytes_of("one"), lwm::test::bytes_of("two")};
  std::vector<Bytes> b{a[1], a[0]};
  CHECK(LeafValue::hash_certificates(a) == LeafValue::hash_certificates(b));
  CHECK(LeafValue::hash_certificates(a) != LeafValue::hash_certificates(std::vector<Bytes>{a[0]}));
}
