#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lwm/error.hpp"
#include "lwm/merkle.hpp"
#include "support.hpp"

using namespace lwm;
using lwm::test::naive_path;
using lwm::test::naive_root;

namespace {

std::vector<Digest> leaves(std::size_t n) {
  std::vector<Digest> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(rfc6962_leaf_hash(lwm::test::bytes_of("leaf" + std::to_string(i))));
  return out;
}

// SUBPROOF from RFC 6962, verbatim recursion.
std::vector<Digest> naive_subproof(const std::vector<Digest>& d, std::size_t m, std::size_t b, std::size_t e,
                                   bool whole) {
  std::size_t n = e - b;
  if (m == n) return whole ? std::vector<Digest>{} : std::vector<Digest>{naive_root(d, b, e)};
  std::size_t k = 1;
  while (k * 2 < n) k *= 2;
  std::vector<Digest> out;
  if (m <= k) {
    out = naive_subproof(d, m, b, b + k, whole);
    out.push_back(naive_root(d, b + k, e));
  } else {
    out = naive_subproof(d, m - k, b + k, e, false);
    out.push_back(naive_root(d, b, b + k));
  }
  return out;
}

}  // namespace

TEST_CASE("split point and ceil_log2") {
  CHECK(merkle::split_point(2) == 1);
  CHECK(merkle::split_point(5) == 4);
  CHECK(merkle::split_point(8) == 4);
  CHECK(merkle::split_point(9) == 8);
  CHECK(merkle::ceil_log2(1) == 0);
  CHECK(merkle::ceil_log2(2) == 1);
  CHECK(merkle::ceil_log2(5) == 3);
  CHECK(merkle::ceil_log2(22818) == 15);
}

TEST_CASE("roots, audit paths and consistency proofs match the RFC recursion for n <= 33") {
  auto all = leaves(33);
  merkle::HashLevels incremental;
  for (std::size_t n = 1; n <= 33; ++n) {
    incremental.append(all[n - 1]);
    std::vector<Digest> prefix(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    merkle::HashLevels bulk(prefix);
    Digest expected = naive_root(prefix, 0, n);
    CHECK(bulk.root(n, {}) == expected);
    CHECK(incremental.root(n, {}) == expected);
    for (std::size_t m = 0; m < n; ++m) {
      auto path = incremental.audit_path(m, n);
      CHECK(path == naive_path(prefix, m, 0, n));
      CHECK(path.size() <= merkle::ceil_log2(n));
      CHECK(merkle::root_from_path(m, n, prefix[m], path) == expected);
    }
    for (std::size_t m = 1; m <= n; ++m) {
      auto proof = incremental.consistency_proof(m, n);
      CHECK(proof == naive_subproof(prefix, m, 0, n, true));
      CHECK(merkle::verify_consistency(m, n, naive_root(prefix, 0, m), expected, proof));
    }
  }
}

TEST_CASE("tampered consistency proofs fail") {
  auto all = leaves(21);
  merkle::HashLevels t(all);
  for (std::size_t m = 1; m < 21; ++m) {
    auto proof = t.consistency_proof(m, 21);
    auto old_root = t.root(m, {});
    auto new_root = t.root(21, {});
    for (std::size_t i = 0; i < proof.size(); ++i) {
      auto bad = proof;
      bad[i].bytes[3] ^= 0x40;
      CHECK_FALSE(merkle::verify_consistency(m, 21, old_root, new_root, bad));
    }
    auto longer = proof;
    longer.push_back(new_root);
    CHECK_FALSE(merkle::verify_consistency(m, 21, old_root, new_root, longer));
    CHECK_FALSE(merkle::verify_consistency(m, 21, new_root, new_root, proof));
  }
  CHECK(merkle::verify_consistency(7, 7, t.root(7, {}), t.root(7, {}), {}));
  CHECK_FALSE(merkle::verify_consistency(7, 7, t.root(7, {}), t.root(8, {}), {}));
  CHECK_THROWS_AS((void)t.consistency_proof(0, 5), Error);
}

TEST_CASE("reconstruct from a span plus outside nodes") {
  auto all = leaves(29);
  merkle::HashLevels t(all);
  Digest root = t.root(29, {});
  for (std::size_t a = 0; a < 29; ++a) {
    for (std::size_t b = a + 1; b <= 29; ++b) {
      std::vector<merkle::KnownNode> known;
      // Supply every maximal node outside [a, b), found by walking the tree.
      std::vector<merkle::NodeRange> stack{{0, 29}};
      while (!stack.empty()) {
        auto r = stack.back();
        stack.pop_back();
        if (r.end <= a || r.begin >= b) {
          known.push_back({r, t.subtree(r)});
        } else if (!(r.begin >= a && r.end <= b)) {
          auto k = merkle::split_point(r.size());
          stack.push_back({r.begin, r.begin + k});
          stack.push_back({r.begin + k, r.end});
        }
      }
      std::vector<Digest> span(all.begin() + static_cast<std::ptrdiff_t>(a), all.begin() + static_cast<std::ptrdiff_t>(b));
      CHECK(merkle::reconstruct(29, a, span, known) == root);
      if (!known.empty()) {
        auto missing = known;
        missing.pop_back();
        CHECK_FALSE(merkle::reconstruct(29, a, span, missing).has_value());
      }
    }
  }
}

TEST_CASE("a hostile tree size does not force a deep walk") {
  std::vector<Digest> span{rfc6962_leaf_hash({})};
  CHECK_FALSE(merkle::reconstruct(std::uint64_t{1} << 62, 5, span, {}).has_value());
}
