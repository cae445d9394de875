#pragma once

// Shared fixtures and naive oracles for the unit tests. Nothing here calls
// into the tree-shape or range-search code it is used to check.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lwm/hashcore.hpp"
#include "lwm/omega.hpp"
#include "lwm/wtree.hpp"

namespace lwm::test {

inline Digest digest_hex(std::string_view hex) { return Digest::from(from_hex(hex)); }

inline BatchConstant counting_constant() {
  BatchConstant c;
  for (std::size_t i = 0; i < c.bytes.size(); ++i) c.bytes[i] = static_cast<std::uint8_t>(i);
  return c;
}

inline Bytes bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

/// The four-name batch of the worked example, one certificate per name.
inline CertificateMap worked_batch() {
  CertificateMap m;
  for (const char* n : {"example.com", "example.org", "example.net", "sub.example.com"})
    m[SubjectName::parse(n)] = {bytes_of(std::string("cert:") + n)};
  return m;
}

/// Recursive RFC 6962 hash over a leaf-hash list, written straight from the
/// MTH definition.
inline Digest naive_root(const std::vector<Digest>& leaves, std::size_t b, std::size_t e) {
  if (e - b == 1) return leaves[b];
  std::size_t k = 1;
  while (k * 2 < e - b) k *= 2;
  return node_hash(naive_root(leaves, b, b + k), naive_root(leaves, b + k, e));
}

/// PATH(m, D[b:e]) from the RFC definition, leaf to root.
inline std::vector<Digest> naive_path(const std::vector<Digest>& leaves, std::size_t m, std::size_t b,
                                      std::size_t e) {
  if (e - b == 1) return {};
  std::size_t k = 1;
  while (k * 2 < e - b) k *= 2;
  std::vector<Digest> out;
  if (m < b + k) {
    out = naive_path(leaves, m, b, b + k);
    out.push_back(naive_root(leaves, b + k, e));
  } else {
    out = naive_path(leaves, m, b + k, e);
    out.push_back(naive_root(leaves, b, b + k));
  }
  return out;
}

/// Random names drawn from a small alphabet so that suffix collisions,
/// hyphens next to dots, and apex/sub-domain pairs all show up often.
class NameGen {
 public:
  explicit NameGen(std::uint64_t seed) : rng_(seed) {}

  std::string label() {
    static constexpr std::string_view kChars = "ab-0.";
    std::uniform_int_distribution<int> len(1, 4);
    std::string s;
    int n = len(rng_);
    for (int i = 0; i < n; ++i) {
      char c = kChars[std::uniform_int_distribution<std::size_t>(0, 3)(rng_)];
      s.push_back(c);
    }
    return s;
  }

  SubjectName name() {
    static const std::vector<std::string> kTlds = {"com", "org", "a", "ab"};
    std::string s = kTlds[pick(kTlds.size())];
    int depth = std::uniform_int_distribution<int>(0, 3)(rng_);
    for (int i = 0; i < depth; ++i) s = label() + "." + s;
    return SubjectName::parse(s);
  }

  std::vector<SubjectName> unique_names(std::size_t n) {
    std::set<SubjectName> seen;
    std::size_t attempts = 0;
    while (seen.size() < n && attempts++ < n * 50) seen.insert(name());
    return {seen.begin(), seen.end()};
  }

  /// A query of every supported form, biased towards names that exist.
  WildcardQuery query(const std::vector<SubjectName>& names) {
    std::string base = names.empty() || coin() ? name().str() : names[pick(names.size())].str();
    switch (pick(4)) {
      case 0: return WildcardQuery::parse(base);
      case 1: return WildcardQuery::parse("*." + base, coin());
      case 2: {
        std::size_t cut = pick(base.size());
        std::string frag = base.substr(cut);
        if (frag.empty() || frag.front() == '.') frag = base;
        return WildcardQuery::parse("*" + frag);
      }
      default: {
        auto dot = base.find('.');
        std::string parent = dot == std::string::npos ? base : base.substr(dot + 1);
        return WildcardQuery::parse("*." + parent);
      }
    }
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 0; }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline CertificateMap batch_for(const std::vector<SubjectName>& names, std::mt19937_64& rng) {
  CertificateMap m;
  for (const auto& n : names) {
    std::size_t certs = 1 + rng() % 2;
    for (std::size_t i = 0; i < certs; ++i) m[n].push_back(bytes_of(n.str() + "#" + std::to_string(rng() % 1000)));
  }
  return m;
}

/// Brute-force filter: every name matching the query, sorted by the reversed
/// string with '.' ranked lowest.
inline std::vector<std::string> naive_matches(const WildcardQuery& q, const std::vector<SubjectName>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    const std::string& s = n.str();
    bool hit = false;
    switch (q.form()) {
      case WildcardQuery::Form::Exact: hit = s == q.suffix(); break;
      case WildcardQuery::Form::Suffix:
        hit = s.size() >= q.suffix().size() && s.compare(s.size() - q.suffix().size(), q.suffix().size(), q.suffix()) == 0;
        break;
      case WildcardQuery::Form::Domain: {
        std::string dotted = "." + q.suffix();
        hit = (q.apex_included() && s == q.suffix()) ||
              (s.size() > dotted.size() && s.compare(s.size() - dotted.size(), dotted.size(), dotted) == 0);
        break;
      }
    }
    if (hit) out.push_back(s);
  }
  auto key = [](std::string s) {
    std::reverse(s.begin(), s.end());
    for (auto& c : s) c = c == '.' ? '\x01' : c;
    return s;
  };
  std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) { return key(a) < key(b); });
  return out;
}

}  // namespace lwm::test
