#include "lwm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <random>

#include "lwm/error.hpp"
#include "lwm/wtree.hpp"

namespace lwm {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point since) {
  return std::chrono::duration<double, std::micro>(Clock::now() - since).count();
}

// Best of a few runs of `fn`, in microseconds; repeats at least `min_runs`
// times and until a quarter second has been spent.
template <class Fn>
double best_of(Fn&& fn, int min_runs = 3) {
  double best = 0;
  double total = 0;
  for (int run = 0; run < min_runs || (total < 250'000 && run < 50); ++run) {
    auto t0 = Clock::now();
    fn();
    double us = elapsed_us(t0);
    total += us;
    if (run == 0 || us < best) best = us;
  }
  return best;
}

Bytes random_blob(std::mt19937_64& rng, std::size_t size) {
  Bytes b(size);
  for (std::size_t i = 0; i < size; i += 8) {
    auto r = rng();
    for (std::size_t k = 0; k < 8 && i + k < size; ++k) b[i + k] = static_cast<std::uint8_t>(r >> (8 * k));
  }
  return b;
}

struct Timed {
  double gen_us = 0;
  double verify_us = 0;
  std::size_t max_bytes = 0;
  std::size_t max_siblings = 0;
};

Timed time_queries(const WildTree& tree, const std::vector<WildcardQuery>& queries) {
  Timed t;
  std::vector<WildcardProof> proofs(queries.size());
  t.gen_us = best_of([&] {
               for (std::size_t i = 0; i < queries.size(); ++i) proofs[i] = tree.prove(queries[i]);
             }) /
             static_cast<double>(queries.size());
  auto snap = tree.snapshot();
  std::size_t checked = 0;
  t.verify_us = best_of([&] {
                  for (std::size_t i = 0; i < queries.size(); ++i) checked += verify(snap, queries[i], proofs[i]).size();
                }) /
                static_cast<double>(queries.size());
  for (const auto& p : proofs) {
    t.max_bytes = std::max(t.max_bytes, p.encode().size());
    t.max_siblings = std::max(t.max_siblings, p.sibling_count());
  }
  return t;
}

}  // namespace

std::vector<BenchRow> run_bench(const std::vector<std::string>& corpus, const BenchOptions& options) {
  if (options.sizes.empty()) throw Error(Errc::Config, "no batch sizes given");
  if (options.samples == 0) throw Error(Errc::Config, "samples must be positive");
  const std::size_t largest = *std::max_element(options.sizes.begin(), options.sizes.end());
  if (corpus.size() < largest)
    throw Error(Errc::Config, "corpus has " + std::to_string(corpus.size()) + " names, need " + std::to_string(largest));

  std::mt19937_64 rng(options.seed);
  std::vector<SubjectName> names;
  std::vector<Bytes> blobs;
  names.reserve(largest);
  blobs.reserve(largest);
  for (std::size_t i = 0; i < largest; ++i) {
    names.push_back(SubjectName::parse(corpus[i]));
    blobs.push_back(random_blob(rng, options.blob_size));
  }
  const auto constant = BatchConstant::random();

  std::vector<BenchRow> rows;
  for (std::size_t n : options.sizes) {
    BenchRow row;
    row.n = n;
    CertificateMap batch;
    for (std::size_t i = 0; i < n; ++i) batch[names[i]].push_back(blobs[i]);

    std::optional<WildTree> tree;
    row.build_ms = best_of([&] { tree.emplace(WildTree::build(constant, batch)); }) / 1000.0;

    std::vector<WildcardQuery> members;
    std::vector<WildcardQuery> absent;
    for (std::size_t i = 0; i < options.samples; ++i) {
      const auto& name = names[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)].str();
      members.push_back(WildcardQuery::parse(name));
      absent.push_back(WildcardQuery::parse("nx" + std::to_string(i) + "." + name));
    }
    auto m = time_queries(*tree, members);
    row.member_gen_us = m.gen_us;
    row.member_verify_us = m.verify_us;
    row.member_proof_bytes = m.max_bytes;
    auto a = time_queries(*tree, absent);
    row.nonmember_gen_us = a.gen_us;
    row.nonmember_verify_us = a.verify_us;
    row.nonmember_proof_bytes = a.max_bytes;
    row.max_siblings = std::max(m.max_siblings, a.max_siblings);

    if (!options.tld_query.empty()) {
      auto q = WildcardQuery::parse(options.tld_query);
      WildcardProof proof;
      row.tld_gen_ms = best_of([&] { proof = tree->prove(q); }) / 1000.0;
      row.tld_matches = proof.matches.size();
      row.tld_proof_bytes = proof.encode().size();
      row.max_siblings = std::max(row.max_siblings, proof.sibling_count());
      auto snap = tree->snapshot();
      bool ok = true;
      row.tld_verify_ms = best_of([&] {
                            auto got = verify(snap, q, proof);
                            for (const auto& leaf : got)
                              ok = ok && LeafValue::hash_certificates(batch.at(leaf.name)) == leaf.cert_list_hash;
                          }) /
                          1000.0;
      if (!ok) throw Error(Errc::Crypto, "certificate digest mismatch in benchmark batch");
      CertificateMap subset;
      for (const auto& leaf : proof.matches) subset[leaf.name] = batch.at(leaf.name);
      row.tld_snapshot_ms = best_of([&] { (void)WildTree::build(constant, subset); }) / 1000.0;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "n,build_ms,member_gen_us,member_verify_us,member_proof_bytes,nonmember_gen_us,nonmember_verify_us,"
         "nonmember_proof_bytes,max_siblings,tld_matches,tld_gen_ms,tld_verify_ms,tld_snapshot_ms,tld_ratio,"
         "tld_proof_bytes\n";
  for (const auto& r : rows) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%zu,%.3f,%.3f,%.3f,%zu,%.3f,%.3f,%zu,%zu,%zu,%.3f,%.3f,%.3f,%.3f,%zu\n", r.n,
                  r.build_ms, r.member_gen_us, r.member_verify_us, r.member_proof_bytes, r.nonmember_gen_us,
                  r.nonmember_verify_us, r.nonmember_proof_bytes, r.max_siblings, r.tld_matches, r.tld_gen_ms,
                  r.tld_verify_ms, r.tld_snapshot_ms, r.tld_ratio(), r.tld_proof_bytes);
    out << buf;
  }
}

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%8s %10s %9s %9s %7s %9s %9s %7s %9s %8s %9s %9s %6s\n", "n", "build ms",
                "mem gen", "mem ver", "mem B", "non gen", "non ver", "non B", "proofs/s", "tld hits", "tld gen",
                "tld ver", "ratio");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%8zu %10.2f %7.2fus %7.2fus %7zu %7.2fus %7.2fus %7zu %9.0f %8zu %7.2fms %7.2fms %6.2f\n",
                  r.n, r.build_ms, r.member_gen_us, r.member_verify_us, r.member_proof_bytes, r.nonmember_gen_us,
                  r.nonmember_verify_us, r.nonmember_proof_bytes, r.nonmember_per_second(), r.tld_matches,
                  r.tld_gen_ms, r.tld_verify_ms, r.tld_ratio());
    out << buf;
  }
}

}  // namespace lwm
