#pragma once

// Single-threaded timing of batch-tree construction and proofs.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lwm {

struct BenchOptions {
  std::vector<std::size_t> sizes;
  /// Proofs generated and verified per measurement.
  std::size_t samples = 2000;
  std::size_t blob_size = 1500;
  std::uint64_t seed = 1;
  /// Whole-zone query timed on every size; empty to skip.
  std::string tld_query = "*.com";
};

struct BenchRow {
  std::size_t n = 0;
  double build_ms = 0;
  double member_gen_us = 0;
  double member_verify_us = 0;
  std::size_t member_proof_bytes = 0;  // largest seen
  double nonmember_gen_us = 0;
  double nonmember_verify_us = 0;
  std::size_t nonmember_proof_bytes = 0;  // largest seen
  std::size_t max_siblings = 0;
  std::size_t tld_matches = 0;
  double tld_gen_ms = 0;
  /// Proof check plus a digest over every matched certificate.
  double tld_verify_ms = 0;
  /// Building a tree over just the matched names and certificates.
  double tld_snapshot_ms = 0;
  std::size_t tld_proof_bytes = 0;

  [[nodiscard]] double tld_ratio() const { return tld_snapshot_ms > 0 ? tld_verify_ms / tld_snapshot_ms : 0; }
  [[nodiscard]] double nonmember_per_second() const { return nonmember_gen_us > 0 ? 1e6 / nonmember_gen_us : 0; }
};

/// Batch of size n = the first n corpus names, one random certificate each.
/// Throws Error(Config) if the corpus is shorter than the largest size.
std::vector<BenchRow> run_bench(const std::vector<std::string>& corpus, const BenchOptions& options);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace lwm
