#pragma once

// End-to-end simulation: one log, one notifier, one monitor and a handful of
// subjects on a simulated hourly clock, with optional fault injection.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lwm/codec.hpp"
#include "lwm/evidence.hpp"

namespace lwm {

enum class Fault {
  None,
  SkipNotification,  // notifier drops one push for subject 0
  OmitMatch,         // notifier strips a match from one push for subject 0
  ForgeSnapshot,     // log leaves an entry out of one batch tree
  ReplayIndex,       // log reuses the previous index once
  StaleSth,          // log backdates one STH by two days
};

std::string_view to_string(Fault f);
/// Accepts the names printed by to_string plus "omit-from-lwm".
std::optional<Fault> fault_from_string(std::string_view s);
/// Kind that must show up when `f` is injected.
EvidenceKind expected_evidence(Fault f);
std::vector<Fault> all_faults();

struct DemoConfig {
  std::uint64_t seed = 1;
  std::size_t intervals = 10;
  std::size_t subjects = 3;
  /// Unrelated names logged per interval, on top of each subject's own.
  std::size_t noise_per_interval = 40;
  std::size_t blob_size = 256;
  Fault inject = Fault::None;
  /// Interval whose STH carries the fault; defaults to the middle one.
  std::optional<std::size_t> fault_interval;
  /// Tear down and reopen log, notifier and subjects from disk mid-run.
  bool restart = false;
  /// State directory; a temporary one is used (and removed) when unset.
  std::optional<std::filesystem::path> work_dir;
  /// Route log and notifier traffic over loopback HTTP.
  bool http = false;
};

struct DemoEvent {
  std::size_t interval = 0;
  std::string party;  // "notifier", "monitor" or "subject<k>"
  EvidenceKind kind{};
  bool verifies = false;
};

struct SubjectSummary {
  std::string query;
  std::uint64_t next_index = 0;
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t certificates = 0;
  bool matches_oracle = false;
  std::optional<std::uint64_t> stalled_at;
};

struct DemoReport {
  Fault inject = Fault::None;
  std::size_t intervals = 0;
  std::size_t fault_interval = 0;
  std::size_t log_entries = 0;
  std::size_t outages = 0;
  std::vector<DemoEvent> events;
  std::vector<SubjectSummary> subjects;

  /// No evidence anywhere, every subject saw every index exactly once and
  /// accepted exactly the certificates a plain filter over the log yields.
  [[nodiscard]] bool clean() const;
  /// The expected kind appeared within one interval of the fault and every
  /// recorded evidence verifies.
  [[nodiscard]] bool fault_detected() const;
  [[nodiscard]] bool ok() const { return inject == Fault::None ? clean() : fault_detected(); }
  [[nodiscard]] Json to_json() const;
};

/// Throws Error(Config) on an unusable configuration.
DemoReport run_demo(const DemoConfig& config);

}  // namespace lwm
