#pragma once

// Popularity-ranked domain lists in the "rank,domain" CSV format.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace lwm {

/// Deterministic stand-in for a top-sites list: unique registrable names,
/// about half under .com, the rest spread over common gTLDs and ccTLDs.
std::vector<std::string> synthetic_corpus(std::size_t n, std::uint64_t seed);

void write_corpus(const std::filesystem::path& file, const std::vector<std::string>& names);

/// Reads up to `limit` names in rank order. Accepts "rank,domain" or bare
/// domain lines, skips a header and any invalid or repeated name.
/// Throws Error(CorpusMissing) if the file cannot be opened.
std::vector<std::string> read_corpus(const std::filesystem::path& file,
                                     std::size_t limit = std::numeric_limits<std::size_t>::max());

}  // namespace lwm
