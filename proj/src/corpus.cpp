#include "lwm/corpus.hpp"

#include <fstream>
#include <random>
#include <unordered_set>

#include "lwm/error.hpp"
#include "lwm/omega.hpp"

namespace lwm {

namespace {

struct Tld {
  const char* name;
  int weight;
};

// Weights sum to 100.
constexpr Tld kTlds[] = {
    {"com", 50}, {"net", 6},    {"org", 6},   {"de", 5},  {"ru", 4},     {"co.uk", 3}, {"jp", 3},
    {"com.br", 2}, {"in", 2},   {"fr", 2},    {"it", 2},  {"pl", 2},     {"cn", 2},    {"io", 2},
    {"info", 2}, {"com.au", 2}, {"nl", 1},    {"es", 1},  {"ca", 1},     {"edu", 1},   {"gov", 1}};

constexpr const char* kSyllables[] = {"al", "an", "ar", "ba", "be", "bo", "ca", "co", "da", "de", "di", "do",
                                      "el", "en", "er", "fa", "fi", "go", "ha", "he", "in", "is", "ja", "ka",
                                      "ki", "la", "le", "li", "lo", "ma", "me", "mi", "mo", "na", "ne", "no",
                                      "on", "or", "pa", "pe", "pi", "po", "ra", "re", "ri", "ro", "sa", "se",
                                      "si", "so", "ta", "te", "ti", "to", "tu", "un", "va", "ve", "wa", "xi",
                                      "ya", "yo", "za", "zu", "web", "net", "shop", "news", "mail", "app"};

}  // namespace

std::vector<std::string> synthetic_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  for (const auto& t : kTlds) weights.push_back(t.weight);
  std::discrete_distribution<std::size_t> tld(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> syl(0, std::size(kSyllables) - 1);
  std::uniform_int_distribution<int> parts(1, 4);
  std::uniform_int_distribution<int> pct(0, 99);

  std::vector<std::string> out;
  out.reserve(n);
  std::unordered_set<std::string> seen;
  while (out.size() < n) {
    std::string label;
    int k = parts(rng);
    for (int i = 0; i < k; ++i) {
      if (i > 0 && pct(rng) < 8) label += '-';
      label += kSyllables[syl(rng)];
    }
    if (pct(rng) < 10) label += std::to_string(pct(rng));
    std::string name = label + "." + kTlds[tld(rng)].name;
    if (seen.insert(name).second) out.push_back(std::move(name));
  }
  return out;
}

void write_corpus(const std::filesystem::path& file, const std::vector<std::string>& names) {
  std::ofstream f(file, std::ios::trunc);
  if (!f) throw Error(Errc::Io, "cannot write " + file.string());
  for (std::size_t i = 0; i < names.size(); ++i) f << (i + 1) << ',' << names[i] << '\n';
  if (!f) throw Error(Errc::Io, "write failed: " + file.string());
}

std::vector<std::string> read_corpus(const std::filesystem::path& file, std::size_t limit) {
  std::ifstream f(file);
  if (!f) throw Error(Errc::CorpusMissing, "cannot open corpus " + file.string());
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::string line;
  while (out.size() < limit && std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto comma = line.find(',');
    if (comma != std::string::npos &&
        (comma == 0 || line.find_first_not_of("0123456789 ") < comma))
      continue;
    std::string domain = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      auto name = normalize(domain).str();
      if (seen.insert(name).second) out.push_back(std::move(name));
    } catch (const Error&) {
      // header or junk
    }
  }
  return out;
}

}  // namespace lwm
