#pragma once

// Subject names and the ordering that makes every wild-card query select a
// contiguous run of leaves: names are compared by their character-reversed
// form, so a shared suffix becomes a shared prefix.

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lwm {

/// A lowercase, dot-separated ASCII DNS name without a trailing dot.
class SubjectName {
 public:
  /// Throws Error(MalformedName).
  static SubjectName parse(std::string_view raw);

  [[nodiscard]] const std::string& str() const { return name_; }
  [[nodiscard]] std::size_t size() const { return name_.size(); }

  bool operator==(const SubjectName&) const = default;
  /// Plain lexicographic order on the forward name (for maps); not Ω.
  auto operator<=>(const SubjectName&) const = default;

 private:
  explicit SubjectName(std::string n) : name_(std::move(n)) {}
  std::string name_;
};

/// Lowercases, strips one trailing dot and validates label structure.
SubjectName normalize(std::string_view name);

/// Character-wise reversal of a name; reversing twice restores it.
class ReversedName {
 public:
  explicit ReversedName(const SubjectName& name);

  [[nodiscard]] const std::string& str() const { return bytes_; }
  [[nodiscard]] SubjectName forward() const;

 private:
  std::string bytes_;
};

ReversedName reverse(const SubjectName& name);

/// Ω comparison on already-reversed strings. Bytewise, except that '.' ranks
/// below every other name character so that "x" and "x.*" stay adjacent.
std::strong_ordering omega_compare(std::string_view reversed_a, std::string_view reversed_b);
bool omega_less(const SubjectName& a, const SubjectName& b);

/// Sorts unique names into Ω order; throws Error(DuplicateName).
std::vector<SubjectName> omega_sort(std::vector<SubjectName> names);

class WildcardQuery {
 public:
  enum class Form {
    Exact,   // "example.com": that name only
    Domain,  // "*.example.com": names ending in ".example.com" (+ apex)
    Suffix,  // "*ample.com": any name ending in the raw string
  };

  /// Throws Error(MalformedName).
  static WildcardQuery parse(std::string_view raw, bool apex_included = true);

  [[nodiscard]] const std::string& raw() const { return raw_; }
  [[nodiscard]] Form form() const { return form_; }
  [[nodiscard]] const std::string& suffix() const { return suffix_; }
  [[nodiscard]] bool apex_included() const { return apex_included_; }

  [[nodiscard]] bool matches(const SubjectName& name) const;
  /// Smallest reversed string of the match set: every match compares >= it
  /// under Ω and every non-match >= it lies above all matches.
  [[nodiscard]] const std::string& lower_key() const { return lower_key_; }

  bool operator==(const WildcardQuery&) const = default;

 private:
  std::string raw_;
  Form form_ = Form::Exact;
  std::string suffix_;
  bool apex_included_ = true;
  std::string lower_key_;
};

/// Half-open index range of the matches of `query` in an Ω-sorted list. When
/// empty, lo is the insertion point of the query's lower key.
struct MatchRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  [[nodiscard]] std::size_t size() const { return hi - lo; }
  bool operator==(const MatchRange&) const = default;
};

/// Ω comparison of a forward name against an already-reversed key, without
/// materializing the reversal.
std::strong_ordering omega_compare_to_key(const SubjectName& name, std::string_view reversed_key);

/// Binary search for the lower key, then a forward scan over the t matches:
/// O(k log n + t) for a query of length k.
template <class Sequence, class Projection>
MatchRange resolve_range(const WildcardQuery& query, const Sequence& sorted, Projection name_of) {
  std::size_t lo = 0;
  std::size_t hi = sorted.size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (omega_compare_to_key(name_of(sorted[mid]), query.lower_key()) < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  std::size_t end = lo;
  while (end < sorted.size() && query.matches(name_of(sorted[end]))) ++end;
  return {lo, end};
}

MatchRange resolve_range(const WildcardQuery& query, const std::vector<SubjectName>& sorted);

}  // namespace lwm
