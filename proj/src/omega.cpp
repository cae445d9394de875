#include "lwm/omega.hpp"

#include <algorithm>

#include "lwm/error.hpp"

namespace lwm {

namespace {

constexpr std::size_t kMaxInput = 255;
constexpr std::size_t kMaxName = 253;
constexpr std::size_t kMaxLabel = 63;

bool name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

int rank(unsigned char c) { return c == '.' ? 0 : c; }

std::string lowercase_ascii(std::string_view raw) {
  if (raw.size() > kMaxInput) throw Error(Errc::MalformedName, "name longer than 255 bytes");
  std::string out(raw);
  for (auto& c : out) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x80) throw Error(Errc::MalformedName, "non-ASCII name (encode as punycode)");
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

// Checks characters, label lengths and that no label is empty. A fragment may
// begin mid-label, so only its interior and trailing labels are whole.
void check_labels(std::string_view s) {
  if (s.empty()) throw Error(Errc::MalformedName, "empty name");
  if (s.size() > kMaxName) throw Error(Errc::MalformedName, "name longer than 253 bytes");
  std::size_t label = 0;
  for (char c : s) {
    if (!name_char(c)) throw Error(Errc::MalformedName, std::string("illegal character '") + c + "'");
    if (c == '.') {
      if (label == 0) throw Error(Errc::MalformedName, "empty label");
      label = 0;
    } else if (++label > kMaxLabel) {
      throw Error(Errc::MalformedName, "label longer than 63 bytes");
    }
  }
  if (label == 0) throw Error(Errc::MalformedName, "empty label");
}

std::string reversed(std::string_view s) { return {s.rbegin(), s.rend()}; }

}  // namespace

SubjectName SubjectName::parse(std::string_view raw) {
  std::string s = lowercase_ascii(raw);
  check_labels(s);
  return SubjectName(std::move(s));
}

SubjectName normalize(std::string_view name) { return SubjectName::parse(name); }

ReversedName::ReversedName(const SubjectName& name) : bytes_(reversed(name.str())) {}

SubjectName ReversedName::forward() const { return SubjectName::parse(reversed(bytes_)); }

ReversedName reverse(const SubjectName& name) { return ReversedName(name); }

std::strong_ordering omega_compare(std::string_view a, std::string_view b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int ra = rank(static_cast<unsigned char>(a[i]));
    int rb = rank(static_cast<unsigned char>(b[i]));
    if (ra != rb) return ra <=> rb;
  }
  return a.size() <=> b.size();
}

std::strong_ordering omega_compare_to_key(const SubjectName& name, std::string_view key) {
  const std::string& s = name.str();
  std::size_t n = std::min(s.size(), key.size());
  for (std::size_t i = 0; i < n; ++i) {
    int ra = rank(static_cast<unsigned char>(s[s.size() - 1 - i]));
    int rb = rank(static_cast<unsigned char>(key[i]));
    if (ra != rb) return ra <=> rb;
  }
  return s.size() <=> key.size();
}

bool omega_less(const SubjectName& a, const SubjectName& b) {
  const std::string& x = a.str();
  const std::string& y = b.str();
  return omega_compare(std::string_view(reversed(x)), std::string_view(reversed(y))) < 0;
}

std::vector<SubjectName> omega_sort(std::vector<SubjectName> names) {
  // Sort on precomputed reversals; comparing forward strings from the back
  // would re-walk them on every comparison.
  std::vector<std::pair<std::string, std::size_t>> keyed;
  keyed.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) keyed.emplace_back(reversed(names[i].str()), i);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return omega_compare(a.first, b.first) < 0;
  });
  for (std::size_t i = 1; i < keyed.size(); ++i)
    if (keyed[i].first == keyed[i - 1].first)
      throw Error(Errc::DuplicateName, names[keyed[i].second].str());
  std::vector<SubjectName> out;
  out.reserve(names.size());
  for (const auto& [_, i] : keyed) out.push_back(std::move(names[i]));
  return out;
}

WildcardQuery WildcardQuery::parse(std::string_view raw, bool apex_included) {
  std::string s = lowercase_ascii(raw);
  WildcardQuery q;
  q.apex_included_ = apex_included;
  if (s.rfind("*.", 0) == 0) {
    q.form_ = Form::Domain;
    q.suffix_ = SubjectName::parse(s.substr(2)).str();
    q.raw_ = "*." + q.suffix_;
    q.lower_key_ = reversed(q.suffix_);
    if (!apex_included) q.lower_key_.push_back('.');
  } else if (s.rfind('*', 0) == 0) {
    q.form_ = Form::Suffix;
    q.suffix_ = s.substr(1);
    check_labels(q.suffix_);
    q.raw_ = "*" + q.suffix_;
    q.lower_key_ = reversed(q.suffix_);
  } else {
    q.form_ = Form::Exact;
    q.suffix_ = SubjectName::parse(s).str();
    q.raw_ = q.suffix_;
    q.lower_key_ = reversed(q.suffix_);
  }
  return q;
}

bool WildcardQuery::matches(const SubjectName& name) const {
  const std::string& n = name.str();
  switch (form_) {
    case Form::Exact:
      return n == suffix_;
    case Form::Suffix:
      return n.size() >= suffix_.size() && n.ends_with(suffix_);
    case Form::Domain:
      if (n == suffix_) return apex_included_;
      return n.size() > suffix_.size() && n.ends_with(suffix_) &&
             n[n.size() - suffix_.size() - 1] == '.';
  }
  return false;
}

MatchRange resolve_range(const WildcardQuery& query, const std::vector<SubjectName>& sorted) {
  return resolve_range(query, sorted, [](const SubjectName& n) -> const SubjectName& { return n; });
}

}  // namespace lwm
