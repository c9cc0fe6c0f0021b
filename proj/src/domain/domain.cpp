#include "adtracker/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <utility>

namespace adtracker::domain {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void malformed(std::string_view text, std::string_view why) {
  throw Error(ErrorCode::MalformedRange,
              "malformed range \"" + std::string(text) + "\": " + std::string(why));
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Plain digits, or digit groups separated by commas in thousands positions.
std::optional<std::uint64_t> parse_count(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (auto first = s.find(','); first != std::string_view::npos) {
    // 1-3 leading digits, then groups of exactly ",ddd".
    if (first == 0 || first > 3 || (s.size() - first) % 4 != 0) return std::nullopt;
    for (std::size_t i = first; i < s.size(); i += 4) {
      if (s[i] != ',') return std::nullopt;
    }
  }
  std::uint64_t value = 0;
  for (char c : s) {
    if (c == ',') continue;
    if (!is_digit(c)) return std::nullopt;
    auto digit = static_cast<std::uint64_t>(c - '0');
    if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) return std::nullopt;
    value = value * 10 + digit;
  }
  return value;
}

template <typename E>
bool in_enum_range(E v, E last) {
  auto raw = static_cast<int>(v);
  return raw >= 0 && raw <= static_cast<int>(last);
}

bool is_currency_code(std::string_view s) {
  return s.size() == 3 && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

bool is_absolute_url(std::string_view s) {
  auto pos = s.find("://");
  if (pos == std::string_view::npos || pos == 0 || pos + 3 >= s.size()) return false;
  return std::all_of(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(pos), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
  });
}

bool valid_percentage(double p) { return std::isfinite(p) && p >= 0.0 && p <= 100.0; }

}  // namespace

Timestamp analysis_time(const AdRecord& ad) {
  return ad.delivery_start.value_or(ad.creation_time);
}

InvalidSpecError::InvalidSpecError(std::vector<Violation> violations)
    : Error(ErrorCode::InvalidSpec, [&] {
        std::string msg = "invalid job spec:";
        for (const auto& v : violations) {
          msg += " ";
          msg += to_string(v.kind);
          if (!v.detail.empty()) msg += "(" + v.detail + ")";
        }
        return msg;
      }()),
      violations_(std::move(violations)) {}

InsightRange parse_insight_range(std::string_view text) {
  std::string_view t = trim(text);
  if (t.empty()) malformed(text, "empty");

  if (t.front() == '<') {
    auto upper = parse_count(t.substr(1));
    if (!upper) malformed(text, "expected a count after '<'");
    if (*upper == 0) malformed(text, "'<0' has no non-negative values");
    return {0, *upper - 1};
  }
  if (t.front() == '>') {
    auto lower = parse_count(t.substr(1));
    if (!lower) malformed(text, "expected a count after '>'");
    if (*lower > kSentinelUpper) malformed(text, "lower bound above sentinel");
    return {*lower, kSentinelUpper};
  }
  if (t.front() == '-') malformed(text, "negative value");

  auto dash = t.find('-');
  if (dash == std::string_view::npos) {
    auto exact = parse_count(t);
    if (!exact) malformed(text, "not a count");
    return {*exact, *exact};
  }
  auto lower = parse_count(t.substr(0, dash));
  auto upper = parse_count(t.substr(dash + 1));
  if (!lower || !upper) malformed(text, "bounds must be non-negative counts");
  if (*lower > *upper) malformed(text, "lower bound exceeds upper bound");
  return {*lower, *upper};
}

std::string format_insight_range(const InsightRange& r) {
  return std::to_string(r.lower) + "-" + std::to_string(r.upper);
}

double range_midpoint(const InsightRange& r) {
  if (r.upper == kSentinelUpper) return static_cast<double>(r.lower);
  return (static_cast<double>(r.lower) + static_cast<double>(r.upper)) / 2.0;
}

std::vector<Violation> validate_job_spec(const JobSpec& spec) {
  std::vector<Violation> out;
  if (trim(spec.search_term).empty()) {
    out.push_back({ViolationKind::EmptySearchTerm, "search_term", ""});
  }

  if (spec.reached_countries.empty()) {
    out.push_back({ViolationKind::EmptyCountryList, "reached_countries", ""});
  }
  std::set<std::string> seen_countries;
  for (const auto& code : spec.reached_countries) {
    if (!is_iso_country(code)) {
      out.push_back({ViolationKind::UnknownCountryCode, "reached_countries", code});
    } else if (!seen_countries.insert(code).second) {
      out.push_back({ViolationKind::DuplicateCountry, "reached_countries", code});
    }
  }

  if (!in_enum_range(spec.active_status, ActiveStatus::All)) {
    out.push_back({ViolationKind::UnknownEnumToken, "active_status",
                   std::to_string(static_cast<int>(spec.active_status))});
  }
  if (!in_enum_range(spec.category, AdCategory::PoliticalAndIssue)) {
    out.push_back({ViolationKind::UnknownEnumToken, "category",
                   std::to_string(static_cast<int>(spec.category))});
  }
  if (!in_enum_range(spec.visibility, Visibility::Public)) {
    out.push_back({ViolationKind::UnknownEnumToken, "visibility",
                   std::to_string(static_cast<int>(spec.visibility))});
  }

  if (spec.platforms.empty()) {
    out.push_back({ViolationKind::EmptyPlatformList, "platforms", ""});
  }
  std::set<int> seen_platforms;
  for (auto p : spec.platforms) {
    if (!in_enum_range(p, Platform::Oculus)) {
      out.push_back({ViolationKind::UnknownEnumToken, "platforms",
                     std::to_string(static_cast<int>(p))});
    } else if (!seen_platforms.insert(static_cast<int>(p)).second) {
      out.push_back({ViolationKind::DuplicatePlatform, "platforms", std::string(to_string(p))});
    }
  }
  return out;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::EmptySearchTerm: return "EmptySearchTerm";
    case ViolationKind::EmptyCountryList: return "EmptyCountryList";
    case ViolationKind::UnknownCountryCode: return "UnknownCountryCode";
    case ViolationKind::DuplicateCountry: return "DuplicateCountry";
    case ViolationKind::EmptyPlatformList: return "EmptyPlatformList";
    case ViolationKind::DuplicatePlatform: return "DuplicatePlatform";
    case ViolationKind::UnknownEnumToken: return "UnknownEnumToken";
    case ViolationKind::MissingField: return "MissingField";
  }
  return "Unknown";
}

std::string_view to_string(ActiveStatus v) noexcept {
  switch (v) {
    case ActiveStatus::Active: return "ACTIVE";
    case ActiveStatus::Inactive: return "INACTIVE";
    case ActiveStatus::All: return "ALL";
  }
  return "?";
}

std::string_view to_string(AdCategory v) noexcept {
  switch (v) {
    case AdCategory::PoliticalAndIssue: return "POLITICAL_AND_ISSUE";
  }
  return "?";
}

std::string_view to_string(Platform v) noexcept {
  switch (v) {
    case Platform::Facebook: return "FACEBOOK";
    case Platform::Instagram: return "INSTAGRAM";
    case Platform::Messenger: return "MESSENGER";
    case Platform::WhatsApp: return "WHATSAPP";
    case Platform::Oculus: return "OCULUS";
  }
  return "?";
}

std::string_view to_string(Visibility v) noexcept {
  switch (v) {
    case Visibility::Private: return "PRIVATE";
    case Visibility::Public: return "PUBLIC";
  }
  return "?";
}

std::string_view to_string(Gender v) noexcept {
  switch (v) {
    case Gender::Female: return "female";
    case Gender::Male: return "male";
    case Gender::Unknown: return "unknown";
  }
  return "?";
}

std::optional<ActiveStatus> parse_active_status(std::string_view token) {
  for (auto v : {ActiveStatus::Active, ActiveStatus::Inactive, ActiveStatus::All}) {
    if (to_string(v) == token) return v;
  }
  return std::nullopt;
}

std::optional<AdCategory> parse_category(std::string_view token) {
  if (token == to_string(AdCategory::PoliticalAndIssue)) return AdCategory::PoliticalAndIssue;
  return std::nullopt;
}

std::optional<Platform> parse_platform(std::string_view token) {
  for (auto v : all_platforms()) {
    if (to_string(v) == token) return v;
  }
  return std::nullopt;
}

std::optional<Visibility> parse_visibility(std::string_view token) {
  for (auto v : {Visibility::Private, Visibility::Public}) {
    if (to_string(v) == token) return v;
  }
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view token) {
  auto lower = ascii_lower(token);
  for (auto v : {Gender::Female, Gender::Male, Gender::Unknown}) {
    if (to_string(v) == lower) return v;
  }
  return std::nullopt;
}

const std::vector<Platform>& all_platforms() {
  static const std::vector<Platform> platforms = {Platform::Facebook, Platform::Instagram,
                                                  Platform::Messenger, Platform::WhatsApp,
                                                  Platform::Oculus};
  return platforms;
}

std::vector<std::string> validate_ad(const AdRecord& ad) {
  std::vector<std::string> problems;
  if (ad.ad_id.empty()) problems.emplace_back("ad_id is empty");
  if (ad.page_id.empty()) problems.emplace_back("page_id is empty");
  if (ad.delivery_start && ad.delivery_stop && *ad.delivery_start > *ad.delivery_stop) {
    problems.emplace_back("delivery_start is after delivery_stop");
  }
  auto check_range = [&](const std::optional<InsightRange>& r, const char* name) {
    if (r && r->lower > r->upper) problems.emplace_back(std::string(name) + " lower exceeds upper");
  };
  check_range(ad.spend, "spend");
  check_range(ad.impressions, "impressions");
  check_range(ad.potential_reach, "potential_reach");
  if (ad.spend && !ad.currency) problems.emplace_back("spend without currency");
  if (ad.currency && !is_currency_code(*ad.currency)) {
    problems.emplace_back("currency is not an ISO-4217 code");
  }
  if (ad.snapshot_url && !is_absolute_url(*ad.snapshot_url)) {
    problems.emplace_back("snapshot_url is not absolute");
  }
  if (ad.first_seen && ad.last_seen && *ad.first_seen > *ad.last_seen) {
    problems.emplace_back("first_seen is after last_seen");
  }

  std::set<std::pair<std::string, std::string>> regions;
  double regional_sum = 0.0;
  for (const auto& share : ad.regional_distribution) {
    if (!is_iso_country(share.country_code)) {
      problems.emplace_back("regional share has unknown country " + share.country_code);
    }
    if (!valid_percentage(share.percentage)) {
      problems.emplace_back("regional percentage out of range for " + share.region_name);
    }
    if (!regions.emplace(share.country_code, share.region_name).second) {
      problems.emplace_back("duplicate region " + share.country_code + "/" + share.region_name);
    }
    regional_sum += share.percentage;
  }
  if (regional_sum > 100.0 + kRegionalSumTolerance) {
    problems.emplace_back("regional percentages sum above 100");
  }

  std::set<std::pair<std::string, int>> bands;
  for (const auto& share : ad.demographic_distribution) {
    if (!in_enum_range(share.gender, Gender::Unknown)) {
      problems.emplace_back("demographic share has invalid gender");
    }
    if (!valid_percentage(share.percentage)) {
      problems.emplace_back("demographic percentage out of range for " + share.age_range);
    }
    if (!bands.emplace(share.age_range, static_cast<int>(share.gender)).second) {
      problems.emplace_back("duplicate demographic band " + share.age_range);
    }
  }
  return problems;
}

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<Timestamp> try_parse_rfc3339(std::string_view text) {
  using namespace std::chrono;
  std::string_view s = trim(text);
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!is_digit(s[i])) return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };

  auto y = num(0, 4);
  if (!y || s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto mo = num(5, 2);
  auto d = num(8, 2);
  if (!mo || !d) return std::nullopt;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  sys_seconds result = sys_days{ymd};
  if (s.size() == 10) return result;

  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  auto h = num(11, 2);
  auto mi = num(14, 2);
  auto sec = num(17, 2);
  if (!h || !mi || !sec || s.size() < 19 || s[13] != ':' || s[16] != ':') return std::nullopt;
  if (*h > 23 || *mi > 59 || *sec > 60) return std::nullopt;
  result += hours{*h} + minutes{*mi} + seconds{*sec};

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && is_digit(s[pos])) ++pos;
    if (pos == start) return std::nullopt;
  }
  std::string_view zone = s.substr(pos);
  if (zone.empty() || zone == "Z" || zone == "z") return result;
  if (zone.front() != '+' && zone.front() != '-') return std::nullopt;
  int sign = zone.front() == '+' ? 1 : -1;
  std::optional<int> oh, om;
  if (zone.size() == 6 && zone[3] == ':') {
    oh = num(pos + 1, 2);
    om = num(pos + 4, 2);
  } else if (zone.size() == 5) {
    oh = num(pos + 1, 2);
    om = num(pos + 3, 2);
  }
  if (!oh || !om || *oh > 23 || *om > 59) return std::nullopt;
  result -= sign * (hours{*oh} + minutes{*om});
  return result;
}

Timestamp parse_rfc3339(std::string_view text) {
  auto t = try_parse_rfc3339(text);
  if (!t) throw Error(ErrorCode::BadRequest, "invalid RFC-3339 timestamp: " + std::string(text));
  return *t;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(c < 0x80 ? std::tolower(c) : c);
  });
  return out;
}

bool contains_case_insensitive(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  return ascii_lower(haystack).find(ascii_lower(needle)) != std::string::npos;
}

}  // namespace adtracker::domain
