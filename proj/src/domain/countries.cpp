#include <algorithm>
#include <array>
#include <cctype>
#include <string_view>
#include <utility>

#include "adtracker/domain.hpp"

namespace adtracker::domain {

namespace {

// ISO 3166-1 alpha-2 officially assigned codes, sorted.
constexpr std::array<std::string_view, 249> kIsoCodes = {
    "AD", "AE", "AF", "AG", "AI", "AL", "AM", "AO", "AQ", "AR", "AS", "AT", "AU", "AW", "AX", "AZ",
    "BA", "BB", "BD", "BE", "BF", "BG", "BH", "BI", "BJ", "BL", "BM", "BN", "BO", "BQ", "BR", "BS",
    "BT", "BV", "BW", "BY", "BZ", "CA", "CC", "CD", "CF", "CG", "CH", "CI", "CK", "CL", "CM", "CN",
    "CO", "CR", "CU", "CV", "CW", "CX", "CY", "CZ", "DE", "DJ", "DK", "DM", "DO", "DZ", "EC", "EE",
    "EG", "EH", "ER", "ES", "ET", "FI", "FJ", "FK", "FM", "FO", "FR", "GA", "GB", "GD", "GE", "GF",
    "GG", "GH", "GI", "GL", "GM", "GN", "GP", "GQ", "GR", "GS", "GT", "GU", "GW", "GY", "HK", "HM",
    "HN", "HR", "HT", "HU", "ID", "IE", "IL", "IM", "IN", "IO", "IQ", "IR", "IS", "IT", "JE", "JM",
    "JO", "JP", "KE", "KG", "KH", "KI", "KM", "KN", "KP", "KR", "KW", "KY", "KZ", "LA", "LB", "LC",
    "LI", "LK", "LR", "LS", "LT", "LU", "LV", "LY", "MA", "MC", "MD", "ME", "MF", "MG", "MH", "MK",
    "ML", "MM", "MN", "MO", "MP", "MQ", "MR", "MS", "MT", "MU", "MV", "MW", "MX", "MY", "MZ", "NA",
    "NC", "NE", "NF", "NG", "NI", "NL", "NO", "NP", "NR", "NU", "NZ", "OM", "PA", "PE", "PF", "PG",
    "PH", "PK", "PL", "PM", "PN", "PR", "PS", "PT", "PW", "PY", "QA", "RE", "RO", "RS", "RU", "RW",
    "SA", "SB", "SC", "SD", "SE", "SG", "SH", "SI", "SJ", "SK", "SL", "SM", "SN", "SO", "SR", "SS",
    "ST", "SV", "SX", "SY", "SZ", "TC", "TD", "TF", "TG", "TH", "TJ", "TK", "TL", "TM", "TN", "TO",
    "TR", "TT", "TV", "TW", "TZ", "UA", "UG", "UM", "US", "UY", "UZ", "VA", "VC", "VE", "VG", "VI",
    "VN", "VU", "WF", "WS", "YE", "YT", "ZA", "ZM", "ZW",
};

// Lower-case label -> ISO code. Continents are deliberately absent.
constexpr std::array<std::pair<std::string_view, std::string_view>, 24> kAliases = {{
    {"australia", "AU"},
    {"brasil", "BR"},
    {"brazil", "BR"},
    {"britain", "GB"},
    {"canada", "CA"},
    {"england", "GB"},
    {"france", "FR"},
    {"germany", "DE"},
    {"great britain", "GB"},
    {"india", "IN"},
    {"ireland", "IE"},
    {"mexico", "MX"},
    {"new zealand", "NZ"},
    {"northern ireland", "GB"},
    {"scotland", "GB"},
    {"spain", "ES"},
    {"u.k.", "GB"},
    {"u.s.", "US"},
    {"uk", "GB"},
    {"united kingdom", "GB"},
    {"united states", "US"},
    {"united states of america", "US"},
    {"usa", "US"},
    {"wales", "GB"},
}};

std::string trim_copy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

bool is_iso_country(std::string_view code) {
  return std::binary_search(kIsoCodes.begin(), kIsoCodes.end(), code);
}

std::optional<std::string> resolve_country(std::string_view label) {
  std::string t = trim_copy(label);
  if (t.size() == 2) {
    std::string upper = t;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (is_iso_country(upper)) return upper;
  }
  std::string key = ascii_lower(t);
  for (const auto& [alias, code] : kAliases) {
    if (alias == key) return std::string(code);
  }
  return std::nullopt;
}

}  // namespace adtracker::domain
