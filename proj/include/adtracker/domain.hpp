#pragma once

// Canonical schema for archived ads, job registrations and the
// percentage-weighted audience distributions attached to each ad.

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adtracker/error.hpp"

namespace adtracker::domain {

using Timestamp = std::chrono::sys_seconds;

// Upper bound used for open-ended ">L" ranges.
inline constexpr std::uint64_t kSentinelUpper = 1'000'000'000'000ULL;

struct InsightRange {
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;

  friend bool operator==(const InsightRange&, const InsightRange&) = default;
};

struct RegionalShare {
  std::string country_code;
  std::string region_name;
  double percentage = 0.0;

  friend bool operator==(const RegionalShare&, const RegionalShare&) = default;
};

enum class Gender { Female, Male, Unknown };

struct DemographicShare {
  std::string age_range;
  Gender gender = Gender::Unknown;
  double percentage = 0.0;

  friend bool operator==(const DemographicShare&, const DemographicShare&) = default;
};

struct AdRecord {
  std::string ad_id;
  std::string page_id;
  std::string page_name;
  Timestamp creation_time{};
  std::string body;
  std::optional<std::string> link_caption;
  std::optional<std::string> link_description;
  std::optional<std::string> link_title;
  std::optional<std::string> snapshot_url;
  std::optional<InsightRange> spend;
  std::optional<std::string> currency;
  std::optional<std::string> funded_entity;
  std::optional<Timestamp> delivery_start;
  std::optional<Timestamp> delivery_stop;
  std::optional<InsightRange> impressions;
  std::optional<InsightRange> potential_reach;
  std::vector<RegionalShare> regional_distribution;
  std::vector<DemographicShare> demographic_distribution;
  // Maintained by the store; providers leave these empty.
  std::optional<Timestamp> first_seen;
  std::optional<Timestamp> last_seen;

  friend bool operator==(const AdRecord&, const AdRecord&) = default;
};

// delivery_start when present, otherwise creation_time.
Timestamp analysis_time(const AdRecord& ad);

enum class ActiveStatus { Active, Inactive, All };
enum class AdCategory { PoliticalAndIssue };
enum class Platform { Facebook, Instagram, Messenger, WhatsApp, Oculus };
enum class Visibility { Private, Public };

struct JobSpec {
  std::string search_term;
  std::vector<std::string> reached_countries;
  ActiveStatus active_status = ActiveStatus::Active;
  AdCategory category = AdCategory::PoliticalAndIssue;
  std::vector<Platform> platforms;
  Visibility visibility = Visibility::Private;

  friend bool operator==(const JobSpec&, const JobSpec&) = default;
};

enum class ViolationKind {
  EmptySearchTerm,
  EmptyCountryList,
  UnknownCountryCode,
  DuplicateCountry,
  EmptyPlatformList,
  DuplicatePlatform,
  UnknownEnumToken,
  MissingField,
};

struct Violation {
  ViolationKind kind;
  std::string field;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string_view to_string(ViolationKind kind) noexcept;

class InvalidSpecError : public Error {
 public:
  explicit InvalidSpecError(std::vector<Violation> violations);
  [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// --- insight ranges --------------------------------------------------------

// Accepts "L-U", "N", "<U" and ">L" with optional thousands separators.
// Throws Error(MalformedRange) on anything else.
InsightRange parse_insight_range(std::string_view text);
std::string format_insight_range(const InsightRange& r);
double range_midpoint(const InsightRange& r);

// --- job specs ---------------------------------------------------------------

// Empty result means the spec is acceptable.
std::vector<Violation> validate_job_spec(const JobSpec& spec);

std::string_view to_string(ActiveStatus v) noexcept;
std::string_view to_string(AdCategory v) noexcept;
std::string_view to_string(Platform v) noexcept;
std::string_view to_string(Visibility v) noexcept;
std::string_view to_string(Gender v) noexcept;

std::optional<ActiveStatus> parse_active_status(std::string_view token);
std::optional<AdCategory> parse_category(std::string_view token);
std::optional<Platform> parse_platform(std::string_view token);
std::optional<Visibility> parse_visibility(std::string_view token);
std::optional<Gender> parse_gender(std::string_view token);

const std::vector<Platform>& all_platforms();

// --- countries -----------------------------------------------------------------

bool is_iso_country(std::string_view code);
// ISO code (any case) or a known alias such as "England" or "Brazil".
std::optional<std::string> resolve_country(std::string_view label);

// --- ad records ------------------------------------------------------------------

// Every broken record invariant, human readable. Empty means valid.
std::vector<std::string> validate_ad(const AdRecord& ad);
inline bool is_valid_ad(const AdRecord& ad) { return validate_ad(ad).empty(); }

// Tolerance on summed regional percentages for provider rounding.
inline constexpr double kRegionalSumTolerance = 0.5;

// --- time ----------------------------------------------------------------------

// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp t);
// Accepts Z, +HH:MM, +HHMM offsets, optional fractional seconds, and bare
// dates. Throws Error(BadRequest) when unparseable.
Timestamp parse_rfc3339(std::string_view text);
std::optional<Timestamp> try_parse_rfc3339(std::string_view text);

// --- strings -------------------------------------------------------------------

std::string ascii_lower(std::string_view s);
bool contains_case_insensitive(std::string_view haystack, std::string_view needle);

}  // namespace adtracker::domain
