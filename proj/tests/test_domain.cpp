#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "adtracker/codec.hpp"
#include "adtracker/csv.hpp"
#include "adtracker/domain.hpp"
#include "support.hpp"

using namespace adtracker;
using namespace adtracker::domain;

namespace {

JobSpec trump_in_canada() {
  JobSpec s;
  s.search_term = "Trump";
  s.reached_countries = {"CA"};
  s.active_status = ActiveStatus::Active;
  s.platforms = {Platform::Facebook};
  return s;
}

bool has_kind(const std::vector<Violation>& v, ViolationKind k) {
  return std::any_of(v.begin(), v.end(), [k](const Violation& x) { return x.kind == k; });
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::StorageFailure;
}

}  // namespace

TEST_CASE("insight range grammar") {
  CHECK(parse_insight_range("1000-4999") == InsightRange{1000, 4999});
  CHECK(parse_insight_range("0") == InsightRange{0, 0});
  CHECK(parse_insight_range("<100") == InsightRange{0, 99});
  CHECK(parse_insight_range(">1000000") == InsightRange{1000000, kSentinelUpper});
  CHECK(parse_insight_range("1,000-4,999") == InsightRange{1000, 4999});
  CHECK(parse_insight_range(" 12 ") == InsightRange{12, 12});

  for (const char* bad : {"5000-100", "", "-5", "abc", "1-", "-", "<0", "1,00", "10,0000", "1--2", "1-2-3", ",100",
                          "<", ">", "1.5", "99999999999999999999999"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { parse_insight_range(bad); }) == ErrorCode::MalformedRange);
  }
}

TEST_CASE("insight range format-then-parse is exact on random bounds") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> dist(0, 1'000'000'000);
  for (int i = 0; i < 20000; ++i) {
    auto a = dist(rng);
    auto b = dist(rng);
    InsightRange r{std::min(a, b), std::max(a, b)};
    REQUIRE(parse_insight_range(format_insight_range(r)) == r);
  }
}

TEST_CASE("range midpoint") {
  CHECK(range_midpoint({1000, 4999}) == 2999.5);
  CHECK(range_midpoint({0, 0}) == 0.0);
  CHECK(range_midpoint({5000, kSentinelUpper}) == 5000.0);
}

TEST_CASE("job spec validation") {
  CHECK(validate_job_spec(trump_in_canada()).empty());

  auto s = trump_in_canada();
  s.search_term = "  ";
  auto v = validate_job_spec(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::EmptySearchTerm);

  s = trump_in_canada();
  s.reached_countries = {"ZZ"};
  v = validate_job_spec(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::UnknownCountryCode);
  CHECK(v[0].detail == "ZZ");

  s = trump_in_canada();
  s.search_term = "";
  s.reached_countries = {};
  s.platforms = {};
  v = validate_job_spec(s);
  CHECK(has_kind(v, ViolationKind::EmptySearchTerm));
  CHECK(has_kind(v, ViolationKind::EmptyCountryList));
  CHECK(has_kind(v, ViolationKind::EmptyPlatformList));

  s = trump_in_canada();
  s.platforms = {Platform::Facebook, Platform::Facebook};
  CHECK(has_kind(validate_job_spec(s), ViolationKind::DuplicatePlatform));

  s = trump_in_canada();
  s.active_status = static_cast<ActiveStatus>(17);
  CHECK(has_kind(validate_job_spec(s), ViolationKind::UnknownEnumToken));
}

TEST_CASE("job spec json decoding resolves aliases and reports every problem") {
  nlohmann::json j = {{"search_term", "Trump"},
                      {"reached_countries", {"Canada", "England", "brazil"}},
                      {"active_status", "ACTIVE"},
                      {"category", "POLITICAL_AND_ISSUE"},
                      {"platforms", {"FACEBOOK", "INSTAGRAM"}},
                      {"visibility", "PUBLIC"}};
  auto parsed = codec::job_spec_from_json(j);
  REQUIRE(std::holds_alternative<JobSpec>(parsed));
  const auto& spec = std::get<JobSpec>(parsed);
  CHECK(spec.reached_countries == std::vector<std::string>{"CA", "GB", "BR"});
  CHECK(spec.visibility == Visibility::Public);
  // Accepting twice gives the same spec.
  auto again = codec::job_spec_from_json(codec::to_json(spec));
  REQUIRE(std::holds_alternative<JobSpec>(again));
  CHECK(std::get<JobSpec>(again) == spec);

  nlohmann::json broken = {{"search_term", ""}, {"reached_countries", {"North America"}}, {"active_status", "SOMETIMES"},
                           {"platforms", {"MYSPACE"}}};
  auto bad = codec::job_spec_from_json(broken);
  REQUIRE(std::holds_alternative<std::vector<Violation>>(bad));
  const auto& v = std::get<std::vector<Violation>>(bad);
  CHECK(has_kind(v, ViolationKind::EmptySearchTerm));
  CHECK(has_kind(v, ViolationKind::UnknownCountryCode));
  CHECK(has_kind(v, ViolationKind::UnknownEnumToken));
  CHECK(has_kind(v, ViolationKind::MissingField));  // category
}

TEST_CASE("enum tokens round-trip") {
  for (auto p : all_platforms()) CHECK(parse_platform(to_string(p)) == p);
  for (auto a : {ActiveStatus::Active, ActiveStatus::Inactive, ActiveStatus::All}) {
    CHECK(parse_active_status(to_string(a)) == a);
  }
  CHECK(parse_category("POLITICAL_AND_ISSUE") == AdCategory::PoliticalAndIssue);
  CHECK_FALSE(parse_platform("facebook").has_value());
  CHECK(parse_gender("female") == Gender::Female);
}

TEST_CASE("countries") {
  CHECK(is_iso_country("CA"));
  CHECK(is_iso_country("GB"));
  CHECK_FALSE(is_iso_country("UK"));
  CHECK_FALSE(is_iso_country("ca"));
  CHECK(resolve_country("England") == "GB");
  CHECK(resolve_country("UK") == "GB");
  CHECK(resolve_country("ca") == "CA");
  CHECK(resolve_country("Brazil") == "BR");
  CHECK_FALSE(resolve_country("North America").has_value());
  CHECK_FALSE(resolve_country("Atlantis").has_value());
}

TEST_CASE("rfc3339") {
  using namespace std::chrono;
  const Timestamp t = sys_days{year{2020} / 2 / 29} + hours{13} + minutes{5} + seconds{9};
  CHECK(format_rfc3339(t) == "2020-02-29T13:05:09Z");
  CHECK(parse_rfc3339("2020-02-29T13:05:09Z") == t);
  CHECK(parse_rfc3339("2020-02-29T15:05:09+02:00") == t);
  CHECK(parse_rfc3339("2020-02-29T08:05:09-0500") == t);
  CHECK(parse_rfc3339("2020-02-29T13:05:09.750Z") == t);
  CHECK(parse_rfc3339("2020-02-29") == Timestamp{sys_days{year{2020} / 2 / 29}});
  for (const char* bad : {"2020-02-30T00:00:00Z", "2020-13-01", "yesterday", "2020-01-01T25:00:00Z", ""}) {
    CAPTURE(bad);
    CHECK_FALSE(try_parse_rfc3339(bad).has_value());
  }
}

TEST_CASE("validator acceptance implies the record invariants") {
  std::mt19937_64 rng(5);
  auto coin = [&](int pct) { return static_cast<int>(rng() % 100) < pct; };
  std::size_t accepted = 0;
  for (int i = 0; i < 5000; ++i) {
    AdRecord ad;
    ad.ad_id = coin(95) ? std::to_string(rng() % 1000) : "";
    ad.page_id = coin(95) ? "p" : "";
    ad.creation_time = Timestamp{std::chrono::seconds{1'550'000'000 + static_cast<std::int64_t>(rng() % 10'000'000)}};
    if (coin(70)) ad.delivery_start = ad.creation_time + std::chrono::seconds{static_cast<int>(rng() % 1000) - 200};
    if (coin(50)) ad.delivery_stop = ad.creation_time + std::chrono::seconds{static_cast<int>(rng() % 1000) - 200};
    auto range = [&] {
      std::uint64_t a = rng() % 1000, b = rng() % 1000;
      return InsightRange{a, b};
    };
    if (coin(60)) ad.spend = range();
    if (coin(60)) ad.currency = coin(90) ? "USD" : "usd";
    if (coin(60)) ad.impressions = range();
    const int regions = static_cast<int>(rng() % 4);
    for (int r = 0; r < regions; ++r) {
      ad.regional_distribution.push_back({coin(95) ? "CA" : "XX", "R" + std::to_string(rng() % 4),
                                          static_cast<double>(rng() % 700) / 10.0 - 2.0});
    }
    const int bands = static_cast<int>(rng() % 3);
    for (int d = 0; d < bands; ++d) {
      ad.demographic_distribution.push_back({"18-24", static_cast<Gender>(rng() % 3), static_cast<double>(rng() % 110)});
    }
    if (!is_valid_ad(ad)) continue;
    ++accepted;
    CHECK_FALSE(ad.ad_id.empty());
    CHECK_FALSE(ad.page_id.empty());
    if (ad.delivery_start && ad.delivery_stop) CHECK(*ad.delivery_start <= *ad.delivery_stop);
    for (const auto& r : {ad.spend, ad.impressions}) {
      if (r) CHECK(r->lower <= r->upper);
    }
    if (ad.spend) CHECK(ad.currency.has_value());
    double sum = 0;
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& s : ad.regional_distribution) {
      CHECK(s.percentage >= 0.0);
      CHECK(s.percentage <= 100.0);
      CHECK(keys.insert({s.country_code, s.region_name}).second);
      sum += s.percentage;
    }
    CHECK(sum <= 100.5);
    std::set<std::pair<std::string, int>> cells;
    for (const auto& d : ad.demographic_distribution) {
      CHECK(d.percentage >= 0.0);
      CHECK(d.percentage <= 100.0);
      CHECK(cells.insert({d.age_range, static_cast<int>(d.gender)}).second);
    }
  }
  CHECK(accepted > 200);
}

TEST_CASE("ad json round-trip and JSON Lines") {
  std::mt19937_64 rng(3);
  auto ads = testing::random_ads(rng, 200);
  for (const auto& ad : ads) {
    REQUIRE(is_valid_ad(ad));
    CHECK(codec::ad_from_json(codec::to_json(ad)) == ad);
  }
  std::stringstream buf;
  codec::write_ad_lines(buf, ads);
  buf << "\n{not json}\n";
  auto back = codec::read_ad_lines(buf);
  CHECK(back.records == ads);
  CHECK(back.skipped == 1);
}

TEST_CASE("ad json rejects structural problems") {
  std::mt19937_64 rng(1);
  nlohmann::json j = codec::to_json(testing::random_ads(rng, 1).front());
  j.erase("ad_id");
  CHECK(code_of([&] { codec::ad_from_json(j); }) == ErrorCode::MalformedPayload);
}

TEST_CASE("csv writer quoting against an independent reader") {
  std::ostringstream out;
  csv::Writer w(out);
  w.field("plain").field("a,b").field("say \"hi\"").field("line\nbreak").field("cr\rhere").field("").field("x", true);
  w.end_row();
  w.field("second");
  w.end_row();
  const std::string text = out.str();
  CHECK(text.substr(0, 6) == "plain,");
  auto rows = testing::rfc4180_read(text);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"plain", "a,b", "say \"hi\"", "line\nbreak", "cr\rhere", "", "x"});
  CHECK(rows[1] == std::vector<std::string>{"second"});
  CHECK(csv::parse(text) == rows);
}
