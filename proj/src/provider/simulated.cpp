#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>

#include "adtracker/codec.hpp"
#include "adtracker/provider.hpp"

namespace adtracker::provider {

using namespace adtracker::domain;

namespace {

// splitmix64; used instead of <random> distributions so the generated
// stream does not depend on the standard library implementation.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return next() % n; }
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::uint64_t state_;
};

struct SimPage {
  const char* page_id;
  const char* name;
  const char* renamed;  // name used on ads created from 2020 on, if any
};

constexpr std::array<SimPage, 12> kPages = {{
    {"100200300400501", "Citizens for Clean Water", nullptr},
    {"100200300400502", "Northern Voters Alliance", "Northern Voters Alliance (Official)"},
    {"100200300400503", "Taxpayers United", nullptr},
    {"100200300400504", "Healthy Futures PAC", nullptr},
    {"100200300400505", "Green Ontario Now", nullptr},
    {"100200300400506", "Rally for Jobs", nullptr},
    {"100200300400507", "Sao Paulo Civic Forum", nullptr},
    {"100200300400508", "Britain Decides", nullptr},
    {"100200300400509", "Families First Coalition", "Families First"},
    {"100200300400510", "Frontier Freedom Fund", nullptr},
    {"100200300400511", "Coastal Housing Project", nullptr},
    {"100200300400512", "Liberty Action Network", nullptr},
}};

constexpr std::array<const char*, 8> kTopics = {
    "climate action", "healthcare",  "lower taxes",       "public schools",
    "housing",        "local jobs", "immigration reform", "clean water",
};

// Every template mentions "vote"; some carry commas, quotes and newlines.
constexpr std::array<const char*, 8> kBodies = {
    "Vote {topic} on election day.",
    "Make your voice heard, vote {topic}!",
    "\"Every vote counts,\" says {page}. Support {topic}.",
    "Vote early.\nVote {topic}.\nVote for change.",
    "Trump or not, vote {topic} this fall.",
    "Registered to vote? {topic} needs you.",
    "Your vote, your future: {topic}.",
    "Trump's record on {topic}: vote accordingly.",
};

constexpr std::array<const char*, 9> kImpressions = {
    "<1000",         "1000-4999",       "5000-9999",       "10000-49999", "50000-99999",
    "100000-199999", "200000-499999", "500000-999999", ">1000000",
};
constexpr std::array<const char*, 7> kSpend = {
    "<100", "100-499", "500-999", "1000-4999", "5000-9999", "10000-49999", ">50000",
};
constexpr std::array<const char*, 6> kReach = {
    "<1000", "1000-10000", "10001-50000", "50001-100000", "100001-500000", ">1000000",
};
constexpr std::array<const char*, 7> kAgeBands = {"13-17", "18-24", "25-34", "35-44",
                                                  "45-54", "55-64", "65+"};

// 2019-01-01T00:00:00Z and a two-year span.
constexpr std::int64_t kWindowStart = 1546300800;
constexpr std::int64_t kWindowSpan = 2 * 365 * 86400;
constexpr std::int64_t kRenameAfter = 1577836800;  // 2020-01-01

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

const char* currency_for(std::string_view country) {
  if (country == "CA") return "CAD";
  if (country == "GB") return "GBP";
  if (country == "BR") return "BRL";
  return "USD";
}

// Splits `total` units among `parts` buckets, each at least one unit.
std::vector<int> split_units(SplitMix64& rng, int total, std::size_t parts) {
  std::vector<int> weights(parts);
  int sum = 0;
  for (auto& w : weights) {
    w = 1 + static_cast<int>(rng.below(20));
    sum += w;
  }
  std::vector<int> units(parts);
  int assigned = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    units[i] = std::max(1, weights[i] * total / sum);
    assigned += units[i];
  }
  units[0] += total - assigned;
  if (units[0] < 1) {
    // Rebalance from the largest bucket; only reachable for tiny totals.
    auto largest = std::max_element(units.begin(), units.end());
    *largest += units[0] - 1;
    units[0] = 1;
  }
  return units;
}

AdRecord make_ad(std::uint64_t seed, std::uint64_t index, const std::string& id_prefix) {
  SplitMix64 rng(seed * 0x9E3779B97F4A7C15ULL ^ (index + 1) * 0xD1B54A32D192ED03ULL);
  const auto& regions = simulated_regions();

  char id[32];
  std::snprintf(id, sizeof id, "%s%09llu", id_prefix.c_str(), static_cast<unsigned long long>(index));

  AdRecord ad;
  ad.ad_id = id;
  const SimPage& page = kPages[rng.below(kPages.size())];
  ad.page_id = page.page_id;
  auto created = kWindowStart + static_cast<std::int64_t>(rng.below(kWindowSpan));
  ad.creation_time = Timestamp{std::chrono::seconds{created}};
  ad.page_name = (page.renamed && created >= kRenameAfter) ? page.renamed : page.name;

  std::string topic = kTopics[rng.below(kTopics.size())];
  std::string body = kBodies[rng.below(kBodies.size())];
  body = replace_all(body, "{topic}", topic);
  ad.body = replace_all(body, "{page}", ad.page_name);

  if (rng.chance(60)) {
    ad.link_title = topic + " matters";
    ad.link_caption = "example.org";
    ad.link_description = "Learn more about " + topic + ", and how to vote.";
  }
  ad.snapshot_url = "https://www.facebook.com/ads/archive/render_ad/?id=" + ad.ad_id;

  if (rng.chance(80)) {
    auto start = created + static_cast<std::int64_t>(rng.below(7 * 86400));
    ad.delivery_start = Timestamp{std::chrono::seconds{start}};
    if (rng.chance(50)) {
      auto stop = start + 86400 * (1 + static_cast<std::int64_t>(rng.below(30)));
      ad.delivery_stop = Timestamp{std::chrono::seconds{stop}};
    }
  }

  // Regional distribution: one or two countries, one to four regions.
  std::vector<std::size_t> picked;
  std::size_t primary = rng.below(regions.size());
  picked.push_back(primary);
  std::size_t wanted = 1 + rng.below(4);
  bool second_country = rng.chance(25);
  for (int attempts = 0; picked.size() < wanted && attempts < 64; ++attempts) {
    std::size_t r = rng.below(regions.size());
    bool same_country = regions[r].country_code == regions[primary].country_code;
    if ((same_country || second_country) && std::find(picked.begin(), picked.end(), r) == picked.end()) {
      picked.push_back(r);
    }
  }
  // Tenths of a percent; occasionally leave part of the audience unassigned.
  int total_tenths = rng.chance(20) ? 600 + static_cast<int>(rng.below(400)) : 1000;
  auto units = split_units(rng, total_tenths, picked.size());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const auto& reg = regions[picked[i]];
    ad.regional_distribution.push_back({reg.country_code, reg.region_name, units[i] / 10.0});
  }

  const std::string& country = regions[primary].country_code;
  if (rng.chance(90)) {
    ad.spend = parse_insight_range(kSpend[rng.below(kSpend.size())]);
    ad.currency = currency_for(country);
  }
  if (rng.chance(70)) ad.funded_entity = "Paid for by " + ad.page_name;
  ad.impressions = parse_insight_range(kImpressions[rng.below(kImpressions.size())]);
  if (rng.chance(85)) ad.potential_reach = parse_insight_range(kReach[rng.below(kReach.size())]);

  // Demographic distribution over distinct (age band, gender) cells.
  std::set<std::pair<std::size_t, int>> cells;
  std::size_t n_cells = 3 + rng.below(4);
  while (cells.size() < n_cells) {
    cells.emplace(rng.below(kAgeBands.size()), static_cast<int>(rng.below(3)));
  }
  auto demo_units = split_units(rng, 1000, cells.size());
  std::size_t k = 0;
  for (const auto& [band, gender] : cells) {
    ad.demographic_distribution.push_back(
        {kAgeBands[band], static_cast<Gender>(gender), demo_units[k++] / 10.0});
  }
  return ad;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string spec_fingerprint(const JobSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(codec::to_json(spec).dump())));
  return buf;
}

std::size_t decode_cursor(const PageCursor& cursor, const std::string& fingerprint) {
  const std::string prefix = "sim:" + fingerprint + ":";
  if (cursor.token.rfind(prefix, 0) != 0) {
    throw Error(ErrorCode::BadRequest, "cursor was not issued for this search");
  }
  try {
    std::size_t used = 0;
    auto pos = std::stoull(cursor.token.substr(prefix.size()), &used);
    if (used != cursor.token.size() - prefix.size()) throw std::invalid_argument("trailing");
    return static_cast<std::size_t>(pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, "malformed cursor token");
  }
}

}  // namespace

bool matches_spec(const AdRecord& ad, const JobSpec& spec) {
  const auto& term = spec.search_term;
  bool text_hit = contains_case_insensitive(ad.body, term) ||
                  contains_case_insensitive(ad.page_name, term) ||
                  (ad.link_title && contains_case_insensitive(*ad.link_title, term)) ||
                  (ad.link_caption && contains_case_insensitive(*ad.link_caption, term)) ||
                  (ad.link_description && contains_case_insensitive(*ad.link_description, term));
  if (!text_hit) return false;

  bool reached = std::any_of(ad.regional_distribution.begin(), ad.regional_distribution.end(),
                             [&](const RegionalShare& s) {
                               return std::find(spec.reached_countries.begin(),
                                                spec.reached_countries.end(),
                                                s.country_code) != spec.reached_countries.end();
                             });
  if (!reached) return false;

  switch (spec.active_status) {
    case ActiveStatus::Active: return !ad.delivery_stop.has_value();
    case ActiveStatus::Inactive: return ad.delivery_stop.has_value();
    case ActiveStatus::All: return true;
  }
  return false;
}

SimulatedProvider::SimulatedProvider(std::vector<AdRecord> fixture, int page_size,
                                     std::size_t rejected_at_load)
    : fixture_(std::move(fixture)), page_size_(page_size), rejected_at_load_(rejected_at_load) {
  if (page_size_ < 1 || page_size_ > 250) {
    throw Error(ErrorCode::BadRequest, "page_size must be in [1, 250]");
  }
}

SimulatedProvider SimulatedProvider::from_jsonl(const std::filesystem::path& path, int page_size) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadRequest, "cannot open fixture " + path.string());
  auto loaded = codec::read_ad_lines(in);
  return SimulatedProvider(std::move(loaded.records), page_size, loaded.skipped);
}

Page SimulatedProvider::fetch_page(const JobSpec& spec, const std::optional<PageCursor>& cursor) {
  const auto fingerprint = spec_fingerprint(spec);
  std::size_t pos = cursor ? decode_cursor(*cursor, fingerprint) : 0;

  Page page;
  if (!cursor && rejected_at_load_ > 0) {
    page.malformed = rejected_at_load_;
    page.problems.push_back(std::to_string(rejected_at_load_) + " fixture lines failed to load");
  }
  for (; pos < fixture_.size(); ++pos) {
    if (!matches_spec(fixture_[pos], spec)) continue;
    if (page.ads.size() == static_cast<std::size_t>(page_size_)) {
      page.next = PageCursor{"sim:" + fingerprint + ":" + std::to_string(pos)};
      break;
    }
    page.ads.push_back(fixture_[pos]);
  }
  return page;
}

const std::vector<SimulatedRegion>& simulated_regions() {
  static const std::vector<SimulatedRegion> regions = {
      {"CA", "Ontario"},        {"CA", "Quebec"},         {"CA", "British Columbia"},
      {"CA", "Alberta"},        {"CA", "Manitoba"},       {"CA", "Nova Scotia"},
      {"US", "California"},     {"US", "Texas"},          {"US", "New York"},
      {"US", "Florida"},        {"US", "Washington"},     {"US", "Pennsylvania"},
      {"US", "New Jersey"},     {"US", "Massachusetts"},  {"GB", "England"},
      {"GB", "Scotland"},       {"GB", "Wales"},          {"GB", "Northern Ireland"},
      {"BR", "São Paulo"},      {"BR", "Rio de Janeiro"}, {"BR", "Minas Gerais"},
      {"BR", "Bahia"},          {"BR", "Paraná"},
  };
  return regions;
}

std::vector<std::string> simulated_countries() {
  std::vector<std::string> out;
  for (const auto& r : simulated_regions()) {
    if (std::find(out.begin(), out.end(), r.country_code) == out.end()) out.push_back(r.country_code);
  }
  return out;
}

std::vector<AdRecord> generate_ads(std::uint64_t seed, std::size_t n_ads) {
  SplitMix64 prefix_rng(seed);
  char prefix[8];
  std::snprintf(prefix, sizeof prefix, "%06llu",
                static_cast<unsigned long long>(100000 + prefix_rng.below(900000)));
  std::vector<AdRecord> ads;
  ads.reserve(n_ads);
  for (std::size_t i = 0; i < n_ads; ++i) ads.push_back(make_ad(seed, i, prefix));
  return ads;
}

std::shared_ptr<SimulatedProvider> seed_simulated(std::uint64_t seed, std::size_t n_ads, int page_size) {
  return std::make_shared<SimulatedProvider>(generate_ads(seed, n_ads), page_size);
}

JobSpec match_all_spec() {
  JobSpec spec;
  spec.search_term = "vote";
  spec.reached_countries = simulated_countries();
  spec.active_status = ActiveStatus::All;
  spec.category = AdCategory::PoliticalAndIssue;
  spec.platforms = all_platforms();
  spec.visibility = Visibility::Private;
  return spec;
}

}  // namespace adtracker::provider
