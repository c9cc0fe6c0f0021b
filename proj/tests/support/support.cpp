#include "support.hpp"

#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "adtracker/log.hpp"

namespace testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::mt19937_64 rng{std::random_device{}()};
  for (int i = 0; i < 100; ++i) {
    auto candidate = fs::temp_directory_path() / ("adtracker-test-" + std::to_string(rng()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

QuietLog::QuietLog() { log::set_sink(nullptr); }
QuietLog::~QuietLog() { log::set_sink(&std::clog); }

std::vector<std::vector<std::string>> rfc4180_read(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (text[i] == '"') {
      ++i;
      while (true) {
        if (i >= n) throw std::runtime_error("unterminated quote");
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += text[i++];
      }
    } else {
      while (i < n && text[i] != ',' && text[i] != '\r' && text[i] != '\n') field += text[i++];
    }
    if (i >= n) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
      break;
    }
    if (text[i] == ',') {
      record.push_back(std::move(field));
      field.clear();
      ++i;
      continue;
    }
    if (text[i] == '\r') {
      if (i + 1 >= n || text[i + 1] != '\n') throw std::runtime_error("bare CR outside quotes");
      ++i;
    } else {
      throw std::runtime_error("bare LF: records must end with CRLF");
    }
    ++i;
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
  }
  return records;
}

double chord_distance_km(double lat1, double lon1, double lat2, double lon2) {
  const double k = M_PI / 180.0;
  auto unit = [k](double lat, double lon) {
    return std::array<double, 3>{std::cos(lat * k) * std::cos(lon * k), std::cos(lat * k) * std::sin(lon * k),
                                 std::sin(lat * k)};
  };
  auto a = unit(lat1, lon1);
  auto b = unit(lat2, lon2);
  double c = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
  c = std::min(c, 2.0);
  return 2.0 * 6371.0 * std::asin(c / 2.0);
}

std::vector<std::size_t> brute_force_components(const std::vector<geo::ClusterPoint>& points, double threshold_km) {
  std::vector<std::size_t> label(points.size());
  std::iota(label.begin(), label.end(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i == j) continue;
      const auto& a = points[i].coord;
      const auto& b = points[j].coord;
      const bool same = a.lat == b.lat && a.lon == b.lon;
      if (!same && !(chord_distance_km(a.lat, a.lon, b.lat, b.lon) < threshold_km)) continue;
      const auto from = label[j];
      const auto to = label[i];
      if (from == to) continue;
      for (auto& l : label) {
        if (l == from) l = to;
      }
    }
  }
  return label;
}

nlohmann::json to_archive_json(const domain::AdRecord& ad) {
  using nlohmann::json;
  json j;
  j["id"] = ad.ad_id;
  j["page_id"] = ad.page_id;
  j["page_name"] = ad.page_name;
  j["ad_creation_time"] = domain::format_rfc3339(ad.creation_time);
  j["ad_creative_bodies"] = json::array({ad.body});
  if (ad.link_caption) j["ad_creative_link_captions"] = json::array({*ad.link_caption});
  if (ad.link_description) j["ad_creative_link_descriptions"] = json::array({*ad.link_description});
  if (ad.link_title) j["ad_creative_link_titles"] = json::array({*ad.link_title});
  if (ad.snapshot_url) j["ad_snapshot_url"] = *ad.snapshot_url;
  auto range = [](const domain::InsightRange& r) {
    return json{{"lower_bound", std::to_string(r.lower)}, {"upper_bound", std::to_string(r.upper)}};
  };
  if (ad.spend) j["spend"] = range(*ad.spend);
  if (ad.currency) j["currency"] = *ad.currency;
  if (ad.funded_entity) j["bylines"] = *ad.funded_entity;
  if (ad.delivery_start) j["ad_delivery_start_time"] = domain::format_rfc3339(*ad.delivery_start);
  if (ad.delivery_stop) j["ad_delivery_stop_time"] = domain::format_rfc3339(*ad.delivery_stop);
  if (ad.impressions) j["impressions"] = range(*ad.impressions);
  if (ad.potential_reach) j["estimated_audience_size"] = range(*ad.potential_reach);
  j["delivery_by_region"] = json::array();
  for (const auto& r : ad.regional_distribution) {
    j["delivery_by_region"].push_back(
        {{"region", r.region_name}, {"country", r.country_code}, {"percentage", std::to_string(r.percentage / 100.0)}});
  }
  j["demographic_distribution"] = json::array();
  for (const auto& d : ad.demographic_distribution) {
    j["demographic_distribution"].push_back(
        {{"age", d.age_range}, {"gender", domain::to_string(d.gender)}, {"percentage", d.percentage / 100.0}});
  }
  return j;
}

Instant epoch_2021() { return Instant{std::chrono::sys_days{std::chrono::year{2021} / 1 / 1}}; }

store::Account make_account(store::Store& s, const std::string& email, store::Role role, store::AccountStatus status) {
  static const accounts::PasswordHasher hasher(accounts::HashStrength::Minimal);
  store::Account a;
  a.email = email;
  a.password_hash = hasher.hash("correct horse battery staple");
  a.role = role;
  a.status = status;
  a.attestation = {true, true};
  a.created_at = store::to_timestamp(epoch_2021());
  return s.create_account(a);
}

std::vector<domain::AdRecord> random_ads(std::mt19937_64& rng, std::size_t n) {
  struct R {
    const char* cc;
    const char* name;
  };
  static const std::vector<R> regions = {
      {"CA", "Ontario"},   {"CA", "Quebec"},        {"CA", "Alberta"},    {"US", "Texas"},
      {"US", "New York"},  {"US", "New Jersey"},    {"US", "California"}, {"GB", "England"},
      {"GB", "Wales"},     {"BR", "São Paulo"},     {"BR", "Paraná"},     {"BR", "Bahia"},
      {"CA", "Atlantis"},  {"US", "Gotham"},
  };
  static const std::vector<std::string> bodies = {
      "Vote today", "Vote, then vote again", "She said \"vote\"", "Line one\r\nline two, vote",
      "plain vote", "multi\nline\nvote",
  };
  static const std::vector<std::pair<std::string, std::string>> pages = {
      {"501", "Alpha"}, {"502", "Beta"}, {"503", "Gamma"}, {"504", "Delta"}, {"505", "Epsilon"}, {"506", "Zeta"},
  };
  std::uniform_int_distribution<int> pick_region(0, static_cast<int>(regions.size()) - 1);
  std::uniform_int_distribution<int> tenths(1, 400);
  std::vector<domain::AdRecord> out;
  out.reserve(n);
  const auto base = std::chrono::sys_days{std::chrono::year{2019} / 1 / 1};
  for (std::size_t i = 0; i < n; ++i) {
    domain::AdRecord ad;
    ad.ad_id = std::to_string(900000000000 + i);
    const auto& page = pages[rng() % pages.size()];
    ad.page_id = page.first;
    ad.page_name = page.second + (rng() % 3 == 0 ? " (renamed)" : "");
    ad.creation_time = domain::Timestamp{base} + std::chrono::seconds{static_cast<std::int64_t>(rng() % (700LL * 86400))};
    ad.body = bodies[rng() % bodies.size()];
    if (rng() % 2) ad.link_title = "Title, with comma";
    if (rng() % 2) ad.delivery_start = ad.creation_time + std::chrono::hours{rng() % 48};
    if (rng() % 3 == 0) ad.delivery_stop = ad.creation_time + std::chrono::hours{72};
    if (rng() % 4) {
      std::uint64_t lo = (rng() % 50) * 1000;
      ad.impressions = domain::InsightRange{lo, lo + 999};
    }
    if (rng() % 2) {
      ad.spend = domain::InsightRange{100, 199};
      ad.currency = "USD";
    }
    int remaining = 1000;
    const int count = 1 + static_cast<int>(rng() % 4);
    std::vector<int> used;
    for (int k = 0; k < count && remaining > 0; ++k) {
      int r = pick_region(rng);
      if (std::find(used.begin(), used.end(), r) != used.end()) continue;
      used.push_back(r);
      int t = std::min(remaining, tenths(rng));
      remaining -= t;
      ad.regional_distribution.push_back({regions[r].cc, regions[r].name, t / 10.0});
    }
    ad.demographic_distribution.push_back({"25-34", domain::Gender::Female, 50.0});
    ad.demographic_distribution.push_back({"25-34", domain::Gender::Male, 50.0});
    out.push_back(std::move(ad));
  }
  return out;
}

domain::JobSpec spec_for(const std::string& term, domain::Visibility v) {
  domain::JobSpec s;
  s.search_term = term;
  s.reached_countries = {"CA", "US", "GB", "BR"};
  s.active_status = domain::ActiveStatus::All;
  s.platforms = {domain::Platform::Facebook};
  s.visibility = v;
  return s;
}

}  // namespace testing
