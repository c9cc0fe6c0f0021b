#include <httplib.h>

#include <algorithm>
#include <cmath>

#include "adtracker/codec.hpp"
#include "adtracker/provider.hpp"

namespace adtracker::provider {

using namespace adtracker::domain;
using nlohmann::json;

namespace {

constexpr const char* kArchiveFields =
    "id,page_id,page_name,ad_creation_time,ad_creative_bodies,ad_creative_link_captions,"
    "ad_creative_link_descriptions,ad_creative_link_titles,ad_snapshot_url,spend,currency,"
    "bylines,ad_delivery_start_time,ad_delivery_stop_time,impressions,estimated_audience_size,"
    "delivery_by_region,demographic_distribution";

// Graph API error codes that signal throttling.
constexpr std::array<int, 5> kThrottleCodes = {4, 17, 32, 613, 80000};
constexpr int kInvalidTokenCode = 190;

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::MalformedPayload, why); }

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string as_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  bad("expected a string or integer");
}

// Plural creative fields are arrays; the first element is the displayed one.
std::optional<std::string> creative_text(const json& j, const char* plural, const char* singular) {
  if (const json* v = find(j, plural)) {
    if (v->is_array()) {
      if (v->empty()) return std::nullopt;
      return as_text(v->front());
    }
    return as_text(*v);
  }
  if (const json* v = find(j, singular)) return as_text(*v);
  return std::nullopt;
}

std::optional<Timestamp> archive_time(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) return std::nullopt;
  auto t = try_parse_rfc3339(as_text(*v));
  if (!t) bad(std::string("bad timestamp in ") + key);
  return t;
}

std::uint64_t bound(const json& v) {
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    return v.get<std::uint64_t>();
  }
  if (v.is_string()) {
    auto r = parse_insight_range(v.get<std::string>());
    if (r.lower != r.upper) bad("range bound is itself a range");
    return r.lower;
  }
  bad("range bound is not a count");
}

std::optional<InsightRange> archive_range(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) return std::nullopt;
  try {
    if (v->is_string()) return parse_insight_range(v->get<std::string>());
    if (!v->is_object()) bad(std::string("range is not an object: ") + key);
    const json* lo = find(*v, "lower_bound");
    const json* hi = find(*v, "upper_bound");
    if (!lo && !hi) bad(std::string("range without bounds: ") + key);
    InsightRange r{lo ? bound(*lo) : 0, hi ? bound(*hi) : kSentinelUpper};
    return r;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedPayload) throw;
    bad(e.what());
  }
}

double fraction_to_percent(const json& v) {
  double f = 0.0;
  if (v.is_number()) {
    f = v.get<double>();
  } else if (v.is_string()) {
    try {
      std::size_t used = 0;
      f = std::stod(v.get<std::string>(), &used);
    } catch (const std::exception&) {
      bad("percentage is not numeric");
    }
  } else {
    bad("percentage is not numeric");
  }
  if (!std::isfinite(f)) bad("percentage is not finite");
  return f * 100.0;
}

std::string encode_list(const std::vector<std::string>& items) {
  json arr = items;
  return arr.dump();
}

}  // namespace

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::BadRequest, "base_url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_start == std::string::npos) {
    parts.origin = url;
  } else {
    parts.origin = url.substr(0, path_start);
    parts.path = url.substr(path_start);
    while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
  }
  return parts;
}

AdRecord decode_archive_ad(const json& j, const JobSpec& spec) {
  if (!j.is_object()) bad("archive record is not an object");
  AdRecord ad;
  const json* id = find(j, "id");
  const json* page_id = find(j, "page_id");
  if (!id || !page_id) bad("archive record without id or page_id");
  ad.ad_id = as_text(*id);
  ad.page_id = as_text(*page_id);
  if (const json* v = find(j, "page_name")) ad.page_name = as_text(*v);
  auto created = archive_time(j, "ad_creation_time");
  if (!created) bad("archive record without ad_creation_time");
  ad.creation_time = *created;
  ad.body = creative_text(j, "ad_creative_bodies", "ad_creative_body").value_or("");
  ad.link_caption = creative_text(j, "ad_creative_link_captions", "ad_creative_link_caption");
  ad.link_description =
      creative_text(j, "ad_creative_link_descriptions", "ad_creative_link_description");
  ad.link_title = creative_text(j, "ad_creative_link_titles", "ad_creative_link_title");
  if (const json* v = find(j, "ad_snapshot_url")) ad.snapshot_url = as_text(*v);
  ad.spend = archive_range(j, "spend");
  if (const json* v = find(j, "currency")) ad.currency = as_text(*v);
  if (const json* v = find(j, "bylines")) {
    ad.funded_entity = as_text(*v);
  } else if (const json* f = find(j, "funding_entity")) {
    ad.funded_entity = as_text(*f);
  }
  ad.delivery_start = archive_time(j, "ad_delivery_start_time");
  ad.delivery_stop = archive_time(j, "ad_delivery_stop_time");
  ad.impressions = archive_range(j, "impressions");
  ad.potential_reach = archive_range(j, "estimated_audience_size");
  if (!ad.potential_reach) ad.potential_reach = archive_range(j, "potential_reach");

  const json* regions = find(j, "delivery_by_region");
  if (!regions) regions = find(j, "region_distribution");
  if (regions) {
    if (!regions->is_array()) bad("region distribution is not an array");
    for (const auto& e : *regions) {
      if (!e.is_object()) bad("region entry is not an object");
      const json* name = find(e, "region");
      const json* pct = find(e, "percentage");
      if (!name || !pct) bad("region entry without region or percentage");
      std::optional<std::string> country;
      const json* c = find(e, "country");
      if (!c) c = find(e, "country_code");
      if (c) {
        country = resolve_country(as_text(*c));
        if (!country) bad("unresolved country label " + as_text(*c));
      } else if (spec.reached_countries.size() == 1) {
        country = spec.reached_countries.front();
      } else {
        bad("region entry without country for a multi-country search");
      }
      ad.regional_distribution.push_back({*country, as_text(*name), fraction_to_percent(*pct)});
    }
  }

  if (const json* demo = find(j, "demographic_distribution")) {
    if (!demo->is_array()) bad("demographic distribution is not an array");
    for (const auto& e : *demo) {
      if (!e.is_object()) bad("demographic entry is not an object");
      const json* age = find(e, "age");
      const json* gender = find(e, "gender");
      const json* pct = find(e, "percentage");
      if (!age || !gender || !pct) bad("incomplete demographic entry");
      auto g = parse_gender(as_text(*gender));
      if (!g) bad("unknown gender " + as_text(*gender));
      ad.demographic_distribution.push_back({as_text(*age), *g, fraction_to_percent(*pct)});
    }
  }
  return ad;
}

LiveProvider::LiveProvider(ProviderConfig config, std::shared_ptr<RateLimiter> limiter, Clock& clock,
                           std::uint64_t jitter_seed)
    : config_(std::move(config)),
      url_(split_url(config_.base_url)),
      limiter_(std::move(limiter)),
      clock_(clock),
      rng_(jitter_seed) {
  validate(config_);
  if (!limiter_) limiter_ = std::make_shared<RateLimiter>(config_.max_requests_per_minute, clock_);
}

Page LiveProvider::fetch_page(const JobSpec& spec, const std::optional<PageCursor>& cursor) {
  std::vector<std::string> platforms;
  for (auto p : spec.platforms) platforms.emplace_back(to_string(p));

  httplib::Params params{
      {"search_terms", spec.search_term},
      {"ad_reached_countries", encode_list(spec.reached_countries)},
      {"ad_active_status", std::string(to_string(spec.active_status))},
      {"ad_type", "POLITICAL_AND_ISSUE_ADS"},
      {"publisher_platforms", encode_list(platforms)},
      {"limit", std::to_string(config_.page_size)},
      {"fields", kArchiveFields},
  };
  if (cursor) params.emplace("after", cursor->token);
  httplib::Headers headers{{"Authorization", "Bearer " + config_.access_token},
                           {"Accept", "application/json"}};
  const std::string path = url_.path + "/ads_archive";

  std::string last_failure;
  for (int attempt = 0;; ++attempt) {
    limiter_->acquire_permit();
    httplib::Client client(url_.origin);
    client.set_connection_timeout(std::chrono::seconds{10});
    client.set_read_timeout(std::chrono::seconds{30});
    auto res = client.Get(path, params, headers);

    bool retryable = false;
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      retryable = true;
    } else if (res->status >= 500) {
      last_failure = "archive returned HTTP " + std::to_string(res->status);
      retryable = true;
    }
    if (retryable) {
      if (attempt >= config_.retry_limit) throw Error(ErrorCode::Transport, last_failure);
      std::chrono::milliseconds delay;
      {
        std::lock_guard lock(rng_mutex_);
        delay = backoff_delay(backoff_, attempt, rng_);
      }
      clock_.sleep_for(delay);
      continue;
    }

    json body = json::parse(res->body, nullptr, false);
    if (res->status == 429) {
      std::chrono::milliseconds wait{60'000};
      if (res->has_header("Retry-After")) {
        try {
          wait = std::chrono::seconds{std::stoll(res->get_header_value("Retry-After"))};
        } catch (const std::exception&) {
        }
      }
      throw RateLimitedError("archive rate limit reached", wait);
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::AuthFailed, "archive rejected credentials (HTTP " +
                                             std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      int code = 0;
      std::string message = "HTTP " + std::to_string(res->status);
      if (body.is_object() && body.contains("error") && body["error"].is_object()) {
        code = body["error"].value("code", 0);
        message = body["error"].value("message", message);
      }
      if (std::find(kThrottleCodes.begin(), kThrottleCodes.end(), code) != kThrottleCodes.end()) {
        throw RateLimitedError("archive throttled: " + message, std::chrono::seconds{60});
      }
      if (code == kInvalidTokenCode) throw Error(ErrorCode::AuthFailed, message);
      throw Error(ErrorCode::UpstreamRejected, "archive rejected request: " + message);
    }

    if (body.is_discarded() || !body.is_object() || !body.contains("data") || !body["data"].is_array()) {
      throw Error(ErrorCode::MalformedPayload, "archive page is not a data envelope");
    }
    Page page;
    for (const auto& item : body["data"]) {
      try {
        auto ad = decode_archive_ad(item, spec);
        auto problems = validate_ad(ad);
        if (problems.empty()) {
          page.ads.push_back(std::move(ad));
          continue;
        }
        page.problems.push_back(ad.ad_id + ": " + problems.front());
      } catch (const Error& e) {
        page.problems.emplace_back(e.what());
      } catch (const json::exception& e) {
        page.problems.emplace_back(e.what());
      }
      ++page.malformed;
    }
    if (const json* paging = find(body, "paging"); paging && paging->is_object()) {
      const json* next = find(*paging, "next");
      const json* cursors = find(*paging, "cursors");
      const json* after = cursors && cursors->is_object() ? find(*cursors, "after") : nullptr;
      if (next && after && after->is_string() && !after->get<std::string>().empty()) {
        page.next = PageCursor{after->get<std::string>()};
      }
    }
    return page;
  }
}

}  // namespace adtracker::provider
