#pragma once

// Access to an Ads-Library-style archive. Two implementations share one
// contract: a live HTTP client and a deterministic in-memory fixture.

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adtracker/clock.hpp"
#include "adtracker/domain.hpp"

namespace adtracker::provider {

struct PageCursor {
  std::string token;

  friend bool operator==(const PageCursor&, const PageCursor&) = default;
};

struct ProviderConfig {
  std::string base_url;
  std::string access_token;
  int max_requests_per_minute = 200;
  int page_size = 25;
  int retry_limit = 3;
};

// Throws Error(BadRequest) when a field is out of its allowed range.
void validate(const ProviderConfig& config);

struct Page {
  std::vector<domain::AdRecord> ads;
  std::optional<PageCursor> next;
  // Records dropped because they failed to decode or validate.
  std::size_t malformed = 0;
  std::vector<std::string> problems;
};

class AdProvider {
 public:
  virtual ~AdProvider() = default;

  // Throws RateLimitedError, or Error with AuthFailed / Transport /
  // MalformedPayload / UpstreamRejected.
  virtual Page fetch_page(const domain::JobSpec& spec, const std::optional<PageCursor>& cursor) = 0;
};

// Search semantics of the simulated archive: case-insensitive substring of
// the search term in body, link fields or page name; at least one regional
// share in a reached country; ACTIVE means no delivery_stop.
bool matches_spec(const domain::AdRecord& ad, const domain::JobSpec& spec);

class SimulatedProvider final : public AdProvider {
 public:
  SimulatedProvider(std::vector<domain::AdRecord> fixture, int page_size,
                    std::size_t rejected_at_load = 0);

  // JSON Lines fixture, one AdRecord per line.
  static SimulatedProvider from_jsonl(const std::filesystem::path& path, int page_size);

  Page fetch_page(const domain::JobSpec& spec, const std::optional<PageCursor>& cursor) override;

  [[nodiscard]] const std::vector<domain::AdRecord>& fixture() const noexcept { return fixture_; }
  [[nodiscard]] int page_size() const noexcept { return page_size_; }

 private:
  std::vector<domain::AdRecord> fixture_;
  int page_size_;
  std::size_t rejected_at_load_;
};

struct SimulatedRegion {
  std::string country_code;
  std::string region_name;
};

// Regions the generator draws from; the bundled gazetteer covers all of them.
const std::vector<SimulatedRegion>& simulated_regions();
// Countries that appear in generated regional distributions.
std::vector<std::string> simulated_countries();

// n_ads records derived from seed. Record i depends only on (seed, i), so
// a larger n extends a smaller fixture with the same prefix.
std::vector<domain::AdRecord> generate_ads(std::uint64_t seed, std::size_t n_ads);
std::shared_ptr<SimulatedProvider> seed_simulated(std::uint64_t seed, std::size_t n_ads,
                                                  int page_size = 25);

// A spec every generated record satisfies.
domain::JobSpec match_all_spec();

// Rolling 60-second window: a permit granted at p counts against the window
// while now - p < 60 s.
class RateLimiter {
 public:
  struct Permit {
    Instant granted_at;
  };

  RateLimiter(int max_requests_per_minute, Clock& clock);

  // Blocks on the clock until granting keeps the window within capacity.
  Permit acquire_permit();

  [[nodiscard]] int capacity() const noexcept { return capacity_; }

  static constexpr std::chrono::milliseconds kWindow{60'000};

 private:
  int capacity_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<Instant> granted_;
};

struct BackoffPolicy {
  std::chrono::milliseconds base{1'000};
  double factor = 2.0;
  std::chrono::milliseconds cap{60'000};
};

// Equal jitter: half the capped exponential delay plus a uniform draw over
// the other half.
std::chrono::milliseconds backoff_delay(const BackoffPolicy& policy, int attempt, std::mt19937_64& rng);

// Decodes one archive API object (snake_case archive field names). Region
// entries without a country take the spec's only reached country.
// Throws Error(MalformedPayload).
domain::AdRecord decode_archive_ad(const nlohmann::json& j, const domain::JobSpec& spec);

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash, may be empty
};
UrlParts split_url(const std::string& url);

class LiveProvider final : public AdProvider {
 public:
  LiveProvider(ProviderConfig config, std::shared_ptr<RateLimiter> limiter, Clock& clock,
               std::uint64_t jitter_seed = std::random_device{}());

  Page fetch_page(const domain::JobSpec& spec, const std::optional<PageCursor>& cursor) override;

  void set_backoff(BackoffPolicy policy) { backoff_ = policy; }

 private:
  ProviderConfig config_;
  UrlParts url_;
  std::shared_ptr<RateLimiter> limiter_;
  Clock& clock_;
  BackoffPolicy backoff_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

}  // namespace adtracker::provider
