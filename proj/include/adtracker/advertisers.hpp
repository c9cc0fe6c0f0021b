#pragma once

// Advertiser ranking by page and cached page profile images.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "adtracker/clock.hpp"
#include "adtracker/provider.hpp"
#include "adtracker/store.hpp"

namespace adtracker::advertisers {

struct ProfileImage {
  std::string page_id;
  std::string content_type;
  std::string bytes;
  domain::Timestamp fetched_at{};
};

struct Download {
  std::string content_type;
  std::string bytes;
};

class GraphProvider {
 public:
  virtual ~GraphProvider() = default;
  // Throws GraphLookupFailed when no picture URL can be had.
  virtual std::string picture_url(const std::string& page_id) = 0;
  // Throws DownloadFailed on transport problems or non-200 answers.
  virtual Download download(const std::string& url) = 0;
};

// Serves fixed images from memory; call counters let tests observe caching.
class SimulatedGraphProvider final : public GraphProvider {
 public:
  // Every page maps to the fixture PNG unless overridden or removed.
  SimulatedGraphProvider();

  std::string picture_url(const std::string& page_id) override;
  Download download(const std::string& url) override;

  void set_image(const std::string& page_id, Download image);
  void remove_page(const std::string& page_id);
  // The next n downloads fail with DownloadFailed.
  void fail_next_downloads(int n);

  [[nodiscard]] int lookups() const noexcept { return lookups_.load(); }
  [[nodiscard]] int downloads() const noexcept { return downloads_.load(); }

  // A valid 1x1 PNG.
  static const std::string& fixture_png();

 private:
  std::mutex mutex_;
  std::map<std::string, Download> overrides_;
  std::map<std::string, bool> removed_;
  int failures_pending_ = 0;
  std::atomic<int> lookups_{0};
  std::atomic<int> downloads_{0};
};

// GET <base>/<page_id>/picture?redirect=0 answering {"data":{"url":...}},
// then a plain GET of that URL.
class LiveGraphProvider final : public GraphProvider {
 public:
  LiveGraphProvider(std::string base_url, std::string access_token);

  std::string picture_url(const std::string& page_id) override;
  Download download(const std::string& url) override;

 private:
  provider::UrlParts base_;
  std::string access_token_;
};

struct ImageCacheConfig {
  std::chrono::seconds ttl{std::chrono::hours{24 * 7}};
  int download_retries = 3;
  provider::BackoffPolicy backoff;
};

// Files: <dir>/<page_id>.bin and <dir>/<page_id>.meta (JSON content_type,
// fetched_at). At most one fetch per page is in flight; distinct pages
// proceed in parallel.
class ImageCache {
 public:
  ImageCache(std::filesystem::path dir, GraphProvider& graph, Clock& clock, ImageCacheConfig config = {});

  // Cached copy when younger than the TTL, otherwise fetched and stored.
  // Throws BadRequest (unusable page_id), GraphLookupFailed, DownloadFailed,
  // NotAnImage.
  ProfileImage fetch(const std::string& page_id);
  // Disk copy regardless of age.
  [[nodiscard]] std::optional<ProfileImage> stored(const std::string& page_id) const;
  [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::shared_ptr<std::mutex> page_lock(const std::string& page_id);
  Download download_with_retry(const std::string& url);

  std::filesystem::path dir_;
  GraphProvider& graph_;
  Clock& clock_;
  ImageCacheConfig config_;
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_{0x5eed};
};

struct AdvertiserEntry {
  std::string page_id;
  std::string page_name;
  std::size_t ad_count = 0;
  // Sum of impression range midpoints; ads without impressions add nothing.
  double total_weighted_impressions = 0.0;
  // Page id whose image is in the cache; empty means placeholder.
  std::optional<std::string> profile_image_ref;

  friend bool operator==(const AdvertiserEntry&, const AdvertiserEntry&) = default;
};

// Groups by page_id; page_name comes from the most recently created ad of
// the page. Ordered by ad_count desc, then page_id asc.
std::vector<AdvertiserEntry> build_advertiser_report(const std::vector<domain::AdRecord>& ads);

// Image failures never fail the report; the entry keeps a placeholder.
std::vector<AdvertiserEntry> advertiser_report(store::Store& store, const store::AdQuery& q,
                                               ImageCache* images = nullptr);

// Page ids safe to use as file names: [A-Za-z0-9_-]{1,64}.
bool is_safe_page_id(const std::string& page_id);

}  // namespace adtracker::advertisers
