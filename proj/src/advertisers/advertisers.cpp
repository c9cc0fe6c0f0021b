#include "adtracker/advertisers.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "adtracker/log.hpp"

namespace adtracker::advertisers {

namespace {

using json = nlohmann::json;

constexpr std::string_view kSimScheme = "sim://image/";

bool is_image_type(const std::string& content_type) {
  std::string t = domain::ascii_lower(content_type);
  auto semi = t.find(';');
  if (semi != std::string::npos) t.resize(semi);
  while (!t.empty() && t.back() == ' ') t.pop_back();
  return t.rfind("image/", 0) == 0 && t.size() > 6;
}

std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomically(const std::filesystem::path& p, const std::string& data) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

bool is_safe_page_id(const std::string& page_id) {
  if (page_id.empty() || page_id.size() > 64) return false;
  return std::all_of(page_id.begin(), page_id.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '-';
  });
}

// --- simulated graph ---

const std::string& SimulatedGraphProvider::fixture_png() {
  static const std::string png = [] {
    const unsigned char bytes[] = {
        0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48, 0x44, 0x52,
        0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1F, 0x15, 0xC4,
        0x89, 0x00, 0x00, 0x00, 0x0A, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x00, 0x01, 0x00, 0x00,
        0x05, 0x00, 0x01, 0x0D, 0x0A, 0x2D, 0xB4, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE,
        0x42, 0x60, 0x82};
    return std::string(reinterpret_cast<const char*>(bytes), sizeof bytes);
  }();
  return png;
}

SimulatedGraphProvider::SimulatedGraphProvider() = default;

std::string SimulatedGraphProvider::picture_url(const std::string& page_id) {
  ++lookups_;
  std::lock_guard lock(mutex_);
  if (removed_.contains(page_id)) throw Error(ErrorCode::GraphLookupFailed, "page " + page_id + " has no picture");
  return std::string(kSimScheme) + page_id;
}

Download SimulatedGraphProvider::download(const std::string& url) {
  ++downloads_;
  std::lock_guard lock(mutex_);
  if (failures_pending_ > 0) {
    --failures_pending_;
    throw Error(ErrorCode::DownloadFailed, "simulated download failure");
  }
  if (url.rfind(kSimScheme, 0) != 0) throw Error(ErrorCode::DownloadFailed, "unknown image url " + url);
  const std::string page_id = url.substr(kSimScheme.size());
  if (auto it = overrides_.find(page_id); it != overrides_.end()) return it->second;
  return {"image/png", fixture_png()};
}

void SimulatedGraphProvider::set_image(const std::string& page_id, Download image) {
  std::lock_guard lock(mutex_);
  removed_.erase(page_id);
  overrides_[page_id] = std::move(image);
}

void SimulatedGraphProvider::remove_page(const std::string& page_id) {
  std::lock_guard lock(mutex_);
  removed_[page_id] = true;
}

void SimulatedGraphProvider::fail_next_downloads(int n) {
  std::lock_guard lock(mutex_);
  failures_pending_ = n;
}

// --- live graph ---

LiveGraphProvider::LiveGraphProvider(std::string base_url, std::string access_token)
    : base_(provider::split_url(base_url)), access_token_(std::move(access_token)) {}

std::string LiveGraphProvider::picture_url(const std::string& page_id) {
  if (!is_safe_page_id(page_id)) throw Error(ErrorCode::GraphLookupFailed, "unusable page id");
  httplib::Client client(base_.origin);
  client.set_connection_timeout(std::chrono::seconds{10});
  client.set_read_timeout(std::chrono::seconds{30});
  httplib::Headers headers{{"Authorization", "Bearer " + access_token_}, {"Accept", "application/json"}};
  auto res = client.Get(base_.path + "/" + page_id + "/picture", httplib::Params{{"redirect", "0"}, {"type", "large"}},
                        headers);
  if (!res) throw Error(ErrorCode::GraphLookupFailed, "graph transport error: " + httplib::to_string(res.error()));
  if (res->status >= 300 && res->status < 400 && res->has_header("Location")) {
    return res->get_header_value("Location");
  }
  if (res->status != 200) {
    throw Error(ErrorCode::GraphLookupFailed, "graph returned HTTP " + std::to_string(res->status));
  }
  json body = json::parse(res->body, nullptr, false);
  if (body.is_object() && body.contains("data") && body["data"].is_object()) {
    const auto& data = body["data"];
    if (data.contains("url") && data["url"].is_string() && !data["url"].get<std::string>().empty()) {
      return data["url"].get<std::string>();
    }
  }
  throw Error(ErrorCode::GraphLookupFailed, "graph answer carries no picture url");
}

Download LiveGraphProvider::download(const std::string& url) {
  provider::UrlParts parts;
  try {
    parts = provider::split_url(url);
  } catch (const Error& e) {
    throw Error(ErrorCode::DownloadFailed, e.what());
  }
  httplib::Client client(parts.origin);
  client.set_follow_location(true);
  client.set_connection_timeout(std::chrono::seconds{10});
  client.set_read_timeout(std::chrono::seconds{30});
  auto res = client.Get(parts.path.empty() ? "/" : parts.path);
  if (!res) throw Error(ErrorCode::DownloadFailed, "image transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error(ErrorCode::DownloadFailed, "image GET returned HTTP " + std::to_string(res->status));
  return {res->get_header_value("Content-Type"), std::move(res->body)};
}

// --- cache ---

ImageCache::ImageCache(std::filesystem::path dir, GraphProvider& graph, Clock& clock, ImageCacheConfig config)
    : dir_(std::move(dir)), graph_(graph), clock_(clock), config_(config) {
  std::filesystem::create_directories(dir_);
}

std::shared_ptr<std::mutex> ImageCache::page_lock(const std::string& page_id) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = locks_[page_id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

std::optional<ProfileImage> ImageCache::stored(const std::string& page_id) const {
  if (!is_safe_page_id(page_id)) return std::nullopt;
  auto meta_text = read_file(dir_ / (page_id + ".meta"));
  auto bytes = read_file(dir_ / (page_id + ".bin"));
  if (!meta_text || !bytes || bytes->empty()) return std::nullopt;
  json meta = json::parse(*meta_text, nullptr, false);
  if (!meta.is_object() || !meta.contains("content_type") || !meta.contains("fetched_at")) return std::nullopt;
  auto fetched = domain::try_parse_rfc3339(meta["fetched_at"].get<std::string>());
  if (!fetched) return std::nullopt;
  return ProfileImage{page_id, meta["content_type"].get<std::string>(), std::move(*bytes), *fetched};
}

Download ImageCache::download_with_retry(const std::string& url) {
  for (int attempt = 0;; ++attempt) {
    try {
      return graph_.download(url);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DownloadFailed || attempt >= config_.download_retries) throw;
      std::chrono::milliseconds delay;
      {
        std::lock_guard lock(rng_mutex_);
        delay = provider::backoff_delay(config_.backoff, attempt, rng_);
      }
      clock_.sleep_for(delay);
    }
  }
}

ProfileImage ImageCache::fetch(const std::string& page_id) {
  if (!is_safe_page_id(page_id)) throw Error(ErrorCode::BadRequest, "unusable page id");
  auto guard = page_lock(page_id);
  std::lock_guard lock(*guard);

  const auto now = store::to_timestamp(clock_.now());
  if (auto cached = stored(page_id); cached && now - cached->fetched_at < config_.ttl) return *cached;

  const std::string url = graph_.picture_url(page_id);
  Download d = download_with_retry(url);
  if (!is_image_type(d.content_type)) {
    throw Error(ErrorCode::NotAnImage, "page " + page_id + " picture has content type '" + d.content_type + "'");
  }
  if (d.bytes.empty()) throw Error(ErrorCode::DownloadFailed, "empty image body for page " + page_id);

  ProfileImage img{page_id, d.content_type, std::move(d.bytes), now};
  write_atomically(dir_ / (page_id + ".bin"), img.bytes);
  write_atomically(dir_ / (page_id + ".meta"),
                   json{{"content_type", img.content_type}, {"fetched_at", domain::format_rfc3339(now)}}.dump());
  log::event("profile_image_stored", {{"page_id", page_id}, {"bytes", img.bytes.size()}});
  return img;
}

// --- ranking ---

std::vector<AdvertiserEntry> build_advertiser_report(const std::vector<domain::AdRecord>& ads) {
  struct Acc {
    AdvertiserEntry entry;
    const domain::AdRecord* newest = nullptr;
  };
  std::unordered_map<std::string, Acc> groups;
  for (const auto& ad : ads) {
    auto& acc = groups[ad.page_id];
    acc.entry.page_id = ad.page_id;
    ++acc.entry.ad_count;
    if (ad.impressions) acc.entry.total_weighted_impressions += domain::range_midpoint(*ad.impressions);
    if (!acc.newest || std::tie(ad.creation_time, ad.ad_id) > std::tie(acc.newest->creation_time, acc.newest->ad_id)) {
      acc.newest = &ad;
    }
  }
  std::vector<AdvertiserEntry> out;
  out.reserve(groups.size());
  for (auto& [id, acc] : groups) {
    acc.entry.page_name = acc.newest->page_name;
    out.push_back(std::move(acc.entry));
  }
  std::sort(out.begin(), out.end(), [](const AdvertiserEntry& a, const AdvertiserEntry& b) {
    if (a.ad_count != b.ad_count) return a.ad_count > b.ad_count;
    return a.page_id < b.page_id;
  });
  return out;
}

std::vector<AdvertiserEntry> advertiser_report(store::Store& store, const store::AdQuery& q, ImageCache* images) {
  auto report = build_advertiser_report(store.query_ads(q));
  if (!images) return report;
  for (auto& entry : report) {
    try {
      images->fetch(entry.page_id);
      entry.profile_image_ref = entry.page_id;
    } catch (const Error& e) {
      log::event("profile_image_unavailable",
                 {{"page_id", entry.page_id}, {"code", to_string(e.code())}, {"error", e.what()}});
    }
  }
  return report;
}

}  // namespace adtracker::advertisers
