#include "adtracker/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "adtracker/error.hpp"

namespace adtracker::config {

namespace {

using json = nlohmann::json;

constexpr std::string_view kKeys[] = {
    "data_dir",       "listen_addr",     "provider",      "base_url",
    "access_token",   "max_requests_per_minute",          "page_size",
    "retry_limit",    "graph_base_url",  "sim_seed",      "sim_ads",
    "sim_fixture",    "poll_interval_s", "worker_count",  "max_pages_per_cycle",
    "max_rate_limit_waits",              "gazetteer_path", "threshold_km",
    "image_ttl_s",    "ui_dir",
};

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* why) {
  throw Error(ErrorCode::BadRequest, "config " + key + "='" + value + "': " + why);
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad(key, value, "not a number");
  return v;
}

int positive_int(const std::string& key, const std::string& value) {
  auto v = number<int>(key, value);
  if (v < 1) bad(key, value, "must be at least 1");
  return v;
}

void apply(Config& c, const std::string& key, const std::string& value) {
  if (key == "data_dir") {
    c.data_dir = value;
  } else if (key == "listen_addr") {
    split_listen_addr(value);
    c.listen_addr = value;
  } else if (key == "provider") {
    if (value == "simulated") {
      c.provider = ProviderMode::Simulated;
    } else if (value == "live") {
      c.provider = ProviderMode::Live;
    } else {
      bad(key, value, "expected live or simulated");
    }
  } else if (key == "base_url") {
    c.live.base_url = value;
  } else if (key == "access_token") {
    c.live.access_token = value;
  } else if (key == "max_requests_per_minute") {
    c.live.max_requests_per_minute = positive_int(key, value);
  } else if (key == "page_size") {
    c.live.page_size = positive_int(key, value);
  } else if (key == "retry_limit") {
    c.live.retry_limit = number<int>(key, value);
    if (c.live.retry_limit < 0) bad(key, value, "must be non-negative");
  } else if (key == "graph_base_url") {
    c.graph_base_url = value;
  } else if (key == "sim_seed") {
    c.sim_seed = number<std::uint64_t>(key, value);
  } else if (key == "sim_ads") {
    c.sim_ads = number<std::size_t>(key, value);
  } else if (key == "sim_fixture") {
    c.sim_fixture = value;
  } else if (key == "poll_interval_s") {
    c.jobs.poll_interval = std::chrono::seconds{positive_int(key, value)};
  } else if (key == "worker_count") {
    c.jobs.worker_count = positive_int(key, value);
  } else if (key == "max_pages_per_cycle") {
    c.jobs.max_pages_per_cycle = positive_int(key, value);
  } else if (key == "max_rate_limit_waits") {
    c.jobs.max_rate_limit_waits = number<int>(key, value);
    if (c.jobs.max_rate_limit_waits < 0) bad(key, value, "must be non-negative");
  } else if (key == "gazetteer_path") {
    c.gazetteer_path = value;
  } else if (key == "threshold_km") {
    c.threshold_km = number<double>(key, value);
    if (!(c.threshold_km >= 0.0)) bad(key, value, "must be non-negative");
  } else if (key == "image_ttl_s") {
    c.image_ttl = std::chrono::seconds{positive_int(key, value)};
  } else if (key == "ui_dir") {
    c.ui_dir = value;
  } else {
    throw Error(ErrorCode::BadRequest, "unknown config key '" + key + "'");
  }
}

std::string env_name(std::string_view key) {
  std::string out = "ADTRACKER_";
  for (char ch : key) out.push_back(ch >= 'a' && ch <= 'z' ? static_cast<char>(ch - 'a' + 'A') : ch);
  return out;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::pair<std::string, int> split_listen_addr(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0) bad("listen_addr", addr, "expected host:port");
  int port = number<int>("listen_addr", addr.substr(colon + 1));
  if (port < 0 || port > 65535) bad("listen_addr", addr, "port out of range");
  return {addr.substr(0, colon), port};
}

Config load(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  Config c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::BadRequest, "cannot read config file " + file->string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::BadRequest, "config file must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      apply(c, key, value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  for (auto key : kKeys) {
    if (auto v = env(env_name(key))) apply(c, std::string(key), *v);
  }
  return c;
}

}  // namespace adtracker::config
