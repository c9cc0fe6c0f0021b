#pragma once

// Service configuration: a JSON file overlaid by ADTRACKER_* environment
// variables (environment wins).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "adtracker/jobs.hpp"
#include "adtracker/provider.hpp"

namespace adtracker::config {

enum class ProviderMode { Simulated, Live };

struct Config {
  std::filesystem::path data_dir = "adtracker-data";
  std::string listen_addr = "127.0.0.1:8080";
  ProviderMode provider = ProviderMode::Simulated;
  provider::ProviderConfig live;
  std::string graph_base_url = "https://graph.facebook.com/v19.0";
  // Simulated archive contents.
  std::uint64_t sim_seed = 7;
  std::size_t sim_ads = 500;
  // JSON Lines fixture replacing the generated one.
  std::optional<std::filesystem::path> sim_fixture;
  jobs::JobsConfig jobs;
  std::optional<std::filesystem::path> gazetteer_path;
  double threshold_km = 100.0;
  std::chrono::seconds image_ttl{std::chrono::hours{24 * 7}};
  std::optional<std::filesystem::path> ui_dir;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Process environment.
std::optional<std::string> process_env(const std::string& name);

// Keys: data_dir, listen_addr, provider (live|simulated), base_url,
// access_token, max_requests_per_minute, page_size, retry_limit,
// graph_base_url, sim_seed, sim_ads, sim_fixture, poll_interval_s, worker_count,
// max_pages_per_cycle, max_rate_limit_waits, gazetteer_path, threshold_km,
// image_ttl_s, ui_dir. The environment form is ADTRACKER_<KEY upper-cased>.
// Throws Error(BadRequest) on unknown keys or bad values.
Config load(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

// "host:port" with a numeric port.
std::pair<std::string, int> split_listen_addr(const std::string& addr);

}  // namespace adtracker::config
