#pragma once

// HTTP/JSON boundary under /api/v1.

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "adtracker/accounts.hpp"
#include "adtracker/advertisers.hpp"
#include "adtracker/error.hpp"
#include "adtracker/geo.hpp"
#include "adtracker/jobs.hpp"
#include "adtracker/store.hpp"

namespace adtracker::api {

using nlohmann::json;

inline constexpr std::string_view kPrefix = "/api/v1";

struct ApiError {
  std::string code;
  std::string message;
  int http_status = 500;
};

int http_status(ErrorCode code) noexcept;
ApiError to_api_error(const Error& e);

// Weighted values are rounded to 4 decimals.
json serialize_report(const geo::RegionalReport& r);
geo::RegionalReport deserialize_report(const json& j);

json serialize_advertisers(const std::vector<advertisers::AdvertiserEntry>& entries);
json job_to_json(const store::Job& job);
// Never includes the password hash.
json account_to_json(const store::Account& account);

struct Services {
  store::Store& store;
  accounts::AccountService& accounts;
  jobs::JobManager& jobs;
  const geo::Gazetteer& gazetteer;
  advertisers::ImageCache* images = nullptr;
};

struct ServerOptions {
  double default_threshold_km = geo::kDefaultThresholdKm;
  // Static files mounted at / when set.
  std::optional<std::filesystem::path> ui_dir;
  // JSON request log lines; nullptr disables them.
  std::ostream* request_log = nullptr;
};

class Server {
 public:
  Server(Services services, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws BadRequest when
  // binding fails.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  void listen();
  // listen() on a background thread; returns once the server accepts.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace adtracker::api
