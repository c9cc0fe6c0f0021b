#include "adtracker/api.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "adtracker/codec.hpp"

namespace adtracker::api {

namespace {

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

json key_json(const geo::RegionKey& k) { return {{"country_code", k.country_code}, {"region_name", k.region_name}}; }

geo::RegionKey key_from(const json& j) {
  return {j.at("country_code").get<std::string>(), j.at("region_name").get<std::string>()};
}

json entry_json(const geo::LocationEntry& e) {
  return {{"country_code", e.key.country_code},
          {"region_name", e.key.region_name},
          {"raw_count", e.raw_count},
          {"weighted_reach", round4(e.weighted_reach)}};
}

geo::LocationEntry entry_from(const json& j) {
  return {key_from(j), j.at("raw_count").get<std::size_t>(), j.at("weighted_reach").get<double>()};
}

std::optional<json> opt_time(const std::optional<domain::Timestamp>& t) {
  if (!t) return std::nullopt;
  return domain::format_rfc3339(*t);
}

json or_null(const std::optional<json>& j) { return j ? *j : json(nullptr); }

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRange:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidWindow:
    case ErrorCode::BadRequest:
    case ErrorCode::WeakPassword:
      return 400;
    case ErrorCode::Unauthenticated:
      return 401;
    case ErrorCode::Unauthorized:
      return 403;
    case ErrorCode::UnknownJob:
    case ErrorCode::UnknownAccount:
    case ErrorCode::NotFound:
    case ErrorCode::GraphLookupFailed:
      return 404;
    case ErrorCode::EmailTaken:
    case ErrorCode::InvalidState:
      return 409;
    case ErrorCode::RateLimited:
      return 429;
    case ErrorCode::AuthFailed:
    case ErrorCode::MalformedPayload:
    case ErrorCode::Transport:
    case ErrorCode::UpstreamRejected:
    case ErrorCode::DownloadFailed:
    case ErrorCode::NotAnImage:
      return 502;
    case ErrorCode::StorageFailure:
      return 500;
  }
  return 500;
}

ApiError to_api_error(const Error& e) { return {std::string(to_string(e.code())), e.what(), http_status(e.code())}; }

json serialize_report(const geo::RegionalReport& r) {
  json out = {{"clusters", json::array()}, {"ranks", json::array()}, {"unresolved", json::array()}};
  for (const auto& c : r.clusters) {
    json members = json::array();
    for (const auto& m : c.members) members.push_back(key_json(m));
    out["clusters"].push_back({{"centroid", {{"lat", c.centroid.lat}, {"lon", c.centroid.lon}}},
                               {"members", std::move(members)},
                               {"raw_count", c.raw_count},
                               {"weighted_reach", round4(c.weighted_reach)}});
  }
  for (const auto& e : r.ranks) out["ranks"].push_back(entry_json(e));
  for (const auto& e : r.unresolved) out["unresolved"].push_back(entry_json(e));
  return out;
}

geo::RegionalReport deserialize_report(const json& j) {
  try {
    geo::RegionalReport r;
    for (const auto& c : j.at("clusters")) {
      geo::GeoCluster g;
      g.centroid = {c.at("centroid").at("lat").get<double>(), c.at("centroid").at("lon").get<double>()};
      for (const auto& m : c.at("members")) g.members.push_back(key_from(m));
      g.raw_count = c.at("raw_count").get<std::size_t>();
      g.weighted_reach = c.at("weighted_reach").get<double>();
      r.clusters.push_back(std::move(g));
    }
    for (const auto& e : j.at("ranks")) r.ranks.push_back(entry_from(e));
    for (const auto& e : j.at("unresolved")) r.unresolved.push_back(entry_from(e));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedPayload, std::string("report: ") + e.what());
  }
}

json serialize_advertisers(const std::vector<advertisers::AdvertiserEntry>& entries) {
  json list = json::array();
  for (const auto& e : entries) {
    json item = {{"page_id", e.page_id},
                 {"page_name", e.page_name},
                 {"ad_count", e.ad_count},
                 {"total_weighted_impressions", e.total_weighted_impressions},
                 {"profile_image_ref", nullptr}};
    if (e.profile_image_ref) {
      item["profile_image_ref"] = std::string(kPrefix) + "/pages/" + *e.profile_image_ref + "/image";
    }
    list.push_back(std::move(item));
  }
  return {{"advertisers", std::move(list)}};
}

json job_to_json(const store::Job& job) {
  return {{"job_id", job.job_id.value},
          {"owner", job.owner.value},
          {"spec", codec::to_json(job.spec)},
          {"created_at", domain::format_rfc3339(job.created_at)},
          {"state", store::to_string(job.state)},
          {"last_poll_at", or_null(opt_time(job.last_poll_at))},
          {"last_report", job.last_report ? store::to_json(*job.last_report) : json(nullptr)}};
}

json account_to_json(const store::Account& a) {
  return {{"account_id", a.account_id.value},
          {"email", a.email},
          {"role", store::to_string(a.role)},
          {"status", store::to_string(a.status)},
          {"attestation",
           {{"identity_confirmed", a.attestation.identity_confirmed},
            {"developer_account", a.attestation.developer_account}}},
          {"created_at", domain::format_rfc3339(a.created_at)}};
}

// ---------------------------------------------------------------------------

struct Server::Impl {
  Services svc;
  ServerOptions opts;
  httplib::Server http;
  std::thread thread;
  std::mutex log_mutex;

  Impl(Services s, ServerOptions o) : svc(s), opts(std::move(o)) {}

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const ApiError& e, const json& extra = nullptr) {
    json body = {{"error", {{"code", e.code}, {"message", e.message}}}};
    if (!extra.is_null()) body["error"].update(extra);
    send_json(res, e.http_status, body);
  }

  // Every handler runs behind this: module errors map through http_status.
  Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const domain::InvalidSpecError& e) {
        json v = json::array();
        for (const auto& x : e.violations()) v.push_back(codec::to_json(x));
        send_error(res, to_api_error(e), {{"violations", v}});
      } catch (const RateLimitedError& e) {
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(e.wait_hint()).count();
        res.set_header("Retry-After", std::to_string(std::max<long long>(secs, 1)));
        send_error(res, to_api_error(e));
      } catch (const Error& e) {
        send_error(res, to_api_error(e));
      } catch (const json::exception& e) {
        send_error(res, {std::string(to_string(ErrorCode::BadRequest)), std::string("invalid JSON: ") + e.what(), 400});
      } catch (const std::exception& e) {
        send_error(res, {"Internal", e.what(), 500});
      }
    };
  }

  store::Account principal(const httplib::Request& req) {
    const std::string header = req.get_header_value("Authorization");
    constexpr std::string_view kBearer = "Bearer ";
    if (header.size() <= kBearer.size() || header.compare(0, kBearer.size(), kBearer) != 0) {
      throw Error(ErrorCode::Unauthenticated, "missing bearer token");
    }
    return svc.accounts.authenticate(header.substr(kBearer.size()));
  }

  static std::string bearer(const httplib::Request& req) { return req.get_header_value("Authorization").substr(7); }

  // Approved principal for ad reads.
  store::Account reader(const httplib::Request& req) {
    auto user = principal(req);
    if (accounts::authorize(user, accounts::Action::ReadAds) == accounts::Decision::Deny) {
      throw Error(ErrorCode::Unauthorized, "account is not approved");
    }
    return user;
  }

  static json body_of(const httplib::Request& req) {
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
  }

  static std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' must be a string");
    }
    return j[key].get<std::string>();
  }

  static std::int64_t parse_int(std::string_view text, const char* what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(ErrorCode::BadRequest, std::string("bad ") + what + ": '" + std::string(text) + "'");
    }
    return v;
  }

  static JobId job_param(const httplib::Request& req) {
    auto v = parse_int(req.path_params.at("id"), "job id");
    if (v <= 0) throw Error(ErrorCode::UnknownJob, "job " + std::to_string(v) + " not found");
    return JobId{v};
  }

  static std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
    if (!req.has_param(name)) return fallback;
    auto v = parse_int(req.get_param_value(name), name);
    if (v < 0) throw Error(ErrorCode::BadRequest, std::string(name) + " must be non-negative");
    return static_cast<std::size_t>(v);
  }

  static store::AdQuery ad_query(const httplib::Request& req, AccountId user) {
    store::AdQuery q;
    q.requesting_user = user;
    const bool has_start = req.has_param("start") && !req.get_param_value("start").empty();
    const bool has_end = req.has_param("end") && !req.get_param_value("end").empty();
    if (has_start != has_end) throw Error(ErrorCode::BadRequest, "start and end must be given together");
    if (has_start) {
      q.time_window = store::TimeWindow{domain::parse_rfc3339(req.get_param_value("start")),
                                        domain::parse_rfc3339(req.get_param_value("end"))};
    }
    if (req.has_param("jobs") && !req.get_param_value("jobs").empty()) {
      std::set<JobId> ids;
      std::stringstream ss(req.get_param_value("jobs"));
      std::string part;
      while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        ids.insert(JobId{parse_int(part, "job id")});
      }
      q.job_ids = std::move(ids);
    }
    return q;
  }

  void log_request(const httplib::Request& req, const httplib::Response& res) {
    if (!opts.request_log) return;
    json line = {{"event", "http_request"}, {"method", req.method}, {"path", req.path}, {"status", res.status}};
    std::lock_guard lock(log_mutex);
    *opts.request_log << line.dump() << '\n' << std::flush;
  }

  void routes() {
    const std::string p(kPrefix);

    http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });
    http.Get(p + "/healthz", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    // --- accounts ---
    http.Post(p + "/signup", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto j = body_of(req);
      store::Attestation att;
      if (j.contains("attestation")) {
        const auto& a = j["attestation"];
        if (!a.is_object()) throw Error(ErrorCode::BadRequest, "attestation must be an object");
        att.identity_confirmed = a.value("identity_confirmed", false);
        att.developer_account = a.value("developer_account", false);
      }
      auto account = svc.accounts.sign_up(required_string(j, "email"), required_string(j, "password"), att);
      send_json(res, 201, account_to_json(account));
    }));

    http.Post(p + "/login", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto j = body_of(req);
      auto token = svc.accounts.login(required_string(j, "email"), required_string(j, "password"));
      auto account = svc.accounts.authenticate(token.token);
      send_json(res, 200,
                {{"token", token.token},
                 {"expires_at", domain::format_rfc3339(token.expires_at)},
                 {"account", account_to_json(account)}});
    }));

    http.Post(p + "/session/renew", guarded([this](const httplib::Request& req, httplib::Response& res) {
      principal(req);
      auto token = svc.accounts.renew(bearer(req));
      send_json(res, 200, {{"token", token.token}, {"expires_at", domain::format_rfc3339(token.expires_at)}});
    }));

    http.Post(p + "/logout", guarded([this](const httplib::Request& req, httplib::Response& res) {
      principal(req);
      svc.accounts.logout(bearer(req));
      res.status = 204;
    }));

    http.Get(p + "/accounts", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      std::optional<store::AccountStatus> status;
      if (req.has_param("status")) {
        status = store::parse_account_status(req.get_param_value("status"));
        if (!status) throw Error(ErrorCode::BadRequest, "unknown status filter");
      }
      json list = json::array();
      for (const auto& a : svc.accounts.list(user.account_id, status)) list.push_back(account_to_json(a));
      send_json(res, 200, {{"accounts", std::move(list)}});
    }));

    http.Post(p + R"(/accounts/:id/review)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      auto target = AccountId{parse_int(req.path_params.at("id"), "account id")};
      auto j = body_of(req);
      auto decision = store::parse_account_status(required_string(j, "decision"));
      if (!decision) throw Error(ErrorCode::BadRequest, "decision must be APPROVED or REJECTED");
      send_json(res, 200, account_to_json(svc.accounts.review(user.account_id, target, *decision)));
    }));

    // --- jobs ---
    http.Post(p + "/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      // Approval is checked before the body so unapproved callers learn nothing.
      if (accounts::authorize(user, accounts::Action::CreateJob) == accounts::Decision::Deny) {
        throw Error(ErrorCode::Unauthorized, "account may not create jobs");
      }
      auto parsed = codec::job_spec_from_json(body_of(req));
      if (auto* violations = std::get_if<std::vector<domain::Violation>>(&parsed)) {
        throw domain::InvalidSpecError(std::move(*violations));
      }
      auto job = svc.jobs.register_job(user.account_id, std::get<domain::JobSpec>(std::move(parsed)));
      send_json(res, 201, job_to_json(job));
    }));

    http.Get(p + "/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      auto list = svc.jobs.list_jobs(user.account_id, req.get_param_value("query"), size_param(req, "limit", 50),
                                     size_param(req, "offset", 0));
      json out = json::array();
      for (const auto& j : list) out.push_back(job_to_json(j));
      send_json(res, 200, {{"jobs", std::move(out)}});
    }));

    http.Get(p + "/jobs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      send_json(res, 200, job_to_json(svc.jobs.get_job(user.account_id, job_param(req))));
    }));

    http.Delete(p + "/jobs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      svc.jobs.delete_job(user.account_id, job_param(req));
      res.status = 204;
    }));

    http.Get(p + "/jobs/:id/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      auto job = svc.jobs.get_job(user.account_id, job_param(req));
      send_json(res, 200,
                {{"job_id", job.job_id.value},
                 {"last_poll_at", or_null(opt_time(job.last_poll_at))},
                 {"report", job.last_report ? store::to_json(*job.last_report) : json(nullptr)}});
    }));

    http.Get(p + "/jobs/:id/export.csv", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = principal(req);
      auto job = svc.jobs.authorize_export(user.account_id, job_param(req));
      res.set_header("Content-Disposition",
                     "attachment; filename=\"job-" + std::to_string(job.job_id.value) + ".csv\"");
      res.set_chunked_content_provider("text/csv; charset=utf-8",
                                       [this, job, uid = user.account_id](std::size_t, httplib::DataSink& sink) {
                                         try {
                                           svc.jobs.write_export(job, uid, sink.os);
                                         } catch (const std::exception&) {
                                           // Headers are gone; truncating is all that is left.
                                           return false;
                                         }
                                         sink.done();
                                         return true;
                                       });
    }));

    // --- analyses ---
    http.Get(p + "/analysis/regions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = reader(req);
      double threshold = opts.default_threshold_km;
      if (req.has_param("threshold_km")) {
        const auto text = req.get_param_value("threshold_km");
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), threshold);
        if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
          throw Error(ErrorCode::BadRequest, "bad threshold_km");
        }
      }
      auto report = geo::regional_report(svc.store, ad_query(req, user.account_id), svc.gazetteer, threshold);
      send_json(res, 200, serialize_report(report));
    }));

    http.Get(p + "/analysis/advertisers", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto user = reader(req);
      const bool with_images = req.get_param_value("images") != "0";
      auto report = advertisers::advertiser_report(svc.store, ad_query(req, user.account_id),
                                                   with_images ? svc.images : nullptr);
      send_json(res, 200, serialize_advertisers(report));
    }));

    http.Get(p + "/pages/:page_id/image", guarded([this](const httplib::Request& req, httplib::Response& res) {
      reader(req);
      if (!svc.images) throw Error(ErrorCode::NotFound, "image cache is not configured");
      const auto& page_id = req.path_params.at("page_id");
      if (!advertisers::is_safe_page_id(page_id)) throw Error(ErrorCode::NotFound, "unknown page");
      auto img = svc.images->fetch(page_id);
      res.status = 200;
      res.set_content(img.bytes, img.content_type);
    }));

    http.set_logger([this](const httplib::Request& req, const httplib::Response& res) { log_request(req, res); });

    if (opts.ui_dir && !http.set_mount_point("/", opts.ui_dir->string())) {
      throw Error(ErrorCode::BadRequest, "ui_dir does not exist: " + opts.ui_dir->string());
    }
  }
};

Server::Server(Services services, ServerOptions options) : impl_(std::make_unique<Impl>(services, std::move(options))) {
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::BadRequest, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::start() {
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace adtracker::api
