#include "adtracker/jobs.hpp"

#include <string>

#include "adtracker/accounts.hpp"
#include "adtracker/codec.hpp"
#include "adtracker/csv.hpp"
#include "adtracker/log.hpp"

namespace adtracker::jobs {

namespace {

using domain::AdRecord;

std::string opt_text(const std::optional<std::string>& v) { return v.value_or(std::string()); }

std::string opt_time(const std::optional<domain::Timestamp>& t) {
  return t ? domain::format_rfc3339(*t) : std::string();
}

std::string bound(const std::optional<domain::InsightRange>& r, bool upper) {
  if (!r) return {};
  return std::to_string(upper ? r->upper : r->lower);
}

accounts::JobResource resource(const Job& job) { return {job.owner, job.spec.visibility}; }

}  // namespace

void write_csv_row(std::ostream& out, const AdRecord& ad) {
  csv::Writer w(out);
  w.field(ad.ad_id)
      .field(ad.page_id)
      .field(ad.page_name)
      .field(domain::format_rfc3339(ad.creation_time))
      .field(ad.body)
      .field(opt_text(ad.link_caption))
      .field(opt_text(ad.link_description))
      .field(opt_text(ad.link_title))
      .field(opt_text(ad.snapshot_url))
      .field(bound(ad.spend, false))
      .field(bound(ad.spend, true))
      .field(opt_text(ad.currency))
      .field(opt_text(ad.funded_entity))
      .field(opt_time(ad.delivery_start))
      .field(opt_time(ad.delivery_stop))
      .field(bound(ad.impressions, false))
      .field(bound(ad.impressions, true))
      .field(bound(ad.potential_reach, false))
      .field(bound(ad.potential_reach, true))
      .field(codec::regional_to_json(ad.regional_distribution).dump(), true)
      .field(codec::demographic_to_json(ad.demographic_distribution).dump(), true);
  w.end_row();
}

JobManager::JobManager(store::Store& store, std::shared_ptr<provider::AdProvider> provider, Clock& clock,
                       JobsConfig config)
    : store_(store), provider_(std::move(provider)), clock_(clock), config_(config) {
  if (config_.worker_count < 1) throw Error(ErrorCode::BadRequest, "worker_count must be at least 1");
  if (config_.max_pages_per_cycle < 1) throw Error(ErrorCode::BadRequest, "max_pages_per_cycle must be at least 1");
  workers_.reserve(static_cast<std::size_t>(config_.worker_count));
  for (int i = 0; i < config_.worker_count; ++i) {
    workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
  }
}

JobManager::~JobManager() {
  stop();
  for (auto& w : workers_) w.request_stop();
  work_cv_.notify_all();
  workers_.clear();  // joins
}

store::Account JobManager::require_account(AccountId id) {
  auto account = store_.find_account(id);
  if (!account) throw Error(ErrorCode::Unauthorized, "unknown principal");
  return *account;
}

Job JobManager::register_job(AccountId owner, domain::JobSpec spec) {
  const auto account = require_account(owner);
  if (accounts::authorize(account, accounts::Action::CreateJob) == accounts::Decision::Deny) {
    throw Error(ErrorCode::Unauthorized, "account may not create jobs");
  }
  if (auto violations = domain::validate_job_spec(spec); !violations.empty()) {
    throw domain::InvalidSpecError(std::move(violations));
  }
  Job job;
  job.owner = owner;
  job.spec = std::move(spec);
  job.created_at = store::to_timestamp(clock_.now());
  job.state = store::JobState::Active;
  job = store_.put_job(job);

  log::event("job_registered", {{"job_id", job.job_id.value}, {"owner", owner.value}});
  std::lock_guard lock(mutex_);
  pending_first_.insert(job.job_id);
  if (coordinator_running_) dispatch_locked(job.job_id);
  return job;
}

PollReport JobManager::run_poll_cycle(JobId id) {
  {
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [&] { return !claimed_.contains(id); });
    claimed_.insert(id);
  }
  PollReport report;
  try {
    report = execute_cycle(id);
  } catch (...) {
    std::lock_guard lock(mutex_);
    claimed_.erase(id);
    idle_cv_.notify_all();
    throw;
  }
  std::lock_guard lock(mutex_);
  claimed_.erase(id);
  idle_cv_.notify_all();
  return report;
}

PollReport JobManager::execute_cycle(JobId id) {
  PollReport report;
  report.started_at = store::to_timestamp(clock_.now());

  auto job = store_.find_job(id);
  if (!job || job->state == store::JobState::Deleted) {
    report.errors.push_back({"UnknownJob", "job is absent or deleted"});
    report.finished_at = store::to_timestamp(clock_.now());
    return report;
  }
  {
    std::lock_guard lock(mutex_);
    pending_first_.erase(id);
  }

  std::optional<provider::PageCursor> cursor;
  int waits = 0;
  while (report.pages_fetched < static_cast<std::size_t>(config_.max_pages_per_cycle)) {
    provider::Page page;
    try {
      page = provider_->fetch_page(job->spec, cursor);
    } catch (const RateLimitedError& e) {
      if (waits < config_.max_rate_limit_waits) {
        ++waits;
        log::event("poll_rate_limited", {{"job_id", id.value}, {"wait_ms", e.wait_hint().count()}});
        clock_.sleep_for(e.wait_hint());
        continue;  // same cursor
      }
      report.errors.push_back({std::string(to_string(e.code())), e.what()});
      break;
    } catch (const Error& e) {
      report.errors.push_back({std::string(to_string(e.code())), e.what()});
      break;
    } catch (const std::exception& e) {
      report.errors.push_back({"Internal", e.what()});
      break;
    }
    ++report.pages_fetched;
    if (page.malformed > 0) {
      std::string msg = std::to_string(page.malformed) + " malformed record(s)";
      if (!page.problems.empty()) msg += ": " + page.problems.front();
      report.errors.push_back({std::string(to_string(ErrorCode::MalformedPayload)), msg});
    }

    try {
      auto r = store_.upsert_ads(id, page.ads);
      report.upsert.inserted += r.inserted;
      report.upsert.updated += r.updated;
      report.upsert.unchanged += r.unchanged;
      report.upsert.skipped_invalid += r.skipped_invalid;
    } catch (const Error& e) {
      report.errors.push_back({std::string(to_string(e.code())), e.what()});
      break;
    }

    // A delete issued mid-cycle stops us after the page in hand. The
    // partial report is still recorded on the retained job row.
    if (auto now_job = store_.find_job(id); !now_job || now_job->state == store::JobState::Deleted) break;
    if (!page.next) break;
    cursor = page.next;
  }

  report.finished_at = store::to_timestamp(clock_.now());
  try {
    store_.record_poll(id, report);
  } catch (const Error& e) {
    report.errors.push_back({std::string(to_string(e.code())), e.what()});
  }
  log::event("poll_cycle", {{"job_id", id.value},
                            {"pages", report.pages_fetched},
                            {"upsert", store::to_json(report.upsert)},
                            {"errors", report.errors.size()}});
  return report;
}

void JobManager::dispatch_locked(JobId id) {
  if (claimed_.contains(id)) return;
  claimed_.insert(id);
  queue_.push_back(id);
  work_cv_.notify_one();
}

std::vector<JobId> JobManager::scheduler_tick(Instant now) {
  const auto now_ts = store::to_timestamp(now);
  const auto jobs = store_.active_jobs();
  std::vector<JobId> due;
  std::lock_guard lock(mutex_);
  for (const auto& job : jobs) {
    const bool is_due = !job.last_poll_at || pending_first_.contains(job.job_id) ||
                        *job.last_poll_at <= now_ts - config_.poll_interval;
    if (!is_due) continue;
    due.push_back(job.job_id);
    dispatch_locked(job.job_id);
  }
  return due;
}

void JobManager::worker_loop(std::stop_token stop) {
  while (true) {
    JobId id;
    {
      std::unique_lock lock(mutex_);
      if (!work_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      id = queue_.front();
      queue_.pop_front();
    }
    try {
      execute_cycle(id);
    } catch (const std::exception& e) {
      log::event("poll_cycle_failed", {{"job_id", id.value}, {"error", e.what()}});
    }
    std::lock_guard lock(mutex_);
    claimed_.erase(id);
    idle_cv_.notify_all();
  }
}

void JobManager::coordinator_loop(std::stop_token stop) {
  std::mutex m;
  std::condition_variable_any cv;
  while (!stop.stop_requested()) {
    try {
      scheduler_tick(clock_.now());
    } catch (const std::exception& e) {
      log::event("scheduler_tick_failed", {{"error", e.what()}});
    }
    std::unique_lock lock(m);
    cv.wait_for(lock, stop, config_.tick_period, [] { return false; });
  }
}

void JobManager::start() {
  std::lock_guard lock(mutex_);
  if (coordinator_running_) return;
  coordinator_running_ = true;
  coordinator_ = std::jthread([this](std::stop_token st) { coordinator_loop(st); });
}

void JobManager::stop() {
  {
    std::lock_guard lock(mutex_);
    if (!coordinator_running_) return;
    coordinator_running_ = false;
  }
  coordinator_.request_stop();
  if (coordinator_.joinable()) coordinator_.join();
}

void JobManager::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return claimed_.empty() && queue_.empty(); });
}

std::set<JobId> JobManager::pending_first_polls() const {
  std::lock_guard lock(mutex_);
  return pending_first_;
}

void JobManager::delete_job(AccountId user, JobId id) {
  const auto account = require_account(user);
  auto job = store_.find_job(id);
  if (!job || job->state == store::JobState::Deleted) {
    throw Error(ErrorCode::UnknownJob, "job " + std::to_string(id.value) + " not found");
  }
  if (accounts::authorize(account, accounts::Action::DeleteJob, resource(*job)) == accounts::Decision::Deny) {
    throw Error(ErrorCode::Unauthorized, "only the owner or a manager may delete a job");
  }
  store_.delete_job(id);
  {
    std::lock_guard lock(mutex_);
    pending_first_.erase(id);
  }
  log::event("job_deleted", {{"job_id", id.value}, {"by", user.value}});
}

Job JobManager::get_job(AccountId user, JobId id) {
  const auto account = require_account(user);
  auto job = store_.get_job(id);
  if (accounts::authorize(account, accounts::Action::ReadJob, resource(job)) == accounts::Decision::Deny) {
    throw Error(ErrorCode::Unauthorized, "job is not visible to this account");
  }
  return job;
}

std::vector<Job> JobManager::list_jobs(AccountId user, const std::string& query, std::size_t limit,
                                       std::size_t offset) {
  const auto account = require_account(user);
  if (accounts::authorize(account, accounts::Action::ReadAds) == accounts::Decision::Deny) {
    throw Error(ErrorCode::Unauthorized, "account is not approved");
  }
  store::JobFilter filter;
  filter.viewer = user;
  filter.viewer_is_manager = account.role == store::Role::Manager;
  filter.query = query;
  filter.limit = limit;
  filter.offset = offset;
  return store_.list_jobs(filter);
}

Job JobManager::authorize_export(AccountId user, JobId id) {
  const auto account = require_account(user);
  auto job = store_.get_job(id);
  if (accounts::authorize(account, accounts::Action::ExportJob, resource(job)) == accounts::Decision::Deny) {
    throw Error(ErrorCode::Unauthorized, "job is not exportable by this account");
  }
  return job;
}

void JobManager::write_export(const Job& job, AccountId user, std::ostream& out) {
  store::AdQuery q;
  q.job_ids = std::set<JobId>{job.job_id};
  q.requesting_user = user;
  const auto ads = store_.query_ads(q);
  out << kCsvHeader << "\r\n";
  for (const auto& ad : ads) write_csv_row(out, ad);
}

void JobManager::export_csv(AccountId user, JobId id, std::ostream& out) {
  write_export(authorize_export(user, id), user, out);
}

}  // namespace adtracker::jobs
