#pragma once

// Job registration, continuous refresh scheduling and CSV export.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <string_view>
#include <thread>
#include <vector>

#include "adtracker/clock.hpp"
#include "adtracker/provider.hpp"
#include "adtracker/store.hpp"

namespace adtracker::jobs {

using store::Job;
using store::PollReport;

struct JobsConfig {
  std::chrono::seconds poll_interval{300};
  int worker_count = 4;
  int max_pages_per_cycle = 40;
  // Rate-limit suspensions tolerated within one cycle.
  int max_rate_limit_waits = 5;
  // Real-time period of the background coordinator.
  std::chrono::milliseconds tick_period{1000};
};

inline constexpr std::string_view kCsvHeader =
    "ad_id,page_id,page_name,creation_time,body,link_caption,link_description,link_title,"
    "snapshot_url,spend_lower,spend_upper,currency,funded_entity,delivery_start,delivery_stop,"
    "impressions_lower,impressions_upper,potential_reach_lower,potential_reach_upper,"
    "regional_distribution,demographic_distribution";

// One RFC-4180 record (CRLF-terminated) in kCsvHeader column order.
void write_csv_row(std::ostream& out, const domain::AdRecord& ad);

class JobManager {
 public:
  JobManager(store::Store& store, std::shared_ptr<provider::AdProvider> provider, Clock& clock,
             JobsConfig config = {});
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  // Throws Unauthorized, InvalidSpecError.
  Job register_job(AccountId owner, domain::JobSpec spec);

  // Paginates the job's search to exhaustion or the page budget, upserting
  // each page. Never throws for provider or storage failures; they end the
  // cycle and are listed in the report. Waits if the job is mid-cycle
  // elsewhere.
  PollReport run_poll_cycle(JobId id);

  // Jobs due at `now` (never polled, polled at least poll_interval ago, or
  // awaiting their first poll). Each one not already queued or running is
  // handed to the worker pool.
  std::vector<JobId> scheduler_tick(Instant now);

  // Throws UnknownJob, Unauthorized.
  void delete_job(AccountId user, JobId id);
  Job get_job(AccountId user, JobId id);
  std::vector<Job> list_jobs(AccountId user, const std::string& query, std::size_t limit,
                             std::size_t offset);

  // Authorization for export; throws UnknownJob / Unauthorized. Split from
  // write_export so HTTP handlers can fail before streaming starts.
  Job authorize_export(AccountId user, JobId id);
  void write_export(const Job& job, AccountId user, std::ostream& out);
  void export_csv(AccountId user, JobId id, std::ostream& out);

  // Background coordinator calling scheduler_tick every tick_period.
  void start();
  void stop();
  // Blocks until nothing is queued or running.
  void wait_idle();

  [[nodiscard]] std::set<JobId> pending_first_polls() const;
  [[nodiscard]] const JobsConfig& config() const noexcept { return config_; }

 private:
  PollReport execute_cycle(JobId id);
  void dispatch_locked(JobId id);
  void worker_loop(std::stop_token stop);
  void coordinator_loop(std::stop_token stop);
  store::Account require_account(AccountId id);

  store::Store& store_;
  std::shared_ptr<provider::AdProvider> provider_;
  Clock& clock_;
  JobsConfig config_;

  mutable std::mutex mutex_;
  std::condition_variable_any work_cv_;
  std::condition_variable idle_cv_;
  std::deque<JobId> queue_;
  // Jobs queued or mid-cycle; a claimed job is never started twice.
  std::set<JobId> claimed_;
  std::set<JobId> pending_first_;
  bool coordinator_running_ = false;

  std::vector<std::jthread> workers_;
  std::jthread coordinator_;
};

}  // namespace adtracker::jobs
