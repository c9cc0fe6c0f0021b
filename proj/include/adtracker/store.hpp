#pragma once

// Durable, deduplicating storage for ads, jobs, accounts and sessions.
//
// Backed by one SQLite database. Every public operation runs under a single
// mutex inside its own transaction, so writes are serialized and every read
// sees a consistent snapshot (never half of an upsert batch).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adtracker/clock.hpp"
#include "adtracker/domain.hpp"

struct sqlite3;

namespace adtracker {

template <typename Tag>
struct Id {
  std::int64_t value = 0;

  friend auto operator<=>(const Id&, const Id&) = default;
};

struct JobTag {};
struct AccountTag {};
using JobId = Id<JobTag>;
using AccountId = Id<AccountTag>;

}  // namespace adtracker

namespace adtracker::store {

struct UpsertReport {
  std::size_t inserted = 0;
  std::size_t updated = 0;
  std::size_t unchanged = 0;
  std::size_t skipped_invalid = 0;

  [[nodiscard]] std::size_t total() const { return inserted + updated + unchanged + skipped_invalid; }
  friend bool operator==(const UpsertReport&, const UpsertReport&) = default;
};

struct TimeWindow {
  domain::Timestamp start;
  domain::Timestamp end;
};

struct AdQuery {
  std::optional<TimeWindow> time_window;
  std::optional<std::set<JobId>> job_ids;
  std::optional<std::set<std::string>> page_ids;
  AccountId requesting_user;
};

enum class JobState { Active, Deleted };
std::string_view to_string(JobState s) noexcept;

struct PollError {
  std::string kind;
  std::string message;

  friend bool operator==(const PollError&, const PollError&) = default;
};

struct PollReport {
  domain::Timestamp started_at{};
  domain::Timestamp finished_at{};
  std::size_t pages_fetched = 0;
  UpsertReport upsert;
  std::vector<PollError> errors;

  friend bool operator==(const PollReport&, const PollReport&) = default;
};

struct Job {
  JobId job_id;
  AccountId owner;
  domain::JobSpec spec;
  domain::Timestamp created_at{};
  JobState state = JobState::Active;
  std::optional<domain::Timestamp> last_poll_at;
  std::optional<PollReport> last_report;

  friend bool operator==(const Job&, const Job&) = default;
};

enum class Role { Researcher, Manager };
enum class AccountStatus { Pending, Approved, Rejected };
std::string_view to_string(Role r) noexcept;
std::string_view to_string(AccountStatus s) noexcept;
std::optional<AccountStatus> parse_account_status(std::string_view token);

struct Attestation {
  bool identity_confirmed = false;
  bool developer_account = false;

  friend bool operator==(const Attestation&, const Attestation&) = default;
};

struct Account {
  AccountId account_id;
  std::string email;
  std::string password_hash;
  Role role = Role::Researcher;
  AccountStatus status = AccountStatus::Pending;
  Attestation attestation;
  domain::Timestamp created_at{};

  friend bool operator==(const Account&, const Account&) = default;
};

struct Session {
  std::string token_hash;
  AccountId account_id;
  domain::Timestamp expires_at{};
};

struct JobFilter {
  AccountId viewer;
  bool viewer_is_manager = false;
  std::string query;  // case-insensitive substring of search_term
  std::size_t limit = 50;
  std::size_t offset = 0;
};

// Receives the row index within the batch before that row is written.
// Throwing from it aborts the batch, which must then leave no trace.
using FaultInjector = std::function<void(std::size_t row)>;

class Store {
 public:
  // Opens (creating when needed) <data_dir>/store/adtracker.db and ensures
  // <data_dir>/images/ exists.
  static std::unique_ptr<Store> open(const std::filesystem::path& data_dir, Clock& clock);
  static std::unique_ptr<Store> in_memory(Clock& clock);

  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // --- ads ---
  UpsertReport upsert_ads(JobId job, const std::vector<domain::AdRecord>& ads);
  std::vector<domain::AdRecord> query_ads(const AdQuery& q);
  [[nodiscard]] std::size_t ad_count();
  // Every stored ad in ad_id order, including seen timestamps.
  std::vector<domain::AdRecord> all_ads();
  std::vector<std::string> linked_ad_ids(JobId job);

  // --- jobs ---
  // job_id 0 allocates a new id; the stored job is returned.
  Job put_job(Job job);
  // Throws UnknownJob for absent or DELETED jobs.
  Job get_job(JobId id);
  // Includes DELETED rows.
  std::optional<Job> find_job(JobId id);
  // Soft delete: state DELETED, job-ad links removed, ads kept.
  void delete_job(JobId id);
  std::vector<Job> list_jobs(const JobFilter& filter);
  std::vector<Job> active_jobs();
  void record_poll(JobId id, const PollReport& report);

  // --- accounts ---
  // Throws EmailTaken.
  Account create_account(Account account);
  std::optional<Account> find_account(AccountId id);
  std::optional<Account> find_account_by_email(const std::string& email);
  // Applies the transition only from `from`; false when the account was
  // not in that status. Throws UnknownAccount.
  bool transition_account_status(AccountId id, AccountStatus from, AccountStatus to);
  std::vector<Account> list_accounts(std::optional<AccountStatus> status);

  // --- sessions ---
  void put_session(const Session& s);
  std::optional<Session> find_session(const std::string& token_hash);
  void delete_session(const std::string& token_hash);

  void set_fault_injector(FaultInjector injector);

  [[nodiscard]] const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

 private:
  Store(sqlite3* db, std::filesystem::path data_dir, Clock& clock);

  void migrate();
  Account require_approved(AccountId id);

  sqlite3* db_;
  std::filesystem::path data_dir_;
  Clock& clock_;
  std::mutex mutex_;
  FaultInjector fault_injector_;
};

domain::Timestamp to_timestamp(Instant t);

nlohmann::json to_json(const UpsertReport& r);
nlohmann::json to_json(const PollReport& r);
PollReport poll_report_from_json(const nlohmann::json& j);

}  // namespace adtracker::store
