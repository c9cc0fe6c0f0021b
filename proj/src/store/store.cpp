#include "adtracker/store.hpp"

#include <algorithm>

#include "adtracker/codec.hpp"
#include "adtracker/log.hpp"
#include "sqlite.hpp"

namespace adtracker::store {

using namespace adtracker::domain;
using nlohmann::json;

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS ads (
  ad_id TEXT PRIMARY KEY,
  page_id TEXT NOT NULL,
  analysis_time INTEGER NOT NULL,
  record TEXT NOT NULL,
  first_seen INTEGER NOT NULL,
  last_seen INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS ads_by_time ON ads(analysis_time, ad_id);
CREATE INDEX IF NOT EXISTS ads_by_page ON ads(page_id);
CREATE TABLE IF NOT EXISTS jobs (
  job_id INTEGER PRIMARY KEY AUTOINCREMENT,
  owner INTEGER NOT NULL,
  spec TEXT NOT NULL,
  search_term TEXT NOT NULL,
  visibility TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  state TEXT NOT NULL,
  last_poll_at INTEGER,
  last_report TEXT
);
CREATE TABLE IF NOT EXISTS job_ads (
  job_id INTEGER NOT NULL,
  ad_id TEXT NOT NULL,
  PRIMARY KEY (job_id, ad_id)
);
CREATE INDEX IF NOT EXISTS job_ads_by_ad ON job_ads(ad_id);
CREATE TABLE IF NOT EXISTS accounts (
  account_id INTEGER PRIMARY KEY AUTOINCREMENT,
  email TEXT NOT NULL UNIQUE,
  password_hash TEXT NOT NULL,
  role TEXT NOT NULL,
  status TEXT NOT NULL,
  identity_confirmed INTEGER NOT NULL,
  developer_account INTEGER NOT NULL,
  created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
  token_hash TEXT PRIMARY KEY,
  account_id INTEGER NOT NULL,
  expires_at INTEGER NOT NULL
);
)sql";

constexpr const char* kJobColumns =
    "job_id, owner, spec, created_at, state, last_poll_at, last_report";
constexpr const char* kAccountColumns =
    "account_id, email, password_hash, role, status, identity_confirmed, developer_account, created_at";

std::int64_t seconds_of(Timestamp t) { return t.time_since_epoch().count(); }
Timestamp from_seconds(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

JobSpec spec_from_json(const json& j) {
  auto parsed = codec::job_spec_from_json(j);
  if (auto* spec = std::get_if<JobSpec>(&parsed)) return *spec;
  throw Error(ErrorCode::StorageFailure, "stored job spec no longer validates");
}

Job read_job(const sql::Statement& st) {
  Job job;
  job.job_id = JobId{st.int64(0)};
  job.owner = AccountId{st.int64(1)};
  job.spec = spec_from_json(json::parse(st.text(2)));
  job.created_at = from_seconds(st.int64(3));
  job.state = st.text(4) == "DELETED" ? JobState::Deleted : JobState::Active;
  if (auto t = st.opt_int64(5)) job.last_poll_at = from_seconds(*t);
  if (auto r = st.opt_text(6)) job.last_report = poll_report_from_json(json::parse(*r));
  return job;
}

Role parse_role(std::string_view s) { return s == "MANAGER" ? Role::Manager : Role::Researcher; }

Account read_account(const sql::Statement& st) {
  Account a;
  a.account_id = AccountId{st.int64(0)};
  a.email = st.text(1);
  a.password_hash = st.text(2);
  a.role = parse_role(st.text(3));
  a.status = parse_account_status(st.text(4)).value_or(AccountStatus::Pending);
  a.attestation.identity_confirmed = st.int64(5) != 0;
  a.attestation.developer_account = st.int64(6) != 0;
  a.created_at = from_seconds(st.int64(7));
  return a;
}

AdRecord read_ad(const sql::Statement& st, int record_col) {
  AdRecord ad = codec::ad_from_json(json::parse(st.text(record_col)));
  ad.first_seen = from_seconds(st.int64(record_col + 1));
  ad.last_seen = from_seconds(st.int64(record_col + 2));
  return ad;
}

// Which fields differ between two versions of the same ad.
bool identity_fields_differ(const AdRecord& a, const AdRecord& b) {
  return a.page_id != b.page_id || a.page_name != b.page_name || a.creation_time != b.creation_time ||
         a.body != b.body || a.link_caption != b.link_caption ||
         a.link_description != b.link_description || a.link_title != b.link_title ||
         a.snapshot_url != b.snapshot_url || a.currency != b.currency ||
         a.funded_entity != b.funded_entity || a.delivery_start != b.delivery_start;
}

std::string placeholders(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += i ? ",?" : "?";
  return out;
}

}  // namespace

std::string_view to_string(JobState s) noexcept { return s == JobState::Active ? "ACTIVE" : "DELETED"; }

std::string_view to_string(Role r) noexcept { return r == Role::Manager ? "MANAGER" : "RESEARCHER"; }

std::string_view to_string(AccountStatus s) noexcept {
  switch (s) {
    case AccountStatus::Pending: return "PENDING";
    case AccountStatus::Approved: return "APPROVED";
    case AccountStatus::Rejected: return "REJECTED";
  }
  return "?";
}

std::optional<AccountStatus> parse_account_status(std::string_view token) {
  for (auto s : {AccountStatus::Pending, AccountStatus::Approved, AccountStatus::Rejected}) {
    if (to_string(s) == token) return s;
  }
  return std::nullopt;
}

Timestamp to_timestamp(Instant t) { return std::chrono::floor<std::chrono::seconds>(t); }

json to_json(const UpsertReport& r) {
  return json{{"inserted", r.inserted},
              {"updated", r.updated},
              {"unchanged", r.unchanged},
              {"skipped_invalid", r.skipped_invalid}};
}

json to_json(const PollReport& r) {
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back({{"kind", e.kind}, {"message", e.message}});
  return json{{"started_at", format_rfc3339(r.started_at)},
              {"finished_at", format_rfc3339(r.finished_at)},
              {"pages_fetched", r.pages_fetched},
              {"upsert", to_json(r.upsert)},
              {"errors", errors}};
}

PollReport poll_report_from_json(const json& j) {
  PollReport r;
  r.started_at = parse_rfc3339(j.at("started_at").get<std::string>());
  r.finished_at = parse_rfc3339(j.at("finished_at").get<std::string>());
  r.pages_fetched = j.at("pages_fetched").get<std::size_t>();
  const auto& u = j.at("upsert");
  r.upsert = {u.at("inserted").get<std::size_t>(), u.at("updated").get<std::size_t>(),
              u.at("unchanged").get<std::size_t>(), u.at("skipped_invalid").get<std::size_t>()};
  for (const auto& e : j.at("errors")) {
    r.errors.push_back({e.at("kind").get<std::string>(), e.at("message").get<std::string>()});
  }
  return r;
}

Store::Store(sqlite3* db, std::filesystem::path data_dir, Clock& clock)
    : db_(db), data_dir_(std::move(data_dir)), clock_(clock) {
  migrate();
}

Store::~Store() { sqlite3_close(db_); }

std::unique_ptr<Store> Store::open(const std::filesystem::path& data_dir, Clock& clock) {
  std::error_code ec;
  std::filesystem::create_directories(data_dir / "store", ec);
  std::filesystem::create_directories(data_dir / "images", ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot create data directory: " + ec.message());

  sqlite3* db = nullptr;
  auto path = (data_dir / "store" / "adtracker.db").string();
  if (sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw Error(ErrorCode::StorageFailure, "cannot open " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db, 5000);
  sql::exec(db, "PRAGMA journal_mode=WAL");
  sql::exec(db, "PRAGMA synchronous=NORMAL");
  return std::unique_ptr<Store>(new Store(db, data_dir, clock));
}

std::unique_ptr<Store> Store::in_memory(Clock& clock) {
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(":memory:", &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    sqlite3_close(db);
    throw Error(ErrorCode::StorageFailure, "cannot open in-memory database");
  }
  return std::unique_ptr<Store>(new Store(db, {}, clock));
}

void Store::migrate() {
  std::lock_guard lock(mutex_);
  sql::exec(db_, kSchema);
}

void Store::set_fault_injector(FaultInjector injector) {
  std::lock_guard lock(mutex_);
  fault_injector_ = std::move(injector);
}

// --- ads -----------------------------------------------------------------------

UpsertReport Store::upsert_ads(JobId job, const std::vector<AdRecord>& ads) {
  std::lock_guard lock(mutex_);
  const auto now = seconds_of(to_timestamp(clock_.now()));
  UpsertReport report;
  std::vector<std::string> anomalies;

  try {
    sql::Transaction tx(db_, true);

    sql::Statement job_row(db_, "SELECT state FROM jobs WHERE job_id = ?");
    job_row.bind(1, job.value);
    if (!job_row.step()) throw Error(ErrorCode::UnknownJob, "unknown job " + std::to_string(job.value));
    const bool link = job_row.text(0) == "ACTIVE";

    sql::Statement select(db_, "SELECT record FROM ads WHERE ad_id = ?");
    sql::Statement insert(db_,
                          "INSERT INTO ads (ad_id, page_id, analysis_time, record, first_seen, last_seen) "
                          "VALUES (?, ?, ?, ?, ?, ?)");
    sql::Statement replace(db_,
                           "UPDATE ads SET page_id = ?, analysis_time = ?, record = ?, last_seen = ? "
                           "WHERE ad_id = ?");
    sql::Statement touch(db_, "UPDATE ads SET last_seen = ? WHERE ad_id = ?");
    sql::Statement link_ad(db_, "INSERT OR IGNORE INTO job_ads (job_id, ad_id) VALUES (?, ?)");

    for (std::size_t i = 0; i < ads.size(); ++i) {
      if (fault_injector_) fault_injector_(i);
      const AdRecord& ad = ads[i];
      if (!is_valid_ad(ad)) {
        ++report.skipped_invalid;
        continue;
      }
      const std::string record = codec::to_json(ad, false).dump();
      const auto when = seconds_of(analysis_time(ad));

      select.bind(1, ad.ad_id);
      std::optional<std::string> existing;
      if (select.step()) existing = select.text(0);
      select.reset();

      if (!existing) {
        insert.bind(1, ad.ad_id).bind(2, ad.page_id).bind(3, when).bind(4, record).bind(5, now).bind(6, now);
        insert.run();
        insert.reset();
        ++report.inserted;
      } else if (*existing == record) {
        touch.bind(1, now).bind(2, ad.ad_id);
        touch.run();
        touch.reset();
        ++report.unchanged;
      } else {
        if (identity_fields_differ(codec::ad_from_json(json::parse(*existing)), ad)) {
          anomalies.push_back(ad.ad_id);
        }
        replace.bind(1, ad.page_id).bind(2, when).bind(3, record).bind(4, now).bind(5, ad.ad_id);
        replace.run();
        replace.reset();
        ++report.updated;
      }
      if (link) {
        link_ad.bind(1, job.value).bind(2, ad.ad_id);
        link_ad.run();
        link_ad.reset();
      }
    }
    tx.commit();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownJob || e.code() == ErrorCode::StorageFailure) throw;
    throw Error(ErrorCode::StorageFailure, std::string("upsert aborted: ") + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::StorageFailure, std::string("upsert aborted: ") + e.what());
  }

  for (const auto& id : anomalies) {
    log::event("ad_identity_changed", {{"ad_id", id}, {"job_id", job.value}});
  }
  return report;
}

Account Store::require_approved(AccountId id) {
  sql::Statement st(db_, std::string("SELECT ") + kAccountColumns + " FROM accounts WHERE account_id = ?");
  st.bind(1, id.value);
  if (!st.step()) throw Error(ErrorCode::Unauthorized, "unknown account");
  Account account = read_account(st);
  if (account.status != AccountStatus::Approved) {
    throw Error(ErrorCode::Unauthorized, "account is not approved");
  }
  return account;
}

std::vector<AdRecord> Store::query_ads(const AdQuery& q) {
  if (q.time_window && q.time_window->start > q.time_window->end) {
    throw Error(ErrorCode::InvalidWindow, "window start is after its end");
  }
  std::lock_guard lock(mutex_);
  sql::Transaction tx(db_);
  const Account user = require_approved(q.requesting_user);

  std::string text =
      "SELECT a.record, a.first_seen, a.last_seen FROM ads a "
      "WHERE EXISTS (SELECT 1 FROM job_ads l JOIN jobs j ON j.job_id = l.job_id "
      "WHERE l.ad_id = a.ad_id AND j.state = 'ACTIVE' "
      "AND (? OR j.owner = ? OR j.visibility = 'PUBLIC')";
  if (q.job_ids) text += " AND l.job_id IN (" + placeholders(q.job_ids->size()) + ")";
  text += ")";
  if (q.page_ids) text += " AND a.page_id IN (" + placeholders(q.page_ids->size()) + ")";
  if (q.time_window) text += " AND a.analysis_time BETWEEN ? AND ?";
  text += " ORDER BY a.analysis_time, a.ad_id";

  sql::Statement st(db_, text);
  int idx = 1;
  st.bind(idx++, static_cast<std::int64_t>(user.role == Role::Manager));
  st.bind(idx++, user.account_id.value);
  if (q.job_ids) {
    for (auto id : *q.job_ids) st.bind(idx++, id.value);
  }
  if (q.page_ids) {
    for (const auto& p : *q.page_ids) st.bind(idx++, p);
  }
  if (q.time_window) {
    st.bind(idx++, seconds_of(q.time_window->start));
    st.bind(idx++, seconds_of(q.time_window->end));
  }

  std::vector<AdRecord> out;
  while (st.step()) out.push_back(read_ad(st, 0));
  return out;
}

std::size_t Store::ad_count() {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, "SELECT COUNT(*) FROM ads");
  st.step();
  return static_cast<std::size_t>(st.int64(0));
}

std::vector<AdRecord> Store::all_ads() {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, "SELECT record, first_seen, last_seen FROM ads ORDER BY ad_id");
  std::vector<AdRecord> out;
  while (st.step()) out.push_back(read_ad(st, 0));
  return out;
}

std::vector<std::string> Store::linked_ad_ids(JobId job) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, "SELECT ad_id FROM job_ads WHERE job_id = ? ORDER BY ad_id");
  st.bind(1, job.value);
  std::vector<std::string> out;
  while (st.step()) out.push_back(st.text(0));
  return out;
}

// --- jobs ----------------------------------------------------------------------

Job Store::put_job(Job job) {
  std::lock_guard lock(mutex_);
  const std::string spec = codec::to_json(job.spec).dump();
  std::optional<std::string> report;
  if (job.last_report) report = to_json(*job.last_report).dump();
  std::optional<std::int64_t> last_poll;
  if (job.last_poll_at) last_poll = seconds_of(*job.last_poll_at);

  sql::Transaction tx(db_, true);
  if (job.job_id.value == 0) {
    sql::Statement st(db_,
                      "INSERT INTO jobs (owner, spec, search_term, visibility, created_at, state, "
                      "last_poll_at, last_report) VALUES (?, ?, ?, ?, ?, ?, ?, ?)");
    st.bind(1, job.owner.value)
        .bind(2, spec)
        .bind(3, job.spec.search_term)
        .bind(4, to_string(job.spec.visibility))
        .bind(5, seconds_of(job.created_at))
        .bind(6, to_string(job.state))
        .bind(7, last_poll)
        .bind(8, report);
    st.run();
    job.job_id = JobId{sqlite3_last_insert_rowid(db_)};
  } else {
    sql::Statement st(db_,
                      "INSERT INTO jobs (job_id, owner, spec, search_term, visibility, created_at, state, "
                      "last_poll_at, last_report) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?) "
                      "ON CONFLICT(job_id) DO UPDATE SET owner = excluded.owner, spec = excluded.spec, "
                      "search_term = excluded.search_term, visibility = excluded.visibility, "
                      "created_at = excluded.created_at, state = excluded.state, "
                      "last_poll_at = excluded.last_poll_at, last_report = excluded.last_report");
    st.bind(1, job.job_id.value)
        .bind(2, job.owner.value)
        .bind(3, spec)
        .bind(4, job.spec.search_term)
        .bind(5, to_string(job.spec.visibility))
        .bind(6, seconds_of(job.created_at))
        .bind(7, to_string(job.state))
        .bind(8, last_poll)
        .bind(9, report);
    st.run();
    if (job.state == JobState::Deleted) {
      sql::Statement unlink(db_, "DELETE FROM job_ads WHERE job_id = ?");
      unlink.bind(1, job.job_id.value);
      unlink.run();
    }
  }
  tx.commit();
  return job;
}

std::optional<Job> Store::find_job(JobId id) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, std::string("SELECT ") + kJobColumns + " FROM jobs WHERE job_id = ?");
  st.bind(1, id.value);
  if (!st.step()) return std::nullopt;
  return read_job(st);
}

Job Store::get_job(JobId id) {
  auto job = find_job(id);
  if (!job || job->state == JobState::Deleted) {
    throw Error(ErrorCode::UnknownJob, "unknown job " + std::to_string(id.value));
  }
  return *job;
}

void Store::delete_job(JobId id) {
  std::lock_guard lock(mutex_);
  sql::Transaction tx(db_, true);
  sql::Statement st(db_, "UPDATE jobs SET state = 'DELETED' WHERE job_id = ? AND state = 'ACTIVE'");
  st.bind(1, id.value);
  st.run();
  if (sqlite3_changes(db_) == 0) throw Error(ErrorCode::UnknownJob, "unknown job " + std::to_string(id.value));
  sql::Statement unlink(db_, "DELETE FROM job_ads WHERE job_id = ?");
  unlink.bind(1, id.value);
  unlink.run();
  tx.commit();
}

std::vector<Job> Store::list_jobs(const JobFilter& filter) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, std::string("SELECT ") + kJobColumns +
                             " FROM jobs WHERE state = 'ACTIVE' ORDER BY job_id");
  std::vector<Job> matched;
  while (st.step()) {
    Job job = read_job(st);
    bool visible = filter.viewer_is_manager || job.owner == filter.viewer ||
                   job.spec.visibility == Visibility::Public;
    if (!visible || !contains_case_insensitive(job.spec.search_term, filter.query)) continue;
    matched.push_back(std::move(job));
  }
  if (filter.offset >= matched.size()) return {};
  auto first = matched.begin() + static_cast<std::ptrdiff_t>(filter.offset);
  auto last = first + static_cast<std::ptrdiff_t>(std::min(filter.limit, matched.size() - filter.offset));
  return {std::make_move_iterator(first), std::make_move_iterator(last)};
}

std::vector<Job> Store::active_jobs() {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, std::string("SELECT ") + kJobColumns +
                             " FROM jobs WHERE state = 'ACTIVE' ORDER BY job_id");
  std::vector<Job> out;
  while (st.step()) out.push_back(read_job(st));
  return out;
}

void Store::record_poll(JobId id, const PollReport& report) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, "UPDATE jobs SET last_poll_at = ?, last_report = ? WHERE job_id = ?");
  st.bind(1, seconds_of(report.finished_at)).bind(2, to_json(report).dump()).bind(3, id.value);
  st.run();
  if (sqlite3_changes(db_) == 0) throw Error(ErrorCode::UnknownJob, "unknown job " + std::to_string(id.value));
}

// --- accounts ------------------------------------------------------------------

Account Store::create_account(Account account) {
  std::lock_guard lock(mutex_);
  sql::Transaction tx(db_, true);
  sql::Statement exists(db_, "SELECT 1 FROM accounts WHERE email = ?");
  exists.bind(1, account.email);
  if (exists.step()) throw Error(ErrorCode::EmailTaken, "email already registered");

  sql::Statement st(db_,
                    "INSERT INTO accounts (email, password_hash, role, status, identity_confirmed, "
                    "developer_account, created_at) VALUES (?, ?, ?, ?, ?, ?, ?)");
  st.bind(1, account.email)
      .bind(2, account.password_hash)
      .bind(3, to_string(account.role))
      .bind(4, to_string(account.status))
      .bind(5, static_cast<std::int64_t>(account.attestation.identity_confirmed))
      .bind(6, static_cast<std::int64_t>(account.attestation.developer_account))
      .bind(7, seconds_of(account.created_at));
  st.run();
  account.account_id = AccountId{sqlite3_last_insert_rowid(db_)};
  tx.commit();
  return account;
}

std::optional<Account> Store::find_account(AccountId id) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, std::string("SELECT ") + kAccountColumns + " FROM accounts WHERE account_id = ?");
  st.bind(1, id.value);
  if (!st.step()) return std::nullopt;
  return read_account(st);
}

std::optional<Account> Store::find_account_by_email(const std::string& email) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, std::string("SELECT ") + kAccountColumns + " FROM accounts WHERE email = ?");
  st.bind(1, email);
  if (!st.step()) return std::nullopt;
  return read_account(st);
}

bool Store::transition_account_status(AccountId id, AccountStatus from, AccountStatus to) {
  std::lock_guard lock(mutex_);
  sql::Transaction tx(db_, true);
  sql::Statement exists(db_, "SELECT 1 FROM accounts WHERE account_id = ?");
  exists.bind(1, id.value);
  if (!exists.step()) throw Error(ErrorCode::UnknownAccount, "unknown account");
  sql::Statement st(db_, "UPDATE accounts SET status = ? WHERE account_id = ? AND status = ?");
  st.bind(1, to_string(to)).bind(2, id.value).bind(3, to_string(from));
  st.run();
  bool changed = sqlite3_changes(db_) > 0;
  tx.commit();
  return changed;
}

std::vector<Account> Store::list_accounts(std::optional<AccountStatus> status) {
  std::lock_guard lock(mutex_);
  std::string text = std::string("SELECT ") + kAccountColumns + " FROM accounts";
  if (status) text += " WHERE status = ?";
  text += " ORDER BY account_id";
  sql::Statement st(db_, text);
  if (status) st.bind(1, to_string(*status));
  std::vector<Account> out;
  while (st.step()) out.push_back(read_account(st));
  return out;
}

// --- sessions ------------------------------------------------------------------

void Store::put_session(const Session& s) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_,
                    "INSERT INTO sessions (token_hash, account_id, expires_at) VALUES (?, ?, ?) "
                    "ON CONFLICT(token_hash) DO UPDATE SET expires_at = excluded.expires_at");
  st.bind(1, s.token_hash).bind(2, s.account_id.value).bind(3, seconds_of(s.expires_at));
  st.run();
}

std::optional<Session> Store::find_session(const std::string& token_hash) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, "SELECT token_hash, account_id, expires_at FROM sessions WHERE token_hash = ?");
  st.bind(1, token_hash);
  if (!st.step()) return std::nullopt;
  return Session{st.text(0), AccountId{st.int64(1)}, from_seconds(st.int64(2))};
}

void Store::delete_session(const std::string& token_hash) {
  std::lock_guard lock(mutex_);
  sql::Statement st(db_, "DELETE FROM sessions WHERE token_hash = ?");
  st.bind(1, token_hash);
  st.run();
}

}  // namespace adtracker::store
