#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "adtracker/error.hpp"
#include "adtracker/store.hpp"
#include "support.hpp"

using namespace adtracker;
using namespace std::chrono_literals;
using testing::epoch_2021;
using testing::make_account;
using testing::random_ads;
using testing::spec_for;

namespace {

struct Fixture {
  testing::QuietLog quiet;
  ManualClock clock{epoch_2021()};
  std::unique_ptr<store::Store> s = store::Store::in_memory(clock);
  store::Account owner = make_account(*s, "owner@example.org", store::Role::Researcher, store::AccountStatus::Approved);

  JobId job(const std::string& term = "vote", domain::Visibility v = domain::Visibility::Private,
            std::optional<AccountId> who = std::nullopt) {
    store::Job j;
    j.owner = who.value_or(owner.account_id);
    j.spec = spec_for(term, v);
    j.created_at = store::to_timestamp(clock.now());
    return s->put_job(j).job_id;
  }
};

std::vector<domain::AdRecord> strip_seen(std::vector<domain::AdRecord> ads) {
  for (auto& a : ads) {
    a.first_seen.reset();
    a.last_seen.reset();
  }
  return ads;
}

std::vector<domain::AdRecord> by_analysis_time(std::vector<domain::AdRecord> ads) {
  auto key = [](const domain::AdRecord& a) {
    return std::make_pair(a.delivery_start ? *a.delivery_start : a.creation_time, a.ad_id);
  };
  std::sort(ads.begin(), ads.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return ads;
}

}  // namespace

TEST_CASE("fresh batch inserts, replay is unchanged, mutated rows update") {
  Fixture f;
  std::mt19937_64 rng(11);
  auto ads = random_ads(rng, 10);
  auto j = f.job();

  CHECK(f.s->upsert_ads(j, ads) == store::UpsertReport{10, 0, 0, 0});
  f.clock.advance(1h);
  CHECK(f.s->upsert_ads(j, ads) == store::UpsertReport{0, 0, 10, 0});

  for (int i : {1, 4, 7}) ads[i].impressions = domain::InsightRange{777000, 777999};
  f.clock.advance(1h);
  CHECK(f.s->upsert_ads(j, ads) == store::UpsertReport{0, 3, 7, 0});

  const auto stored = f.s->all_ads();
  REQUIRE(stored.size() == 10);
  const auto t0 = store::to_timestamp(epoch_2021());
  for (const auto& a : stored) {
    CHECK(a.first_seen == t0);
    CHECK(a.last_seen == t0 + 2h);
    const bool mutated = a.ad_id == ads[1].ad_id || a.ad_id == ads[4].ad_id || a.ad_id == ads[7].ad_id;
    if (mutated) CHECK(a.impressions == domain::InsightRange{777000, 777999});
  }
}

TEST_CASE("invalid rows are skipped and the report always sums to the batch") {
  Fixture f;
  std::mt19937_64 rng(3);
  auto ads = random_ads(rng, 8);
  ads[2].ad_id.clear();
  ads[5].page_id.clear();
  auto r = f.s->upsert_ads(f.job(), ads);
  CHECK(r == store::UpsertReport{6, 0, 0, 2});
  CHECK(r.total() == ads.size());
  CHECK(f.s->ad_count() == 6);
}

TEST_CASE("dedup and idempotence over random batch sequences") {
  Fixture f;
  auto j1 = f.job("a");
  auto j2 = f.job("b");
  std::mt19937_64 rng(2024);
  const auto pool = random_ads(rng, 120);

  for (int round = 0; round < 25; ++round) {
    std::vector<domain::AdRecord> batch;
    const std::size_t n = 1 + rng() % 40;
    for (std::size_t k = 0; k < n; ++k) {
      auto ad = pool[rng() % pool.size()];
      if (rng() % 5 == 0) ad.impressions = domain::InsightRange{rng() % 1000, 5000};
      batch.push_back(ad);
    }
    const auto job = rng() % 2 ? j1 : j2;

    // Independent model of the expected outcome.
    std::map<std::string, domain::AdRecord> model;
    for (const auto& a : strip_seen(f.s->all_ads())) model[a.ad_id] = a;
    store::UpsertReport expected;
    for (const auto& ad : batch) {
      auto it = model.find(ad.ad_id);
      if (it == model.end()) {
        ++expected.inserted;
        model[ad.ad_id] = ad;
      } else if (it->second == ad) {
        ++expected.unchanged;
      } else {
        ++expected.updated;
        it->second = ad;
      }
    }

    f.clock.advance(1min);
    auto got = f.s->upsert_ads(job, batch);
    CHECK(got == expected);
    CHECK(got.total() == batch.size());

    const auto once = strip_seen(f.s->all_ads());
    CHECK(once.size() == model.size());
    CHECK(f.s->ad_count() == model.size());

    f.clock.advance(1min);
    auto again = f.s->upsert_ads(job, batch);
    CHECK(again.inserted == 0);
    CHECK(strip_seen(f.s->all_ads()) == once);
  }
}

TEST_CASE("a failing row rolls back the whole batch") {
  Fixture f;
  auto j = f.job();
  std::mt19937_64 rng(5);
  auto first = random_ads(rng, 5);
  f.s->upsert_ads(j, first);
  const auto before = f.s->all_ads();
  const auto links_before = f.s->linked_ad_ids(j);

  auto batch = random_ads(rng, 12);
  for (auto& a : batch) a.ad_id = "7" + a.ad_id;
  batch[0] = first[0];
  batch[0].impressions = domain::InsightRange{1, 2};

  for (std::size_t fail_at : {std::size_t{0}, std::size_t{6}, std::size_t{11}}) {
    f.s->set_fault_injector([fail_at](std::size_t row) {
      if (row == fail_at) throw std::runtime_error("injected");
    });
    f.clock.advance(1min);
    try {
      f.s->upsert_ads(j, batch);
      FAIL("expected StorageFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StorageFailure);
    }
    CHECK(f.s->all_ads() == before);
    CHECK(f.s->linked_ad_ids(j) == links_before);
  }

  f.s->set_fault_injector(nullptr);
  auto r = f.s->upsert_ads(j, batch);
  CHECK(r == store::UpsertReport{11, 1, 0, 0});
}

TEST_CASE("upsert into an unknown job fails and leaves nothing") {
  Fixture f;
  std::mt19937_64 rng(1);
  try {
    f.s->upsert_ads(JobId{999}, random_ads(rng, 3));
    FAIL("expected UnknownJob");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownJob);
  }
  CHECK(f.s->ad_count() == 0);
}

TEST_CASE("query window matches a linear scan") {
  Fixture f;
  auto j = f.job();
  std::mt19937_64 rng(77);
  const auto ads = random_ads(rng, 150);
  f.s->upsert_ads(j, ads);

  store::AdQuery q;
  q.requesting_user = f.owner.account_id;
  CHECK(strip_seen(f.s->query_ads(q)) == by_analysis_time(ads));

  // Covering window gives the full set.
  q.time_window = store::TimeWindow{domain::Timestamp{} + 0s, domain::parse_rfc3339("2100-01-01T00:00:00Z")};
  CHECK(f.s->query_ads(q).size() == ads.size());

  std::set<domain::Timestamp> used;
  for (const auto& a : ads) used.insert(domain::analysis_time(a));
  auto t = domain::parse_rfc3339("2019-06-01T00:00:00Z");
  while (used.count(t)) t += 1s;
  q.time_window = store::TimeWindow{t, t};
  CHECK(f.s->query_ads(q).empty());

  const auto lo = domain::parse_rfc3339("2019-01-01T00:00:00Z");
  for (int trial = 0; trial < 200; ++trial) {
    auto a = lo + std::chrono::seconds{static_cast<std::int64_t>(rng() % (720LL * 86400))};
    auto b = lo + std::chrono::seconds{static_cast<std::int64_t>(rng() % (720LL * 86400))};
    if (trial % 10 == 0) {
      // Exact boundaries on stored timestamps.
      auto it = used.begin();
      std::advance(it, rng() % used.size());
      a = *it;
      b = *it;
    }
    if (b < a) std::swap(a, b);
    std::vector<domain::AdRecord> expected;
    for (const auto& ad : ads) {
      const auto at = ad.delivery_start ? *ad.delivery_start : ad.creation_time;
      if (a <= at && at <= b) expected.push_back(ad);
    }
    q.time_window = store::TimeWindow{a, b};
    CHECK(strip_seen(f.s->query_ads(q)) == by_analysis_time(expected));
  }
}

TEST_CASE("reversed window is InvalidWindow") {
  Fixture f;
  store::AdQuery q;
  q.requesting_user = f.owner.account_id;
  q.time_window = store::TimeWindow{domain::parse_rfc3339("2020-02-01T00:00:00Z"),
                                    domain::parse_rfc3339("2020-01-01T00:00:00Z")};
  try {
    f.s->query_ads(q);
    FAIL("expected InvalidWindow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidWindow);
  }
}

TEST_CASE("query requires an approved account") {
  Fixture f;
  auto pending = make_account(*f.s, "p@example.org", store::Role::Researcher, store::AccountStatus::Pending);
  auto rejected = make_account(*f.s, "r@example.org", store::Role::Researcher, store::AccountStatus::Rejected);
  for (auto id : {pending.account_id, rejected.account_id, AccountId{4242}}) {
    store::AdQuery q;
    q.requesting_user = id;
    try {
      f.s->query_ads(q);
      FAIL("expected Unauthorized");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unauthorized);
    }
  }
}

TEST_CASE("visibility: private jobs of others are never reachable") {
  Fixture f;
  auto other = make_account(*f.s, "other@example.org", store::Role::Researcher, store::AccountStatus::Approved);
  auto manager = make_account(*f.s, "m@example.org", store::Role::Manager, store::AccountStatus::Approved);
  std::mt19937_64 rng(9);
  auto pool = random_ads(rng, 60);

  // Randomly split the pool over four jobs with overlaps.
  struct J {
    JobId id;
    AccountId owner;
    domain::Visibility vis;
  };
  std::vector<J> jobs = {
      {f.job("a", domain::Visibility::Private), f.owner.account_id, domain::Visibility::Private},
      {f.job("b", domain::Visibility::Public), f.owner.account_id, domain::Visibility::Public},
      {f.job("c", domain::Visibility::Private, other.account_id), other.account_id, domain::Visibility::Private},
      {f.job("d", domain::Visibility::Public, other.account_id), other.account_id, domain::Visibility::Public},
  };
  std::map<std::string, std::set<std::size_t>> links;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    std::vector<domain::AdRecord> batch;
    for (const auto& ad : pool) {
      if (rng() % 3 == 0) {
        batch.push_back(ad);
        links[ad.ad_id].insert(k);
      }
    }
    f.s->upsert_ads(jobs[k].id, batch);
  }

  auto expect_for = [&](AccountId viewer, bool is_manager) {
    std::set<std::string> ids;
    for (const auto& [ad_id, ks] : links) {
      for (auto k : ks) {
        if (is_manager || jobs[k].owner == viewer || jobs[k].vis == domain::Visibility::Public) ids.insert(ad_id);
      }
    }
    return ids;
  };
  auto got_for = [&](AccountId viewer) {
    store::AdQuery q;
    q.requesting_user = viewer;
    std::set<std::string> ids;
    for (const auto& a : f.s->query_ads(q)) ids.insert(a.ad_id);
    return ids;
  };

  CHECK(got_for(f.owner.account_id) == expect_for(f.owner.account_id, false));
  CHECK(got_for(other.account_id) == expect_for(other.account_id, false));
  CHECK(got_for(manager.account_id) == expect_for(manager.account_id, true));

  // Private ads of the other researcher never leak to the owner.
  for (const auto& [ad_id, ks] : links) {
    if (ks == std::set<std::size_t>{2}) CHECK(got_for(f.owner.account_id).count(ad_id) == 0);
  }

  // Filters intersect with visibility.
  store::AdQuery q;
  q.requesting_user = f.owner.account_id;
  q.job_ids = std::set<JobId>{jobs[2].id};
  CHECK(f.s->query_ads(q).empty());
  q.job_ids = std::set<JobId>{jobs[1].id};
  q.page_ids = std::set<std::string>{"501"};
  for (const auto& a : f.s->query_ads(q)) {
    CHECK(a.page_id == "501");
    CHECK(links[a.ad_id].count(1) == 1);
  }
}

TEST_CASE("job CRUD round trip, tombstone and shared ads") {
  Fixture f;
  store::Job j;
  j.owner = f.owner.account_id;
  j.spec = spec_for("Election Day", domain::Visibility::Public);
  j.created_at = store::to_timestamp(f.clock.now());
  auto put = f.s->put_job(j);
  CHECK(put.job_id.value > 0);
  CHECK(f.s->get_job(put.job_id) == put);

  auto j2 = f.job("second");
  std::mt19937_64 rng(4);
  auto ads = random_ads(rng, 6);
  f.s->upsert_ads(put.job_id, ads);
  f.s->upsert_ads(j2, {ads[0], ads[1]});

  f.s->delete_job(put.job_id);
  try {
    f.s->get_job(put.job_id);
    FAIL("expected UnknownJob");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownJob);
  }
  CHECK(f.s->find_job(put.job_id)->state == store::JobState::Deleted);
  CHECK(f.s->linked_ad_ids(put.job_id).empty());
  CHECK(f.s->ad_count() == 6);

  store::AdQuery q;
  q.requesting_user = f.owner.account_id;
  auto visible = f.s->query_ads(q);
  std::set<std::string> ids;
  for (const auto& a : visible) ids.insert(a.ad_id);
  CHECK(ids == std::set<std::string>{ads[0].ad_id, ads[1].ad_id});

  try {
    f.s->delete_job(JobId{12345});
    FAIL("expected UnknownJob");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownJob);
  }
}

TEST_CASE("list_jobs filters by substring and visibility") {
  Fixture f;
  auto other = make_account(*f.s, "o@example.org", store::Role::Researcher, store::AccountStatus::Approved);
  f.job("Climate policy", domain::Visibility::Private);
  f.job("climate MARCH", domain::Visibility::Public, other.account_id);
  f.job("Secret climate", domain::Visibility::Private, other.account_id);
  f.job("tax", domain::Visibility::Public);

  store::JobFilter filter;
  filter.viewer = f.owner.account_id;
  filter.query = "CLIMATE";
  auto got = f.s->list_jobs(filter);
  std::set<std::string> terms;
  for (const auto& j : got) terms.insert(j.spec.search_term);
  CHECK(terms == std::set<std::string>{"Climate policy", "climate MARCH"});

  filter.viewer_is_manager = true;
  CHECK(f.s->list_jobs(filter).size() == 3);
  filter.query.clear();
  filter.limit = 2;
  CHECK(f.s->list_jobs(filter).size() == 2);
  filter.offset = 3;
  CHECK(f.s->list_jobs(filter).size() == 1);
}

TEST_CASE("poll report persists with the job") {
  Fixture f;
  auto j = f.job();
  store::PollReport r;
  r.started_at = store::to_timestamp(f.clock.now());
  r.finished_at = r.started_at + 3s;
  r.pages_fetched = 4;
  r.upsert = {7, 1, 2, 0};
  r.errors = {{"RateLimited", "slow down"}};
  f.s->record_poll(j, r);
  auto got = f.s->get_job(j);
  CHECK(got.last_poll_at == r.finished_at);
  REQUIRE(got.last_report);
  CHECK(*got.last_report == r);
  CHECK(store::poll_report_from_json(store::to_json(r)) == r);
}

TEST_CASE("file store survives reopen") {
  testing::TempDir dir;
  testing::QuietLog quiet;
  ManualClock clock(epoch_2021());
  std::mt19937_64 rng(8);
  auto ads = random_ads(rng, 20);
  JobId id;
  {
    auto s = store::Store::open(dir.path(), clock);
    auto acct = make_account(*s, "a@example.org", store::Role::Researcher, store::AccountStatus::Approved);
    store::Job j;
    j.owner = acct.account_id;
    j.spec = spec_for("vote");
    id = s->put_job(j).job_id;
    s->upsert_ads(id, ads);
  }
  CHECK(std::filesystem::exists(dir.path() / "store"));
  CHECK(std::filesystem::is_directory(dir.path() / "images"));
  auto s = store::Store::open(dir.path(), clock);
  CHECK(s->ad_count() == 20);
  CHECK(s->linked_ad_ids(id).size() == 20);
  CHECK(s->upsert_ads(id, ads) == store::UpsertReport{0, 0, 20, 0});
}

TEST_CASE("accounts: unique email and guarded transitions") {
  Fixture f;
  try {
    make_account(*f.s, "owner@example.org", store::Role::Researcher, store::AccountStatus::Pending);
    FAIL("expected EmailTaken");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmailTaken);
  }
  auto p = make_account(*f.s, "new@example.org", store::Role::Researcher, store::AccountStatus::Pending);
  CHECK(f.s->transition_account_status(p.account_id, store::AccountStatus::Pending, store::AccountStatus::Approved));
  CHECK_FALSE(
      f.s->transition_account_status(p.account_id, store::AccountStatus::Pending, store::AccountStatus::Rejected));
  CHECK(f.s->find_account(p.account_id)->status == store::AccountStatus::Approved);
  CHECK(f.s->list_accounts(store::AccountStatus::Pending).empty());
}
