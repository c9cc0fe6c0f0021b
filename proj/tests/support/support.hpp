#pragma once

// Shared test helpers. The oracles here are deliberately written without
// reusing production code paths.

#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "adtracker/accounts.hpp"
#include "adtracker/domain.hpp"
#include "adtracker/error.hpp"
#include "adtracker/geo.hpp"
#include "adtracker/store.hpp"

namespace testing {

using namespace adtracker;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Quiets the structured event log for the lifetime of the object.
struct QuietLog {
  QuietLog();
  ~QuietLog();
};

// Generic RFC-4180 reader: CRLF records, quoted fields with doubled quotes,
// embedded CR/LF inside quotes.
std::vector<std::vector<std::string>> rfc4180_read(std::string_view text);

// Distance via the 3-D chord between unit vectors.
double chord_distance_km(double lat1, double lon1, double lat2, double lon2);

// Component label per point, by naive relabeling over all pairs.
std::vector<std::size_t> brute_force_components(const std::vector<geo::ClusterPoint>& points, double threshold_km);

// Archive API object for an AdRecord, as the live endpoint would serve it.
nlohmann::json to_archive_json(const domain::AdRecord& ad);

// A fresh instant in the fixture era.
Instant epoch_2021();

// Account inserted directly with the given role and status.
store::Account make_account(store::Store& s, const std::string& email, store::Role role, store::AccountStatus status);

// Random distinct-ish ad set over the simulated regions plus a few names the
// gazetteer does not know.
std::vector<domain::AdRecord> random_ads(std::mt19937_64& rng, std::size_t n);

// Error code thrown by f, or nullopt when it returns normally.
template <typename F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

domain::JobSpec spec_for(const std::string& term, domain::Visibility v = domain::Visibility::Private);

}  // namespace testing
