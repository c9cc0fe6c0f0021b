#pragma once

// Region geocoding, single-linkage clustering of reach spots and the ranked
// location table.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adtracker/domain.hpp"
#include "adtracker/store.hpp"

namespace adtracker::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kDefaultThresholdKm = 100.0;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// Great-circle distance, haversine form.
double haversine_km(LatLon a, LatLon b);

struct RegionKey {
  std::string country_code;
  std::string region_name;

  friend auto operator<=>(const RegionKey&, const RegionKey&) = default;
};

// Trim, ASCII case-fold, collapse internal whitespace runs to one space.
std::string normalize_region_name(std::string_view name);

class Gazetteer {
 public:
  // CSV with header country_code,region_name,lat,lon. Throws
  // Error(BadRequest) on a bad header, row, coordinate or duplicate key.
  static Gazetteer from_csv(std::string_view text);
  static Gazetteer load(const std::filesystem::path& path);
  // Covers every region the simulated provider emits.
  static const Gazetteer& bundled();

  void add(std::string_view country_code, std::string_view region_name, LatLon coord);
  [[nodiscard]] std::optional<LatLon> resolve(std::string_view country_code, std::string_view region_name) const;
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, LatLon> entries_;
};

inline std::optional<LatLon> resolve_region(std::string_view country_code, std::string_view region_name,
                                            const Gazetteer& g) {
  return g.resolve(country_code, region_name);
}

struct ClusterPoint {
  RegionKey key;
  LatLon coord;
  double weighted_reach = 0.0;
  // Indices of the ads touching this region, sorted and unique.
  std::vector<std::size_t> ads;
};

struct GeoCluster {
  LatLon centroid;
  std::vector<RegionKey> members;  // sorted
  std::size_t raw_count = 0;       // distinct ads touching any member
  double weighted_reach = 0.0;

  friend bool operator==(const GeoCluster&, const GeoCluster&) = default;
};

// Connected components of the graph linking points closer than threshold_km.
// Points at identical coordinates are always linked. Output is ordered by
// weighted_reach descending, then first member key. Parallelised with OpenMP.
std::vector<GeoCluster> cluster_locations(const std::vector<ClusterPoint>& points, double threshold_km);
// Single-threaded reference with the same contract.
std::vector<GeoCluster> cluster_locations_serial(const std::vector<ClusterPoint>& points, double threshold_km);

struct LocationEntry {
  RegionKey key;
  std::size_t raw_count = 0;
  double weighted_reach = 0.0;

  friend bool operator==(const LocationEntry&, const LocationEntry&) = default;
};

struct RegionalReport {
  std::vector<GeoCluster> clusters;
  // Resolved regions by weighted_reach desc, raw_count desc, key asc.
  std::vector<LocationEntry> ranks;
  // Regions missing from the gazetteer, same order.
  std::vector<LocationEntry> unresolved;

  friend bool operator==(const RegionalReport&, const RegionalReport&) = default;
};

RegionalReport build_regional_report(const std::vector<domain::AdRecord>& ads, const Gazetteer& g,
                                     double threshold_km);
// Throws whatever query_ads throws (Unauthorized, InvalidWindow).
RegionalReport regional_report(store::Store& store, const store::AdQuery& q, const Gazetteer& g,
                               double threshold_km);

}  // namespace adtracker::geo
