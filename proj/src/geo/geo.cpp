#include "adtracker/geo.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "adtracker/csv.hpp"
#include "adtracker/error.hpp"

namespace adtracker::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

double parse_coord(const std::string& text, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::BadRequest, "gazetteer line " + std::to_string(line) + ": bad coordinate '" + text + "'");
  }
  return v;
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

bool linked(const ClusterPoint& a, const ClusterPoint& b, double threshold_km) {
  if (a.coord == b.coord) return true;
  return haversine_km(a.coord, b.coord) < threshold_km;
}

// Mean of member coordinates, longitudes unwrapped around the first one so
// a cluster straddling the antimeridian averages correctly.
LatLon centroid_of(const std::vector<const ClusterPoint*>& members) {
  const double ref = members.front()->coord.lon;
  double lat = 0.0;
  double lon = 0.0;
  for (const auto* p : members) {
    double l = p->coord.lon;
    while (l - ref > 180.0) l -= 360.0;
    while (l - ref < -180.0) l += 360.0;
    lat += p->coord.lat;
    lon += l;
  }
  const auto n = static_cast<double>(members.size());
  lat /= n;
  lon /= n;
  while (lon > 180.0) lon -= 360.0;
  while (lon <= -180.0) lon += 360.0;
  return {lat, lon};
}

std::vector<GeoCluster> assemble(const std::vector<ClusterPoint>& points, DisjointSet& sets) {
  std::map<std::size_t, std::vector<const ClusterPoint*>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) groups[sets.find(i)].push_back(&points[i]);

  std::vector<GeoCluster> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end(), [](const ClusterPoint* a, const ClusterPoint* b) { return a->key < b->key; });
    GeoCluster c;
    c.centroid = centroid_of(members);
    std::vector<std::size_t> ads;
    for (const auto* p : members) {
      c.members.push_back(p->key);
      c.weighted_reach += p->weighted_reach;
      ads.insert(ads.end(), p->ads.begin(), p->ads.end());
    }
    std::sort(ads.begin(), ads.end());
    c.raw_count = static_cast<std::size_t>(std::unique(ads.begin(), ads.end()) - ads.begin());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const GeoCluster& a, const GeoCluster& b) {
    if (a.weighted_reach != b.weighted_reach) return a.weighted_reach > b.weighted_reach;
    return a.members.front() < b.members.front();
  });
  return out;
}

bool rank_before(const LocationEntry& a, const LocationEntry& b) {
  if (a.weighted_reach != b.weighted_reach) return a.weighted_reach > b.weighted_reach;
  if (a.raw_count != b.raw_count) return a.raw_count > b.raw_count;
  return a.key < b.key;
}

}  // namespace

double haversine_km(LatLon a, LatLon b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

std::string normalize_region_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char c : name) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

void Gazetteer::add(std::string_view country_code, std::string_view region_name, LatLon coord) {
  if (!(coord.lat >= -90.0 && coord.lat <= 90.0) || !(coord.lon > -180.0 && coord.lon <= 180.0)) {
    throw Error(ErrorCode::BadRequest, "gazetteer coordinate out of bounds for " + std::string(region_name));
  }
  auto key = std::make_pair(upper_ascii(country_code), normalize_region_name(region_name));
  if (key.second.empty()) throw Error(ErrorCode::BadRequest, "gazetteer region name is empty");
  if (!entries_.emplace(std::move(key), coord).second) {
    throw Error(ErrorCode::BadRequest,
                "duplicate gazetteer key " + std::string(country_code) + "/" + std::string(region_name));
  }
}

std::optional<LatLon> Gazetteer::resolve(std::string_view country_code, std::string_view region_name) const {
  auto it = entries_.find({upper_ascii(country_code), normalize_region_name(region_name)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Gazetteer Gazetteer::from_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  try {
    rows = csv::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("gazetteer: ") + e.what());
  }
  const std::vector<std::string> header = {"country_code", "region_name", "lat", "lon"};
  if (rows.empty() || rows.front() != header) {
    throw Error(ErrorCode::BadRequest, "gazetteer header must be country_code,region_name,lat,lon");
  }
  Gazetteer g;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != 4) {
      throw Error(ErrorCode::BadRequest, "gazetteer line " + std::to_string(i + 1) + ": expected 4 fields");
    }
    g.add(r[0], r[1], {parse_coord(r[2], i + 1), parse_coord(r[3], i + 1)});
  }
  return g;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadRequest, "cannot read gazetteer " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str());
}

std::vector<GeoCluster> cluster_locations_serial(const std::vector<ClusterPoint>& points, double threshold_km) {
  DisjointSet sets(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (linked(points[i], points[j], threshold_km)) sets.unite(i, j);
    }
  }
  return assemble(points, sets);
}

std::vector<GeoCluster> cluster_locations(const std::vector<ClusterPoint>& points, double threshold_km) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges(
      static_cast<std::size_t>(std::max(1, omp_get_max_threads())));

  // Distance tests dominate; unions are cheap and done serially afterwards.
#pragma omp parallel
  {
    auto& local = edges[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      for (std::ptrdiff_t j = i + 1; j < n; ++j) {
        const auto a = static_cast<std::size_t>(i);
        const auto b = static_cast<std::size_t>(j);
        if (linked(points[a], points[b], threshold_km)) local.emplace_back(a, b);
      }
    }
  }

  DisjointSet sets(points.size());
  for (const auto& list : edges) {
    for (auto [a, b] : list) sets.unite(a, b);
  }
  return assemble(points, sets);
}

RegionalReport build_regional_report(const std::vector<domain::AdRecord>& ads, const Gazetteer& g,
                                     double threshold_km) {
  struct Acc {
    double weighted = 0.0;
    std::vector<std::size_t> ads;
  };
  std::map<RegionKey, Acc> regions;
  for (std::size_t i = 0; i < ads.size(); ++i) {
    for (const auto& share : ads[i].regional_distribution) {
      auto& acc = regions[RegionKey{share.country_code, share.region_name}];
      acc.weighted += share.percentage / 100.0;
      if (acc.ads.empty() || acc.ads.back() != i) acc.ads.push_back(i);
    }
  }

  RegionalReport report;
  std::vector<ClusterPoint> points;
  for (auto& [key, acc] : regions) {
    LocationEntry entry{key, acc.ads.size(), acc.weighted};
    if (auto coord = g.resolve(key.country_code, key.region_name)) {
      points.push_back({key, *coord, acc.weighted, std::move(acc.ads)});
      report.ranks.push_back(std::move(entry));
    } else {
      report.unresolved.push_back(std::move(entry));
    }
  }
  std::sort(report.ranks.begin(), report.ranks.end(), rank_before);
  std::sort(report.unresolved.begin(), report.unresolved.end(), rank_before);
  report.clusters = cluster_locations(points, threshold_km);
  return report;
}

RegionalReport regional_report(store::Store& store, const store::AdQuery& q, const Gazetteer& g,
                               double threshold_km) {
  if (!(threshold_km >= 0.0) || !std::isfinite(threshold_km)) {
    throw Error(ErrorCode::BadRequest, "threshold_km must be a finite number >= 0");
  }
  return build_regional_report(store.query_ads(q), g, threshold_km);
}

}  // namespace adtracker::geo
