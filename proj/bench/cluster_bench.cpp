// Times cluster_locations (OpenMP) against the serial reference on synthetic
// point clouds and checks that both return identical clusters.

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include "adtracker/geo.hpp"

using adtracker::geo::ClusterPoint;

namespace {

std::vector<ClusterPoint> make_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lat(-60, 70), lon(-180, 180), jitter(-3, 3);
  std::vector<ClusterPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Mostly small clumps so every threshold has some structure to find.
    const double clat = i % 7 == 0 ? lat(rng) : pts[rng() % std::max<std::size_t>(i, 1)].coord.lat;
    const double clon = i % 7 == 0 ? lon(rng) : pts[rng() % std::max<std::size_t>(i, 1)].coord.lon;
    pts[i].key = {"XX", "r" + std::to_string(i)};
    pts[i].coord = {std::clamp(clat + jitter(rng), -90.0, 90.0), std::clamp(clon + jitter(rng), -179.99, 180.0)};
    pts[i].weighted_reach = static_cast<double>(rng() % 1000) / 100.0;
    pts[i].ads = {i};
  }
  return pts;
}

template <typename F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster_locations benchmark"};
  std::vector<std::size_t> sizes{500, 2000, 5000};
  std::vector<double> thresholds{50, 250};
  int reps = 3;
  std::uint64_t seed = 42;
  app.add_option("--sizes", sizes, "point counts")->delimiter(',');
  app.add_option("--thresholds", thresholds, "link thresholds in km")->delimiter(',');
  app.add_option("--reps", reps, "repetitions, best time is reported")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "RNG seed");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads=%d\n%8s %10s %10s %12s %12s %8s %s\n", omp_get_max_threads(), "points", "threshold",
              "clusters", "serial_ms", "parallel_ms", "speedup", "equal");
  bool all_equal = true;
  for (auto n : sizes) {
    const auto pts = make_points(n, seed);
    for (double t : thresholds) {
      std::vector<adtracker::geo::GeoCluster> serial, parallel;
      const double s_ms = best_ms(reps, [&] { serial = adtracker::geo::cluster_locations_serial(pts, t); });
      const double p_ms = best_ms(reps, [&] { parallel = adtracker::geo::cluster_locations(pts, t); });
      const bool equal = serial == parallel;
      all_equal = all_equal && equal;
      std::printf("%8zu %10.1f %10zu %12.2f %12.2f %8.2f %s\n", n, t, serial.size(), s_ms, p_ms, s_ms / p_ms,
                  equal ? "yes" : "NO");
    }
  }
  return all_equal ? 0 : 1;
}
