#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "replan/estimator.hpp"
#include "replan/io.hpp"
#include "replan/planners.hpp"

namespace replan {

struct BenchTrialRow {
  std::string algorithm;  // "astar", "improved", or "rrtstar"
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;
  double path_cost = std::numeric_limits<double>::quiet_NaN();
  bool success = false;
};

struct BenchAggregate {
  std::string algorithm;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  double median_cost = std::numeric_limits<double>::quiet_NaN();
};

struct BenchReport {
  std::vector<BenchTrialRow> rows;
  std::vector<BenchAggregate> aggregates;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline BenchAggregate aggregate_rows(const std::string& algorithm,
                                     const std::vector<BenchTrialRow>& rows) {
  BenchAggregate agg;
  agg.algorithm = algorithm;
  std::vector<double> elapsed, costs;
  for (const auto& row : rows) {
    if (row.algorithm != algorithm) continue;
    ++agg.trials;
    elapsed.push_back(row.elapsed_ms);
    if (row.success) {
      ++agg.successes;
      costs.push_back(row.path_cost);
    }
  }
  agg.median_ms = median_of(elapsed);
  agg.median_cost = median_of(costs);
  if (!elapsed.empty()) {
    double sum = 0.0;
    for (double e : elapsed) sum += e;
    agg.mean_ms = sum / static_cast<double>(elapsed.size());
    if (elapsed.size() > 1) {
      double sq = 0.0;
      for (double e : elapsed) sq += (e - agg.mean_ms) * (e - agg.mean_ms);
      agg.stddev_ms = std::sqrt(sq / static_cast<double>(elapsed.size() - 1));
    }
  }
  return agg;
}

}  // namespace detail

/// Runs all three planners on the scene, `trials` timed repetitions each with
/// per-trial seeds shared across planners. One untimed warmup pass (the first
/// trial's seed) is discarded before the timed trials.
inline BenchReport run_planner_bench(const Scene& scene, std::size_t trials,
                                     double astar_voxel = 0.1, double map_resolution = 0.2) {
  if (trials == 0) throw std::invalid_argument("run_planner_bench: need at least one trial");
  scene.bounds.validate();
  scene.config.validate();
  const ObstacleMap map = scene_to_map(scene, map_resolution);
  const Trajectory reference = build_target({scene.start, scene.goal}, scene.config);

  BenchReport report;
  // Each planner is scored on the trajectory it delivers: the reduced-region
  // pipeline ships its smoothed spline, the baselines ship raw polylines.
  auto cost_of = [&](const PlanResult& result, bool smoothed) {
    const Trajectory& t = smoothed ? result.smoothed : result.path;
    if (!result.success || t.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return path_cost(t, reference).value;
  };

  // Trial 0 is the warmup: same work, rows discarded.
  for (std::size_t trial = 0; trial <= trials; ++trial) {
    const std::uint64_t seed = scene.rng_seed + std::max<std::size_t>(trial, 1);
    const bool keep = trial > 0;

    std::mt19937_64 rng_improved(seed);
    const auto improved =
        plan_improved_rrtstar(scene.start, scene.goal, map, reference, scene.config, rng_improved);
    std::mt19937_64 rng_baseline(seed);
    const auto baseline =
        plan_baseline_rrtstar(scene.start, scene.goal, map, scene.config, rng_baseline,
                              scene.bounds);
    const auto grid = plan_astar_grid(scene.start, scene.goal, map, astar_voxel, scene.bounds,
                                      scene.config.obstacle_fail_safe_dis);
    if (!keep) continue;
    report.rows.push_back({"astar", trial, seed, grid.elapsed_seconds * 1000.0,
                           cost_of(grid, false), grid.success});
    report.rows.push_back({"improved", trial, seed, improved.elapsed_seconds * 1000.0,
                           cost_of(improved, true), improved.success});
    report.rows.push_back({"rrtstar", trial, seed, baseline.elapsed_seconds * 1000.0,
                           cost_of(baseline, false), baseline.success});
  }
  for (const char* algo : {"astar", "improved", "rrtstar"})
    report.aggregates.push_back(detail::aggregate_rows(algo, report.rows));
  return report;
}

inline void write_bench_trials_csv(std::ostream& out, const BenchReport& report) {
  out << "algorithm,trial,seed,elapsed_ms,path_cost,success\n";
  for (const auto& row : report.rows) {
    out << row.algorithm << ',' << row.trial << ',' << row.seed << ','
        << format_number(row.elapsed_ms) << ',' << format_number(row.path_cost) << ','
        << (row.success ? 1 : 0) << '\n';
  }
}

inline nlohmann::json bench_summary_json(const BenchReport& report) {
  nlohmann::json j;
  j["aggregates"] = nlohmann::json::array();
  for (const auto& agg : report.aggregates) {
    nlohmann::json a;
    a["algorithm"] = agg.algorithm;
    a["trials"] = agg.trials;
    a["successes"] = agg.successes;
    a["median_ms"] = agg.median_ms;
    a["mean_ms"] = agg.mean_ms;
    a["stddev_ms"] = agg.stddev_ms;
    a["median_cost"] = std::isfinite(agg.median_cost) ? nlohmann::json(agg.median_cost)
                                                      : nlohmann::json();
    j["aggregates"].push_back(a);
  }
  j["trial_rows"] = report.rows.size();
  return j;
}

// ---------------------------------------------------------------------------
// Map insertion benchmark.

struct MapBenchRow {
  std::size_t cloud = 0;
  std::size_t points = 0;
  std::size_t inserted = 0;
  std::size_t deduplicated = 0;
  double elapsed_ms = 0.0;
};

struct HistogramBucket {
  double low_ms = 0.0;
  double high_ms = 0.0;
  std::size_t count = 0;
};

struct MapBenchReport {
  std::vector<MapBenchRow> rows;
  std::vector<HistogramBucket> histogram;
  double resolution = 0.2;
  std::size_t capacity = 10;
};

/// Clouds of points drawn uniformly from a ball, for synthetic insertion
/// benchmarks. One generator seeds the whole sequence.
inline std::vector<PointCloud> synthetic_clouds(std::size_t count, std::size_t points_per_cloud,
                                                double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("synthetic_clouds: radius must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<PointCloud> clouds(count);
  for (std::size_t c = 0; c < count; ++c) {
    clouds[c].stamp = static_cast<double>(c);
    clouds[c].points.reserve(points_per_cloud);
    for (std::size_t i = 0; i < points_per_cloud; ++i) {
      const Point3 d = detail::unit_gaussian_direction(rng);
      const double r = radius * std::cbrt(uni(rng));
      clouds[c].points.push_back(r * d);
    }
  }
  return clouds;
}

/// Inserts the clouds in order into one bounded map and reports per-cloud
/// timings with a fixed-width histogram over them.
inline MapBenchReport run_map_bench(const std::vector<PointCloud>& clouds, double resolution,
                                    std::size_t capacity = 10, std::size_t buckets = 12) {
  if (clouds.empty()) throw std::invalid_argument("run_map_bench: need at least one cloud");
  if (buckets == 0) throw std::invalid_argument("run_map_bench: need at least one bucket");
  MapBenchReport report;
  report.resolution = resolution;
  report.capacity = capacity;
  ObstacleMap map(resolution, capacity);
  for (std::size_t c = 0; c < clouds.size(); ++c) {
    const auto ins = map.insert_cloud(clouds[c]);
    report.rows.push_back(
        {c, clouds[c].points.size(), ins.inserted, ins.deduplicated, ins.elapsed_seconds * 1000.0});
  }
  double lo = report.rows.front().elapsed_ms, hi = lo;
  for (const auto& row : report.rows) {
    lo = std::min(lo, row.elapsed_ms);
    hi = std::max(hi, row.elapsed_ms);
  }
  const double width = std::max((hi - lo) / static_cast<double>(buckets), 1e-9);
  for (std::size_t b = 0; b < buckets; ++b)
    report.histogram.push_back({lo + width * static_cast<double>(b),
                                lo + width * static_cast<double>(b + 1), 0});
  for (const auto& row : report.rows) {
    auto idx = static_cast<std::size_t>((row.elapsed_ms - lo) / width);
    if (idx >= buckets) idx = buckets - 1;  // top edge lands in the last bucket
    ++report.histogram[idx].count;
  }
  return report;
}

inline void write_map_bench_csv(std::ostream& out, const MapBenchReport& report) {
  out << "cloud,points,inserted,deduplicated,elapsed_ms\n";
  for (const auto& row : report.rows) {
    out << row.cloud << ',' << row.points << ',' << row.inserted << ',' << row.deduplicated << ','
        << format_number(row.elapsed_ms) << '\n';
  }
}

inline void write_map_histogram_csv(std::ostream& out, const MapBenchReport& report) {
  out << "bucket_low_ms,bucket_high_ms,count\n";
  for (const auto& bucket : report.histogram)
    out << format_number(bucket.low_ms) << ',' << format_number(bucket.high_ms) << ','
        << bucket.count << '\n';
}

inline nlohmann::json map_bench_summary_json(const MapBenchReport& report) {
  nlohmann::json j;
  j["clouds"] = report.rows.size();
  j["resolution"] = report.resolution;
  j["capacity"] = report.capacity;
  std::size_t inserted = 0, deduplicated = 0;
  for (const auto& row : report.rows) {
    inserted += row.inserted;
    deduplicated += row.deduplicated;
  }
  j["total_inserted"] = inserted;
  j["total_deduplicated"] = deduplicated;
  j["histogram_buckets"] = report.histogram.size();
  return j;
}

}  // namespace replan
