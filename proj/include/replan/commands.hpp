#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "replan/bench.hpp"
#include "replan/io.hpp"
#include "replan/sim.hpp"

namespace replan {

/// Bad invocation (exit 1), as opposed to a runtime failure (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void write_text_file(const std::filesystem::path& path,
                            const std::function<void(std::ostream&)>& emit) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary keeps \n literal everywhere
  if (!out) throw std::runtime_error("cannot write " + path.string());
  emit(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

inline PlannerConfig apply_config_file(PlannerConfig base, const std::filesystem::path& file) {
  if (file.empty()) return base;
  return config_from_json(load_json_file(file), base);
}

inline nlohmann::json trajectory_rows_json(const Trajectory& traj) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : traj.waypoints) rows.push_back(point_to_json(p));
  return nlohmann::json{{"columns", {"x", "y", "z"}}, {"rows", rows}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// smooth

struct SmoothOptions {
  std::filesystem::path input;
  std::size_t samples_per_segment = 10;
  std::filesystem::path out_dir = ".";
  bool json_rows = false;
};

/// Reads a waypoint file and writes the smoothed trajectory as
/// out_dir/smoothed.csv. Output rows = (waypoints − 1) · samples_per_segment + 1.
inline int cmd_smooth(const SmoothOptions& opts, std::ostream& info = std::cout) {
  const auto waypoints = load_xyz_text(opts.input);
  if (waypoints.size() < 3)
    throw std::runtime_error(opts.input.string() + ": need at least three waypoints to smooth");
  Trajectory traj;
  traj.waypoints = waypoints;
  const Trajectory smoothed = smooth_trajectory(traj, opts.samples_per_segment);
  detail::write_text_file(opts.out_dir / "smoothed.csv",
                          [&](std::ostream& out) { write_trajectory_csv(out, smoothed); });
  if (opts.json_rows)
    detail::write_json_file(opts.out_dir / "smoothed.json", detail::trajectory_rows_json(smoothed));
  info << "smoothed " << waypoints.size() << " waypoints into " << smoothed.size() << " samples\n";
  return 0;
}

// ---------------------------------------------------------------------------
// plan

struct PlanOptions {
  std::filesystem::path scene_file;
  std::string algorithm = "improved";  // improved | rrtstar | astar
  std::filesystem::path out_dir = ".";
  std::filesystem::path config_file;
  std::optional<std::uint64_t> seed;
  double astar_voxel = 0.1;
  double map_resolution = 0.2;
  bool json_rows = false;
};

/// Plans once on a scene. Writes plan_path.csv, plan_smoothed.csv, and
/// plan_summary.json; returns 0 on a found path, 2 otherwise.
inline int cmd_plan(const PlanOptions& opts, std::ostream& info = std::cout) {
  if (opts.algorithm != "improved" && opts.algorithm != "rrtstar" && opts.algorithm != "astar")
    throw UsageError("unknown algorithm '" + opts.algorithm + "'");
  Scene scene = load_scene(opts.scene_file);
  scene.config = detail::apply_config_file(scene.config, opts.config_file);
  if (opts.seed) scene.rng_seed = *opts.seed;

  const ObstacleMap map = scene_to_map(scene, opts.map_resolution);
  const Trajectory reference = build_target({scene.start, scene.goal}, scene.config);
  std::mt19937_64 rng(scene.rng_seed);

  PlanResult result;
  if (opts.algorithm == "improved") {
    result = plan_improved_rrtstar(scene.start, scene.goal, map, reference, scene.config, rng);
  } else if (opts.algorithm == "rrtstar") {
    result = plan_baseline_rrtstar(scene.start, scene.goal, map, scene.config, rng, scene.bounds);
  } else {
    result = plan_astar_grid(scene.start, scene.goal, map, opts.astar_voxel, scene.bounds,
                             scene.config.obstacle_fail_safe_dis);
  }
  const double cost = (result.success && result.smoothed.size() >= 2)
                          ? path_cost(result.smoothed, reference).value
                          : std::numeric_limits<double>::quiet_NaN();

  detail::write_text_file(opts.out_dir / "plan_path.csv",
                          [&](std::ostream& out) { write_trajectory_csv(out, result.path); });
  detail::write_text_file(opts.out_dir / "plan_smoothed.csv",
                          [&](std::ostream& out) { write_trajectory_csv(out, result.smoothed); });
  nlohmann::json summary;
  summary["algorithm"] = opts.algorithm;
  summary["success"] = result.success;
  summary["status"] = result.status;
  summary["iterations"] = result.iterations;
  summary["elapsed_ms"] = result.elapsed_seconds * 1000.0;
  summary["path_cost"] = std::isfinite(cost) ? nlohmann::json(cost) : nlohmann::json();
  summary["path_waypoints"] = result.path.size();
  summary["smoothed_waypoints"] = result.smoothed.size();
  detail::write_json_file(opts.out_dir / "plan_summary.json", summary);
  if (opts.json_rows) {
    detail::write_json_file(opts.out_dir / "plan_path.json",
                            detail::trajectory_rows_json(result.path));
    detail::write_json_file(opts.out_dir / "plan_smoothed.json",
                            detail::trajectory_rows_json(result.smoothed));
  }
  info << opts.algorithm << ": " << result.status << " after " << result.iterations
       << " iterations\n";
  return result.success ? 0 : 2;
}

// ---------------------------------------------------------------------------
// bench-planner

struct BenchPlannerOptions {
  std::filesystem::path scene_file;       // one of scene_file ...
  std::optional<std::uint64_t> gen_seed;  // ... or gen_seed must be given
  std::size_t trials = 10;
  std::filesystem::path out_dir = ".";
  std::filesystem::path config_file;
  std::optional<std::uint64_t> seed;
  double astar_voxel = 0.1;
  double map_resolution = 0.2;
  bool json_rows = false;
};

/// Benchmarks the three planners on a scene file or a generated cluttered
/// scene. Writes bench_trials.csv and bench_summary.json.
inline int cmd_bench_planner(const BenchPlannerOptions& opts, std::ostream& info = std::cout) {
  if (opts.scene_file.empty() == !opts.gen_seed)
    throw UsageError("give exactly one of a scene file or a generator seed");
  Scene scene =
      opts.scene_file.empty() ? generate_scene(*opts.gen_seed) : load_scene(opts.scene_file);
  scene.config = detail::apply_config_file(scene.config, opts.config_file);
  if (opts.seed) scene.rng_seed = *opts.seed;
  if (opts.trials == 0) throw UsageError("trials must be positive");

  const BenchReport report =
      run_planner_bench(scene, opts.trials, opts.astar_voxel, opts.map_resolution);
  detail::write_text_file(opts.out_dir / "bench_trials.csv",
                          [&](std::ostream& out) { write_bench_trials_csv(out, report); });
  detail::write_json_file(opts.out_dir / "bench_summary.json", bench_summary_json(report));
  if (opts.json_rows) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows)
      rows.push_back({row.algorithm, row.trial, row.seed, row.elapsed_ms,
                      std::isfinite(row.path_cost) ? nlohmann::json(row.path_cost)
                                                   : nlohmann::json(),
                      row.success});
    detail::write_json_file(
        opts.out_dir / "bench_trials.json",
        nlohmann::json{{"columns", {"algorithm", "trial", "seed", "elapsed_ms", "path_cost",
                                    "success"}},
                       {"rows", rows}});
  }
  for (const auto& agg : report.aggregates)
    info << agg.algorithm << ": median " << agg.median_ms << " ms over " << agg.trials
         << " trials, " << agg.successes << " successes\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench-map

struct BenchMapOptions {
  std::filesystem::path cloud_dir;        // optional: ingest files instead of synthesizing
  std::string cloud_format = "auto";      // auto | text | binary
  std::size_t clouds = 100;
  std::size_t points_per_cloud = 10000;
  double radius = 5.0;
  double resolution = 0.2;
  std::size_t capacity = 10;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  bool json_rows = false;
};

/// Times bounded-map insertions over a cloud directory or synthetic clouds.
/// Writes map_insertions.csv, map_histogram.csv, and map_summary.json.
inline int cmd_bench_map(const BenchMapOptions& opts, std::ostream& info = std::cout) {
  if (opts.cloud_format != "auto" && opts.cloud_format != "text" && opts.cloud_format != "binary")
    throw UsageError("unknown cloud format '" + opts.cloud_format + "'");
  std::vector<PointCloud> clouds;
  if (!opts.cloud_dir.empty()) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(opts.cloud_dir))
      throw std::runtime_error(opts.cloud_dir.string() + ": not a directory");
    for (const auto& entry : std::filesystem::directory_iterator(opts.cloud_dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error(opts.cloud_dir.string() + ": no cloud files");
    for (const auto& file : files) {
      PointCloud cloud;
      if (opts.cloud_format == "binary")
        cloud.points = load_cloud_binary(file);
      else if (opts.cloud_format == "text")
        cloud.points = load_xyz_text(file);
      else
        cloud.points = load_cloud_file(file);
      cloud.stamp = static_cast<double>(clouds.size());
      clouds.push_back(std::move(cloud));
    }
  } else {
    if (opts.clouds == 0) throw UsageError("cloud count must be positive");
    clouds = synthetic_clouds(opts.clouds, opts.points_per_cloud, opts.radius, opts.seed);
  }

  const MapBenchReport report = run_map_bench(clouds, opts.resolution, opts.capacity);
  detail::write_text_file(opts.out_dir / "map_insertions.csv",
                          [&](std::ostream& out) { write_map_bench_csv(out, report); });
  detail::write_text_file(opts.out_dir / "map_histogram.csv",
                          [&](std::ostream& out) { write_map_histogram_csv(out, report); });
  detail::write_json_file(opts.out_dir / "map_summary.json", map_bench_summary_json(report));
  if (opts.json_rows) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows)
      rows.push_back({row.cloud, row.points, row.inserted, row.deduplicated, row.elapsed_ms});
    detail::write_json_file(
        opts.out_dir / "map_insertions.json",
        nlohmann::json{{"columns", {"cloud", "points", "inserted", "deduplicated", "elapsed_ms"}},
                       {"rows", rows}});
  }
  info << "inserted " << clouds.size() << " clouds at resolution " << report.resolution << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::filesystem::path scenario_file;
  std::filesystem::path out_dir = ".";
  std::filesystem::path config_file;
  std::optional<std::uint64_t> seed;
  bool json_rows = false;
};

/// Runs a closed-loop scenario. Writes sim_log.csv and sim_summary.json;
/// returns 0 when the route was completed, 2 otherwise (log still written).
inline int cmd_simulate(const SimulateOptions& opts, std::ostream& info = std::cout) {
  Scenario scenario = load_scenario(opts.scenario_file);
  scenario.config = detail::apply_config_file(scenario.config, opts.config_file);
  if (opts.seed) {
    scenario.rng_seed = *opts.seed;
    scenario.config.rng_seed = *opts.seed;
  }
  const SimLog log = run_simulation(scenario);
  detail::write_text_file(opts.out_dir / "sim_log.csv",
                          [&](std::ostream& out) { write_simlog_csv(out, log); });
  detail::write_json_file(opts.out_dir / "sim_summary.json", simlog_summary_json(log));
  if (opts.json_rows) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& rec : log.ticks)
      rows.push_back({rec.tick, rec.time, rec.pose.position.x, rec.pose.position.y,
                      rec.pose.position.z, rec.pose.yaw, rec.velocity.x, rec.velocity.y,
                      rec.velocity.z, rec.yaw_rate, to_string(rec.mode), rec.replan_count});
    detail::write_json_file(
        opts.out_dir / "sim_log.json",
        nlohmann::json{{"columns", {"tick", "time", "px", "py", "pz", "yaw", "vx", "vy", "vz",
                                    "yaw_rate", "mode", "replans"}},
                       {"rows", rows}});
  }
  info << "outcome: " << log.outcome << " after " << log.ticks.size() << " ticks, "
       << log.replan_count << " replans\n";
  return log.completed ? 0 : 2;
}

}  // namespace replan
