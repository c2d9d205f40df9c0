// Release gate for the toolkit. Each criterion prints exactly one PASS/FAIL
// line; run with a criterion number to check just that one, or with no
// arguments for the whole list. Exit code is the number of failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <replan/bench.hpp>
#include <replan/commands.hpp>
#include <replan/sim.hpp>

#include "support/oracles.hpp"

using namespace replan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome& out;
  // Fails the criterion and keeps only the first failure message.
  void require(bool ok, const std::string& why) {
    if (ok || !out.pass) return;
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = why;
    }
  }
  void note(const std::string& text) {
    if (out.pass) out.detail = text;
  }
};

fs::path scenes_root() { return fs::path(REPLAN_SCENES_DIR); }

fs::path scratch_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("replan_acceptance_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const BenchAggregate& aggregate_for(const BenchReport& report, const std::string& algo) {
  for (const auto& agg : report.aggregates)
    if (agg.algorithm == algo) return agg;
  throw std::logic_error("missing aggregate " + algo);
}

// Criteria 1 and 2 read the same benchmark; cache it across both.
const BenchReport& reference_bench() {
  static const BenchReport report = [] {
    const Scene scene = load_scene(scenes_root() / "reference_cluttered.json");
    return run_planner_bench(scene, 10, 0.1, 0.2);
  }();
  return report;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// 1. On the reference scene the reduced-region planner must be the fastest of
// the three by median, with at least 5x headroom over the uniform baseline.
Outcome criterion_speed_ordering() {
  Outcome out;
  Check check{out};
  const auto& report = reference_bench();
  const auto& improved = aggregate_for(report, "improved");
  const auto& rrtstar = aggregate_for(report, "rrtstar");
  const auto& astar = aggregate_for(report, "astar");
  check.require(improved.successes == improved.trials, "improved planner had failed trials");
  check.require(improved.median_ms < rrtstar.median_ms,
                "improved median " + fmt(improved.median_ms) + " ms not below baseline " +
                    fmt(rrtstar.median_ms) + " ms");
  check.require(improved.median_ms < astar.median_ms,
                "improved median " + fmt(improved.median_ms) + " ms not below grid search " +
                    fmt(astar.median_ms) + " ms");
  check.require(rrtstar.median_ms >= 5.0 * improved.median_ms,
                "speedup over baseline only " + fmt(rrtstar.median_ms / improved.median_ms, 2) +
                    "x, need 5x");
  check.note("medians improved " + fmt(improved.median_ms, 2) + " ms, astar " +
             fmt(astar.median_ms, 2) + " ms, rrtstar " + fmt(rrtstar.median_ms, 2) + " ms (" +
             fmt(rrtstar.median_ms / improved.median_ms, 1) + "x)");
  return out;
}

// 2. Median smoothness cost: improved below the uniform baseline, and inside
// the documented absolute band.
Outcome criterion_cost_ordering() {
  Outcome out;
  Check check{out};
  const auto& report = reference_bench();
  const auto& improved = aggregate_for(report, "improved");
  const auto& rrtstar = aggregate_for(report, "rrtstar");
  check.require(std::isfinite(improved.median_cost) && std::isfinite(rrtstar.median_cost),
                "missing cost medians");
  check.require(improved.median_cost < rrtstar.median_cost,
                "improved median cost " + fmt(improved.median_cost) + " not below baseline " +
                    fmt(rrtstar.median_cost));
  check.require(improved.median_cost <= 1.05,
                "improved median cost " + fmt(improved.median_cost) + " above 1.05");
  check.require(improved.median_cost >= 0.63 && improved.median_cost <= 1.15,
                "improved median cost " + fmt(improved.median_cost) + " outside [0.63, 1.15]");
  check.note("median costs improved " + fmt(improved.median_cost) + " < rrtstar " +
             fmt(rrtstar.median_cost));
  return out;
}

// 3. Span-matrix curve weights against the recursive basis definition.
Outcome criterion_bspline_oracle() {
  Outcome out;
  Check check{out};
  std::mt19937_64 rng(301);
  std::uniform_real_distribution<double> step(0.1, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 0.999);
  double worst = 0.0;
  for (int trial = 0; trial < 1000 && out.pass; ++trial) {
    KnotVector kv;
    const bool clamped = trial % 2 == 1;
    if (clamped) {
      kv.knots.assign(3, 0.0);
      double t = 0.0;
      for (int i = 0; i < 5; ++i) kv.knots.push_back(t += step(rng));
      kv.knots.insert(kv.knots.end(), 3, t);
    } else {
      double t = 0.0;
      for (int i = 0; i < 9; ++i) kv.knots.push_back(t += step(rng));
    }
    // The recursive table defines weight i - 2 + c only while every knot up to
    // index i + 3 exists, so stay clear of both ends of the vector.
    std::vector<std::size_t> spans;
    for (std::size_t i = 2; i + 4 <= kv.knots.size(); ++i)
      if (kv.knots[i + 1] > kv.knots[i]) spans.push_back(i);
    const std::size_t i = spans[rng() % spans.size()];
    const double u = unit(rng);
    const double t = kv.knots[i] + u * (kv.knots[i + 1] - kv.knots[i]);
    const auto weights = basis_matrix(i, kv).weights(u);
    for (std::size_t c = 0; c < 3; ++c) {
      const double ref = oracles::bspline_basis_table(i - 2 + c, 3, t, kv.knots);
      worst = std::max(worst, std::abs(weights[c] - ref));
      check.require(std::abs(weights[c] - ref) <= 1e-9,
                    "weight " + std::to_string(c) + " off by " + fmt(weights[c] - ref, 12) +
                        " on trial " + std::to_string(trial));
    }
  }
  KnotVector uniform;
  for (int i = 0; i <= 8; ++i) uniform.knots.push_back(static_cast<double>(i));
  const auto bm = basis_matrix(4, uniform);
  const double expected[3][3] = {{0.5, 0.5, 0.0}, {-1.0, 1.0, 0.0}, {0.5, -1.0, 0.5}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      check.require(std::abs(bm.m[r][c] - expected[r][c]) <= 1e-12,
                    "uniform matrix entry (" + std::to_string(r) + "," + std::to_string(c) +
                        ") is " + fmt(bm.m[r][c], 15));
  check.note("1000 random knot vectors, worst weight error " + fmt(worst, 15));
  return out;
}

// 4. Region sampling: containment, octant balance, radial distribution.
Outcome criterion_sampler() {
  Outcome out;
  Check check{out};
  const std::size_t n = 10000;

  const auto region = build_region({1, 5, 5}, {9, 4, 6}, 4.0);
  std::mt19937_64 rng(401);
  const auto batch = sample_free(region, n, rng);
  check.require(batch.complete && batch.points.size() == n, "sampler did not fill the batch");
  std::size_t octants[8] = {0};
  for (const auto& p : batch.points) {
    check.require(quadratic_form(region, p) <= 1.0 + 1e-9, "sample escaped the region");
    const Point3 d = p - region.center;
    const Eigen::Vector3d body = region.rotation.transpose() * Eigen::Vector3d(d.x, d.y, d.z);
    const int idx = (body.x() > 0 ? 1 : 0) | (body.y() > 0 ? 2 : 0) | (body.z() > 0 ? 4 : 0);
    ++octants[idx];
  }
  const double expect = static_cast<double>(n) / 8.0;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < 8; ++b)
    chi2 += (octants[b] - expect) * (octants[b] - expect) / expect;
  // Chi-squared, 7 degrees of freedom, alpha 0.001.
  check.require(chi2 < 24.322, "octant chi-squared " + fmt(chi2, 2) + " rejects uniformity");

  const auto ball = ball_region({0, 0, 0}, 1.0);
  std::mt19937_64 rng_ball(402);
  const auto ball_batch = sample_free(ball, n, rng_ball);
  std::size_t inner = 0;
  for (const auto& p : ball_batch.points)
    if (norm(p) <= 0.5) ++inner;
  const double frac = static_cast<double>(inner) / static_cast<double>(n);
  check.require(std::abs(frac - 0.125) <= 0.02,
                "P(r <= R/2) = " + fmt(frac) + ", expected 0.125 within 0.02");
  check.note("containment 10000/10000, chi-squared " + fmt(chi2, 2) + ", P(r <= R/2) " +
             fmt(frac, 4));
  return out;
}

// 5. Direction-alignment rotations are orthonormal, proper, and on target.
Outcome criterion_rotation() {
  Outcome out;
  Check check{out};
  std::mt19937_64 rng(501);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10000 && out.pass; ++trial) {
    Eigen::Vector3d p(gauss(rng), gauss(rng), gauss(rng));
    if (p.norm() < 1e-6) continue;
    const Eigen::Matrix3d r = rotation_align(p);
    const double ortho = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    const double det = std::abs(r.determinant() - 1.0);
    const double aim = (r * Eigen::Vector3d::UnitZ() - p.normalized()).norm();
    worst = std::max({worst, ortho, det, aim});
    check.require(ortho <= 1e-9, "R R^T drifts from identity by " + fmt(ortho, 12));
    check.require(det <= 1e-9, "determinant off by " + fmt(det, 12));
    check.require(aim <= 1e-9, "rotated z misses the direction by " + fmt(aim, 12));
  }
  const Eigen::Matrix3d at_z = rotation_align(Eigen::Vector3d::UnitZ());
  check.require((at_z - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0,
                "+z direction must map to the identity");
  const Eigen::Matrix3d at_neg = rotation_align(-Eigen::Vector3d::UnitZ());
  Eigen::Matrix3d half_turn;
  half_turn << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  check.require((at_neg - half_turn).cwiseAbs().maxCoeff() == 0.0,
                "-z direction must map to the fixed half-turn about x");
  check.require(std::abs(at_neg.trace() + 1.0) <= 1e-12, "half-turn trace must be -1");
  check.note("10000 directions, worst deviation " + fmt(worst, 15));
  return out;
}

// 6. Bending-energy gradient against the dense operator and finite
// differences.
Outcome criterion_gradient() {
  Outcome out;
  Check check{out};
  std::mt19937_64 rng(601);
  std::uniform_real_distribution<double> coord(-4.0, 4.0);
  std::uniform_int_distribution<std::size_t> length(3, 24);
  double worst_dense = 0.0, worst_fd = 0.0;
  for (int trial = 0; trial < 100 && out.pass; ++trial) {
    Trajectory traj;
    const std::size_t n = length(rng);
    for (std::size_t i = 0; i < n; ++i)
      traj.waypoints.push_back({coord(rng), coord(rng), coord(rng)});
    const auto grad = path_energy_gradient(traj);

    const auto dense = oracles::dense_second_difference(n);
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> q(n);
      for (std::size_t i = 0; i < n; ++i)
        q[i] = axis == 0 ? traj.waypoints[i].x : axis == 1 ? traj.waypoints[i].y
                                                           : traj.waypoints[i].z;
      for (std::size_t i = 0; i < n; ++i) {
        double aq = 0.0;
        for (std::size_t j = 0; j < n; ++j) aq += dense[i][j] * q[j];
        const double g = axis == 0 ? grad[i].x : axis == 1 ? grad[i].y : grad[i].z;
        worst_dense = std::max(worst_dense, std::abs(g - aq));
        check.require(std::abs(g - aq) <= 1e-9, "gradient disagrees with the dense operator");
      }
    }

    const double h = 1e-6;
    for (std::size_t i = 0; i < n; ++i)
      for (int axis = 0; axis < 3; ++axis) {
        auto shifted = [&](double delta) {
          Trajectory t2 = traj;
          if (axis == 0)
            t2.waypoints[i].x += delta;
          else if (axis == 1)
            t2.waypoints[i].y += delta;
          else
            t2.waypoints[i].z += delta;
          return 0.5 * path_energy(t2);
        };
        const double fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        const double g = axis == 0 ? grad[i].x : axis == 1 ? grad[i].y : grad[i].z;
        worst_fd = std::max(worst_fd, std::abs(g - fd));
        check.require(std::abs(g - fd) <= 1e-6, "gradient disagrees with finite differences");
      }
  }
  check.note("100 random paths, worst dense error " + fmt(worst_dense, 15) + ", worst fd error " +
             fmt(worst_fd, 10));
  return out;
}

// 7. Spatial queries against linear scans over the stored points.
Outcome criterion_map_queries() {
  Outcome out;
  Check check{out};
  std::mt19937_64 rng(701);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> clear(0.05, 1.5);
  std::uniform_int_distribution<std::size_t> count(1, 2000);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int m = 0; m < 200 && out.pass; ++m) {
    ObstacleMap map(0.05, 4);
    PointCloud cloud;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i)
      cloud.points.push_back({coord(rng), coord(rng), coord(rng)});
    map.insert_cloud(cloud);
    const auto stored = map.all_points();

    for (int q = 0; q < 10; ++q) {
      const Point3 probe{coord(rng), coord(rng), coord(rng)};
      const auto hit = map.nearest_obstacle(probe);
      check.require(hit.has_value(), "nearest query came back empty on a populated map");
      if (!hit) break;
      const double ref = oracles::brute_nearest_distance(stored, probe);
      worst = std::max(worst, std::abs(hit->dist - ref));
      check.require(std::abs(hit->dist - ref) <= 1e-9,
                    "nearest distance off by " + fmt(hit->dist - ref, 12));

      const Point3 a{coord(rng), coord(rng), coord(rng)};
      const Point3 b{coord(rng), coord(rng), coord(rng)};
      const double safe = clear(rng);
      const bool fast = map.segment_collision_free(a, b, safe);
      const bool ref_free = oracles::brute_segment_distance(stored, a, b) >= safe;
      check.require(fast == ref_free, "segment query disagrees with the linear scan");
      ++checked;
    }
  }
  check.note(std::to_string(checked) + " probe pairs over 200 maps, worst nearest error " +
             fmt(worst, 15));
  return out;
}

// 8. Shipped closed-loop scenarios stay clear of obstacles and the free-space
// run flies cleanly.
Outcome criterion_sim_safety() {
  Outcome out;
  Check check{out};
  const fs::path root = scenes_root() / "scenarios";
  for (const char* name : {"obstacle_free.json", "static_wall.json", "dynamic_crossing.json"}) {
    const Scenario sc = load_scenario(root / name);
    const SimLog log = run_simulation(sc);
    const double bound = sc.config.obstacle_fail_safe_dis - sc.mav.speed / sc.tick_hz;
    check.require(log.completed, std::string(name) + " ended " + log.outcome);
    check.require(log.min_obstacle_distance >= bound,
                  std::string(name) + " min distance " + fmt(log.min_obstacle_distance) +
                      " below bound " + fmt(bound));
    if (std::string(name) == "obstacle_free.json") {
      check.require(log.replan_count == 0, "free run replanned");
      check.require(std::isfinite(log.flown_cost_vs_target) && log.flown_cost_vs_target < 1.0,
                    "free run cost " + fmt(log.flown_cost_vs_target) + " not below 1.0");
    } else {
      check.require(log.replan_count >= 1, std::string(name) + " never replanned");
    }
  }
  check.note("all three scenarios complete and keep the clearance bound");
  return out;
}

// 9. Re-running the benchmark and the simulator with the same seeds must
// reproduce their CSV outputs. Timing columns are wall-clock measurements, so
// the benchmark comparison masks exactly the elapsed_ms column; every other
// byte must match. The simulation log contains no timings and must be
// byte-identical.
Outcome criterion_determinism() {
  Outcome out;
  Check check{out};
  const auto dir = scratch_dir("determinism");
  std::ostringstream discard;

  BenchPlannerOptions bench;
  bench.scene_file = scenes_root() / "reference_cluttered.json";
  bench.trials = 10;
  bench.out_dir = dir / "bench_a";
  cmd_bench_planner(bench, discard);
  bench.out_dir = dir / "bench_b";
  cmd_bench_planner(bench, discard);
  auto mask_elapsed = [](const std::string& text) {
    std::istringstream in(text);
    std::string line, outp;
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::istringstream row(line);
      std::string col;
      while (std::getline(row, col, ',')) cols.push_back(col);
      if (cols.size() == 6) cols[3] = "-";
      for (std::size_t i = 0; i < cols.size(); ++i) outp += (i ? "," : "") + cols[i];
      outp += '\n';
    }
    return outp;
  };
  const std::string bench_a = slurp(dir / "bench_a" / "bench_trials.csv");
  const std::string bench_b = slurp(dir / "bench_b" / "bench_trials.csv");
  check.require(mask_elapsed(bench_a) == mask_elapsed(bench_b),
                "benchmark rows differ beyond the elapsed_ms column");

  SimulateOptions sim;
  sim.scenario_file = scenes_root() / "scenarios" / "static_wall.json";
  sim.out_dir = dir / "sim_a";
  cmd_simulate(sim, discard);
  sim.out_dir = dir / "sim_b";
  cmd_simulate(sim, discard);
  check.require(slurp(dir / "sim_a" / "sim_log.csv") == slurp(dir / "sim_b" / "sim_log.csv"),
                "simulation logs differ between identical runs");
  check.note("sim log byte-identical; bench rows identical outside wall-clock elapsed_ms");
  fs::remove_all(dir);
  return out;
}

// 10. Insertion benchmark at full scale, checked against the windowed voxel
// replay.
Outcome criterion_map_bench() {
  Outcome out;
  Check check{out};
  const std::size_t clouds = 100, points = 10000;
  const auto input = synthetic_clouds(clouds, points, 5.0, 1001);
  const auto report = run_map_bench(input, 0.2, 10);
  check.require(report.rows.size() == clouds, "expected one timing row per cloud");

  std::vector<std::vector<Point3>> raw;
  raw.reserve(clouds);
  for (const auto& c : input) raw.push_back(c.points);
  const auto replay = oracles::voxel_hash_windowed(raw, 0.2, 10);
  for (std::size_t c = 0; c < clouds && out.pass; ++c) {
    check.require(report.rows[c].inserted == replay.reports[c].first,
                  "cloud " + std::to_string(c) + " inserted count mismatch");
    check.require(report.rows[c].deduplicated == replay.reports[c].second,
                  "cloud " + std::to_string(c) + " dedup count mismatch");
    check.require(report.rows[c].points == points, "cloud size column wrong");
  }
  std::size_t binned = 0;
  for (const auto& bucket : report.histogram) binned += bucket.count;
  check.require(binned == clouds, "histogram counts sum to " + std::to_string(binned));
  std::size_t survivors = 0;
  for (const auto& row : report.rows) survivors += row.inserted;
  check.note(std::to_string(clouds) + " clouds of " + std::to_string(points) +
             " points, dedup matches the replay, " + std::to_string(survivors) +
             " total survivors");
  return out;
}

struct Criterion {
  int number;
  const char* label;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "planner speed ordering", criterion_speed_ordering},
      {2, "path cost ordering", criterion_cost_ordering},
      {3, "curve basis oracle", criterion_bspline_oracle},
      {4, "region sampling", criterion_sampler},
      {5, "rotation alignment", criterion_rotation},
      {6, "energy gradient", criterion_gradient},
      {7, "map query oracle", criterion_map_queries},
      {8, "closed-loop safety", criterion_sim_safety},
      {9, "seeded determinism", criterion_determinism},
      {10, "insertion benchmark", criterion_map_bench},
  };
  return all;
}

int run_one(const Criterion& c) {
  Outcome out;
  try {
    out = c.run();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  std::printf("criterion %2d (%s): %s%s%s\n", c.number, c.label, out.pass ? "PASS" : "FAIL",
              out.detail.empty() ? "" : " - ", out.detail.c_str());
  std::fflush(stdout);
  return out.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    const int wanted = std::atoi(argv[1]);
    for (const auto& c : criteria())
      if (c.number == wanted) return run_one(c);
    std::fprintf(stderr, "no criterion %s\n", argv[1]);
    return 2;
  }
  int failures = 0;
  for (const auto& c : criteria()) failures += run_one(c);
  return failures;
}
