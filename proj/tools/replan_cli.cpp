// Command-line front end: smooth, plan, bench-planner, bench-map, simulate.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "replan/commands.hpp"

namespace {

struct SeedFlag {
  std::optional<std::uint64_t> value;
};

void add_seed(CLI::App* app, SeedFlag& seed) {
  app->add_option_function<std::uint64_t>(
         "--seed", [&seed](std::uint64_t v) { seed.value = v; },
         "Override every seed the command uses");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local trajectory replanning toolkit"};
  app.require_subcommand(1);

  replan::SmoothOptions smooth;
  auto* smooth_cmd = app.add_subcommand("smooth", "Smooth a waypoint file into a trajectory CSV");
  smooth_cmd->add_option("input", smooth.input, "Waypoint file (x y z per line)")->required();
  smooth_cmd->add_option("--samples-per-segment", smooth.samples_per_segment,
                         "Curve samples per waypoint span");
  smooth_cmd->add_option("--out-dir", smooth.out_dir, "Output directory");

  replan::PlanOptions plan;
  SeedFlag plan_seed;
  auto* plan_cmd = app.add_subcommand("plan", "Run one planner on a scene file");
  plan_cmd->add_option("scene", plan.scene_file, "Scene JSON file")->required();
  plan_cmd->add_option("--algo", plan.algorithm, "improved, rrtstar, or astar");
  plan_cmd->add_option("--out-dir", plan.out_dir, "Output directory");
  plan_cmd->add_option("--config", plan.config_file, "Planner config overrides (JSON)");
  add_seed(plan_cmd, plan_seed);
  plan_cmd->add_option("--astar-voxel", plan.astar_voxel, "Grid voxel edge for astar");
  plan_cmd->add_option("--map-resolution", plan.map_resolution, "Obstacle map voxel size");

  replan::BenchPlannerOptions bench;
  SeedFlag bench_seed;
  std::optional<std::uint64_t> gen_seed;
  auto* bench_cmd = app.add_subcommand("bench-planner", "Time the three planners on one scene");
  bench_cmd->add_option("--scene", bench.scene_file, "Scene JSON file");
  bench_cmd->add_option("--gen-seed", gen_seed, "Generate a cluttered scene from this seed");
  bench_cmd->add_option("--trials", bench.trials, "Timed trials per planner");
  bench_cmd->add_option("--out-dir", bench.out_dir, "Output directory");
  bench_cmd->add_option("--config", bench.config_file, "Planner config overrides (JSON)");
  add_seed(bench_cmd, bench_seed);
  bench_cmd->add_option("--astar-voxel", bench.astar_voxel, "Grid voxel edge for astar");
  bench_cmd->add_option("--map-resolution", bench.map_resolution, "Obstacle map voxel size");

  replan::BenchMapOptions bench_map;
  auto* map_cmd = app.add_subcommand("bench-map", "Time bounded-map point cloud insertions");
  map_cmd->add_option("--cloud-dir", bench_map.cloud_dir, "Ingest cloud files from this directory");
  map_cmd->add_option("--cloud-format", bench_map.cloud_format,
                      "Cloud file layout: auto, text, or binary");
  map_cmd->add_option("--clouds", bench_map.clouds, "Synthetic cloud count");
  map_cmd->add_option("--points", bench_map.points_per_cloud, "Points per synthetic cloud");
  map_cmd->add_option("--radius", bench_map.radius, "Synthetic cloud ball radius (m)");
  map_cmd->add_option("--resolution", bench_map.resolution, "Deduplication voxel size (m)");
  map_cmd->add_option("--capacity", bench_map.capacity, "Cloud history length");
  map_cmd->add_option("--seed", bench_map.seed, "Synthetic cloud seed");
  map_cmd->add_option("--out-dir", bench_map.out_dir, "Output directory");

  replan::SimulateOptions sim;
  SeedFlag sim_seed;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a closed-loop scenario");
  sim_cmd->add_option("scenario", sim.scenario_file, "Scenario JSON file")->required();
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory");
  sim_cmd->add_option("--config", sim.config_file, "Planner config overrides (JSON)");
  add_seed(sim_cmd, sim_seed);

  // Shared output format switch: CSV is always written; json adds row dumps.
  std::string format = "csv";
  for (auto* sub : {smooth_cmd, plan_cmd, bench_cmd, map_cmd, sim_cmd})
    sub->add_option("--format", format, "csv (default) or json (adds JSON row dumps)")
        ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the parse error
    return 1;
  }

  const bool json_rows = format == "json";
  try {
    if (*smooth_cmd) {
      smooth.json_rows = json_rows;
      return replan::cmd_smooth(smooth);
    }
    if (*plan_cmd) {
      plan.json_rows = json_rows;
      plan.seed = plan_seed.value;
      return replan::cmd_plan(plan);
    }
    if (*bench_cmd) {
      bench.json_rows = json_rows;
      bench.seed = bench_seed.value;
      bench.gen_seed = gen_seed;
      return replan::cmd_bench_planner(bench);
    }
    if (*map_cmd) {
      bench_map.json_rows = json_rows;
      return replan::cmd_bench_map(bench_map);
    }
    if (*sim_cmd) {
      sim.json_rows = json_rows;
      sim.seed = sim_seed.value;
      return replan::cmd_simulate(sim);
    }
  } catch (const replan::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
