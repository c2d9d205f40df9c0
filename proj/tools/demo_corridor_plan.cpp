// Plans through a narrow gap with all three planners and prints what each
// one delivers. Smallest end-to-end tour of the planning API.
#include <cstdio>
#include <random>

#include <replan/bench.hpp>

using namespace replan;

int main() {
  Scene scene;
  scene.bounds = {{0, 0, 0}, {8, 8, 8}};
  scene.start = {1, 4, 4};
  scene.goal = {7, 4, 4};
  scene.rng_seed = 5;
  for (double y : {2.8, 4.0, 5.2}) {
    SceneObstacle ob;
    ob.center = {4.0, y, 4.0};
    ob.radius = 0.45;
    ob.density = 160;
    scene.obstacles.push_back(ob);
  }

  const ObstacleMap map = scene_to_map(scene);
  const Trajectory reference = build_target({scene.start, scene.goal}, scene.config);

  std::mt19937_64 rng(scene.rng_seed);
  const auto improved =
      plan_improved_rrtstar(scene.start, scene.goal, map, reference, scene.config, rng);
  std::mt19937_64 rng_base(scene.rng_seed);
  const auto baseline = plan_baseline_rrtstar(scene.start, scene.goal, map, scene.config,
                                              rng_base, scene.bounds);
  const auto grid = plan_astar_grid(scene.start, scene.goal, map, 0.1, scene.bounds,
                                    scene.config.obstacle_fail_safe_dis);

  auto show = [&](const char* name, const PlanResult& r, const Trajectory& delivered) {
    if (!r.success) {
      std::printf("%-9s failed (%s)\n", name, r.status.c_str());
      return;
    }
    std::printf("%-9s %6.2f ms  %3zu waypoints  length %.3f m  cost %.4f\n", name,
                r.elapsed_seconds * 1000.0, delivered.size(), trajectory_total_length(delivered),
                path_cost(delivered, reference).value);
  };
  show("improved", improved, improved.smoothed);
  show("rrtstar", baseline, baseline.path);
  show("astar", grid, grid.path);
  return 0;
}
