// Flies a straight corridor while a sphere drifts across it, printing one
// status line per simulated second. Smallest tour of the closed-loop API.
#include <cstdio>

#include <replan/sim.hpp>

using namespace replan;

int main() {
  Scenario sc;
  sc.waypoints = {{0, 0, 0}, {12, 0, 0}};
  SphereObstacle crossing;
  crossing.center = {6.5, 5.0, 0.0};
  crossing.velocity = {0.0, -0.8, 0.0};
  crossing.radius = 0.4;
  sc.obstacles.push_back(crossing);
  sc.mav.start.position = {0, 0, 0};
  sc.duration_s = 90.0;
  sc.config.waypoint_reached_delta = 0.05;

  const SimLog log = run_simulation(sc);
  std::size_t next_report = 0;
  for (const auto& rec : log.ticks) {
    if (rec.tick < next_report) continue;
    next_report += static_cast<std::size_t>(sc.tick_hz);
    std::printf("t=%5.1f s  pos (%6.2f %6.2f %6.2f)  %-9s replans %d\n", rec.time,
                rec.pose.position.x, rec.pose.position.y, rec.pose.position.z,
                to_string(rec.mode), rec.replan_count);
  }
  std::printf("outcome: %s after %zu ticks, %d replans (%d failed)\n", log.outcome.c_str(),
              log.ticks.size(), log.replan_count, log.failed_replans);
  if (log.completed)
    std::printf("closest obstacle pass %.3f m, flown cost vs target %.4f\n",
                log.min_obstacle_distance, log.flown_cost_vs_target);
  return 0;
}
