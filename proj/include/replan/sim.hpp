#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "replan/core.hpp"
#include "replan/estimator.hpp"
#include "replan/path_cost.hpp"
#include "replan/planners.hpp"

namespace replan {

/// Spherical obstacle rendered as surface points. A zero velocity makes it
/// static; otherwise the center drifts linearly with time.
struct SphereObstacle {
  Point3 center;
  double radius = 0.5;
  std::size_t density = 120;
  Point3 velocity{0.0, 0.0, 0.0};
};

struct MavModel {
  Pose start;
  double speed = 1.0;  // commanded ground speed, m/s
};

/// Closed-loop run description: a sparse route, the obstacles along it, the
/// vehicle, and the planner settings shared by every replan attempt.
struct Scenario {
  std::vector<Point3> waypoints;
  std::vector<SphereObstacle> obstacles;
  std::vector<PointCloud> static_clouds;  // pre-sampled fixed geometry
  MavModel mav;
  PlannerConfig config;
  double tick_hz = 15.0;
  double duration_s = 60.0;
  double sensor_range = 5.0;
  double map_resolution = 0.2;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (waypoints.size() < 2)
      throw std::invalid_argument("Scenario: need at least two route waypoints");
    for (const auto& w : waypoints)
      if (!is_finite(w)) throw std::invalid_argument("Scenario: non-finite waypoint");
    if (!(tick_hz > 0.0)) throw std::invalid_argument("Scenario: tick_hz must be positive");
    if (!(duration_s > 0.0)) throw std::invalid_argument("Scenario: duration_s must be positive");
    if (!(sensor_range > 0.0)) throw std::invalid_argument("Scenario: sensor_range must be positive");
    if (!(map_resolution > 0.0))
      throw std::invalid_argument("Scenario: map_resolution must be positive");
    if (!(mav.speed > 0.0)) throw std::invalid_argument("Scenario: speed must be positive");
    if (!is_finite(mav.start.position) || !std::isfinite(mav.start.yaw))
      throw std::invalid_argument("Scenario: non-finite start pose");
    for (const auto& ob : obstacles) {
      if (!(ob.radius > 0.0)) throw std::invalid_argument("Scenario: obstacle radius must be positive");
      if (ob.density == 0) throw std::invalid_argument("Scenario: obstacle density must be positive");
      if (!is_finite(ob.center) || !is_finite(ob.velocity))
        throw std::invalid_argument("Scenario: non-finite obstacle");
    }
    for (const auto& cloud : static_clouds)
      for (const auto& p : cloud.points)
        if (!is_finite(p)) throw std::invalid_argument("Scenario: non-finite cloud point");
    config.validate();
  }
};

/// All obstacle surface points at time t. Surface offsets are drawn once per
/// obstacle from a seed derived from (rng_seed, obstacle index), so repeated
/// calls return identical offsets and moving obstacles translate rigidly.
inline PointCloud obstacle_cloud_at(const Scenario& scenario, double t) {
  PointCloud cloud;
  cloud.stamp = t;
  for (std::size_t i = 0; i < scenario.obstacles.size(); ++i) {
    const auto& ob = scenario.obstacles[i];
    std::seed_seq seq{static_cast<std::uint32_t>(scenario.rng_seed),
                      static_cast<std::uint32_t>(scenario.rng_seed >> 32),
                      static_cast<std::uint32_t>(i + 1)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Point3 center = ob.center + t * ob.velocity;
    for (std::size_t s = 0; s < ob.density; ++s) {
      double x = gauss(rng), y = gauss(rng), z = gauss(rng);
      double n = std::sqrt(x * x + y * y + z * z);
      if (n < 1e-12) {
        x = 1.0; y = 0.0; z = 0.0; n = 1.0;
      }
      cloud.points.push_back({center.x + ob.radius * x / n, center.y + ob.radius * y / n,
                              center.z + ob.radius * z / n});
    }
  }
  for (const auto& fixed : scenario.static_clouds)
    cloud.points.insert(cloud.points.end(), fixed.points.begin(), fixed.points.end());
  return cloud;
}

/// Velocity and yaw-rate command steering toward a point. Yaw chases the
/// direction of travel with gain k_yaw, clamped to max_yaw_rate.
struct FollowerCommand {
  Point3 velocity{0.0, 0.0, 0.0};
  double yaw_rate = 0.0;
};

inline FollowerCommand follow_command(const Pose& pose, const Point3& toward, double speed,
                                      double k_yaw = 1.5, double max_yaw_rate = 1.0) {
  FollowerCommand cmd;
  const Point3 dir = toward - pose.position;
  const double len = norm(dir);
  if (len < 1e-9) return cmd;
  cmd.velocity = (speed / len) * dir;
  const double yaw_err = normalize_yaw(std::atan2(dir.y, dir.x) - pose.yaw);
  cmd.yaw_rate = std::clamp(k_yaw * yaw_err, -max_yaw_rate, max_yaw_rate);
  return cmd;
}

enum class TickMode { following, hovering, done, stuck };

inline const char* to_string(TickMode mode) {
  switch (mode) {
    case TickMode::following: return "following";
    case TickMode::hovering: return "hovering";
    case TickMode::done: return "done";
    case TickMode::stuck: return "stuck";
  }
  return "unknown";
}

struct TickRecord {
  std::size_t tick = 0;
  double time = 0.0;
  Pose pose;
  Point3 velocity{0.0, 0.0, 0.0};
  double yaw_rate = 0.0;
  TickMode mode = TickMode::following;
  std::size_t replan_count = 0;  // cumulative successful replans
};

struct SimLog {
  std::vector<TickRecord> ticks;
  Trajectory flown;
  Trajectory target;
  bool completed = false;
  std::string outcome;  // "completed", "stuck", or "timeout"
  std::size_t replan_count = 0;
  std::size_t failed_replans = 0;
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  double flown_cost_vs_target = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> replan_seconds;
};

namespace detail {

// True when the leg from the vehicle through every window waypoint keeps the
// given clearance.
inline bool window_clear(const Point3& position, const Trajectory& window, const ObstacleMap& map,
                         double clearance) {
  if (window.empty()) return true;
  if (!map.segment_collision_free(position, window.front(), clearance)) return false;
  for (std::size_t i = 1; i < window.size(); ++i)
    if (!map.segment_collision_free(window.waypoints[i - 1], window.waypoints[i], clearance))
      return false;
  return true;
}

}  // namespace detail

/// Replan attempts abandoned as hopeless after this many consecutive failures.
inline constexpr std::size_t kStuckAfterFailures = 60;

/// Closed-loop run: sense, maintain the sliding window, hover-and-replan when
/// the window is threatened, otherwise chase the window front at fixed speed.
/// Everything except the reported replan latencies is deterministic in the
/// scenario.
inline SimLog run_simulation(const Scenario& scenario) {
  scenario.validate();
  SimLog log;
  const double dt = 1.0 / scenario.tick_hz;
  const auto max_ticks =
      static_cast<std::size_t>(std::ceil(scenario.duration_s * scenario.tick_hz));

  ObstacleMap map(scenario.map_resolution, 10);
  log.target = build_target(scenario.waypoints, scenario.config);

  EstimatorState state;
  auto halves = split_target(log.target, scenario.config.replanning_dis);
  state.t_online = std::move(halves.first);
  state.t_rest = std::move(halves.second);
  state.replanning_dis = scenario.config.replanning_dis;
  state.delta = scenario.config.waypoint_reached_delta;

  Pose pose = scenario.mav.start;
  std::mt19937_64 planner_rng(scenario.config.rng_seed);
  std::size_t consecutive_failures = 0;
  log.flown.waypoints.push_back(pose.position);

  auto push_flown = [&](const Point3& p) {
    if (distance(log.flown.waypoints.back(), p) > 1e-12) log.flown.waypoints.push_back(p);
  };

  for (std::size_t tick = 0; tick < max_ticks; ++tick) {
    const double t = static_cast<double>(tick) * dt;
    const PointCloud sensed =
        crop_sphere(obstacle_cloud_at(scenario, t), pose.position, scenario.sensor_range);
    // Empty scans still enter the history so stale clouds age out.
    map.insert_cloud(sensed);
    if (const auto near = map.nearest_obstacle(pose.position))
      log.min_obstacle_distance = std::min(log.min_obstacle_distance, near->dist);

    state.p_current = pose;
    state = consume_reached(std::move(state));
    state = refill_online(std::move(state));

    TickRecord rec;
    rec.tick = tick;
    rec.time = t;

    if (state.t_online.empty()) {
      log.completed = true;
      rec.pose = pose;
      rec.mode = TickMode::done;
      rec.replan_count = log.replan_count;
      log.ticks.push_back(rec);
      break;
    }

    const bool threatened =
        needs_replan(pose, map, scenario.config.obs_avoid_dis) &&
        !detail::window_clear(pose.position, state.t_online, map,
                              scenario.config.obstacle_fail_safe_dis);
    if (threatened) {
      // The vehicle holds still for the whole planning tick.
      rec.pose = pose;
      rec.mode = TickMode::hovering;
      const auto result = plan_improved_rrtstar(pose.position, state.t_online.back(), map,
                                                state.t_online, scenario.config, planner_rng);
      log.replan_seconds.push_back(result.elapsed_seconds);
      if (result.success) {
        ++log.replan_count;
        consecutive_failures = 0;
        state = replace_online(std::move(state), result.path,
                               scenario.config.goal_tolerance + 1e-9);
      } else {
        ++log.failed_replans;
        ++consecutive_failures;
        if (consecutive_failures >= kStuckAfterFailures) {
          rec.mode = TickMode::stuck;
          rec.replan_count = log.replan_count;
          log.ticks.push_back(rec);
          break;
        }
      }
      rec.replan_count = log.replan_count;
      log.ticks.push_back(rec);
      continue;
    }

    const Point3 front = state.t_online.front();
    const FollowerCommand cmd = follow_command(pose, front, scenario.mav.speed);
    const double reach = distance(pose.position, front);
    const Point3 before = pose.position;
    if (reach <= scenario.mav.speed * dt) {
      pose.position = front;
    } else {
      pose.position = pose.position + dt * cmd.velocity;
    }
    pose.yaw = normalize_yaw(pose.yaw + cmd.yaw_rate * dt);
    push_flown(pose.position);

    rec.pose = pose;
    rec.velocity = (1.0 / dt) * (pose.position - before);
    rec.yaw_rate = cmd.yaw_rate;
    rec.mode = TickMode::following;
    rec.replan_count = log.replan_count;
    log.ticks.push_back(rec);
  }

  if (log.completed) {
    log.outcome = "completed";
    if (log.flown.size() >= 2) log.flown_cost_vs_target = path_cost(log.flown, log.target).value;
  } else if (!log.ticks.empty() && log.ticks.back().mode == TickMode::stuck) {
    log.outcome = "stuck";
  } else {
    log.outcome = "timeout";
  }
  return log;
}

}  // namespace replan
