#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "replan/bspline.hpp"
#include "replan/core.hpp"
#include "replan/obstacle_map.hpp"

namespace replan {

/// One step of length `step` from `from` toward `toward`, taken through the
/// spherical angles of the offset vector.
inline Point3 spherical_step(const Point3& from, const Point3& toward, double step) {
  const Point3 p = toward - from;
  const double theta = std::atan2(p.y, p.x);
  const double phi = std::atan2(std::sqrt(p.x * p.x + p.y * p.y), p.z);
  return {from.x + step * std::sin(phi) * std::cos(theta),
          from.y + step * std::sin(phi) * std::sin(theta),
          from.z + step * std::cos(phi)};
}

/// Collinear intermediate points between p1 and p2, at most `dis` apart.
/// Includes both endpoints. dis must be positive.
inline std::vector<Point3> densify(const Point3& p1, const Point3& p2, double dis) {
  if (!(dis > 0.0)) throw std::invalid_argument("densify: spacing must be positive");
  std::vector<Point3> out{p1};
  Point3 cur = p1;
  std::size_t budget = static_cast<std::size_t>(std::ceil(distance(p1, p2) / dis)) + 2;
  while (distance(cur, p2) > dis && budget > 0) {
    cur = spherical_step(cur, p2, dis);
    out.push_back(cur);
    --budget;
  }
  out.push_back(p2);
  return out;
}

/// Densifies a sparse waypoint list pairwise, then smooths the result.
/// `bound` defaults to the proximity trigger distance from the config.
inline Trajectory build_target(const std::vector<Point3>& waypoints, const PlannerConfig& cfg,
                               std::size_t samples_per_segment = 10, double bound = 0.0) {
  if (waypoints.size() < 2) throw std::invalid_argument("build_target: need at least two waypoints");
  const double dis = bound > 0.0 ? bound : cfg.obs_avoid_dis;
  Trajectory dense;
  dense.waypoints.push_back(waypoints.front());
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const auto seg = densify(waypoints[i - 1], waypoints[i], dis);
    dense.waypoints.insert(dense.waypoints.end(), seg.begin() + 1, seg.end());
  }
  return smooth_trajectory(dense, samples_per_segment);
}

/// Cuts a target trajectory into the online window and the remainder. The
/// window takes waypoints until its arc length first reaches replanning_dis,
/// keeping the crossing waypoint.
inline std::pair<Trajectory, Trajectory> split_target(const Trajectory& target, double replanning_dis) {
  if (!(replanning_dis > 0.0)) throw std::invalid_argument("split_target: window must be positive");
  Trajectory online, rest;
  double run = 0.0;
  std::size_t i = 0;
  for (; i < target.waypoints.size(); ++i) {
    if (i > 0) run += distance(target.waypoints[i], target.waypoints[i - 1]);
    online.waypoints.push_back(target.waypoints[i]);
    if (run >= replanning_dis) {
      ++i;
      break;
    }
  }
  for (; i < target.waypoints.size(); ++i) rest.waypoints.push_back(target.waypoints[i]);
  return {std::move(online), std::move(rest)};
}

/// Sliding-window view of the target: the short horizon handed to the planner
/// plus everything still ahead of it.
struct EstimatorState {
  Trajectory t_online;
  Trajectory t_rest;
  Pose p_current;
  double replanning_dis = 5.0;
  double delta = 0.2;  // consume radius around the vehicle
};

/// Tops the online window back up from the remainder until its arc length
/// reaches replanning_dis again, keeping the crossing waypoint.
inline EstimatorState refill_online(EstimatorState state) {
  double len = trajectory_total_length(state.t_online);
  while (!state.t_rest.waypoints.empty() && len < state.replanning_dis) {
    const Point3 next = state.t_rest.waypoints.front();
    if (!state.t_online.waypoints.empty())
      len += distance(next, state.t_online.waypoints.back());
    state.t_online.waypoints.push_back(next);
    state.t_rest.waypoints.erase(state.t_rest.waypoints.begin());
  }
  return state;
}

/// Drops leading online waypoints the vehicle has already reached (within
/// delta). Always keeps the final waypoint so the goal stays addressable.
inline EstimatorState consume_reached(EstimatorState state) {
  auto& wps = state.t_online.waypoints;
  while (wps.size() > 1 && distance(wps.front(), state.p_current.position) <= state.delta)
    wps.erase(wps.begin());
  if (wps.size() == 1 && state.t_rest.waypoints.empty() &&
      distance(wps.front(), state.p_current.position) <= state.delta)
    wps.clear();
  return state;
}

/// Proximity trigger: true when any stored obstacle sits strictly closer than
/// obs_avoid_dis to the vehicle.
inline bool needs_replan(const Pose& pose, const ObstacleMap& map, double obs_avoid_dis) {
  const auto near = map.nearest_obstacle(pose.position);
  return near && near->dist < obs_avoid_dis;
}

/// Swaps in a replanned online window. Its ends must agree with the vehicle
/// position and the old window's tail within `tolerance`.
inline EstimatorState replace_online(EstimatorState state, const Trajectory& t_projected,
                                     double tolerance) {
  if (t_projected.empty()) throw std::invalid_argument("replace_online: empty replacement");
  if (state.t_online.empty()) throw std::invalid_argument("replace_online: no window to replace");
  if (distance(t_projected.front(), state.p_current.position) > tolerance)
    throw std::invalid_argument("replace_online: replacement does not start at the vehicle");
  if (distance(t_projected.back(), state.t_online.back()) > tolerance)
    throw std::invalid_argument("replace_online: replacement misses the window tail");
  state.t_online = t_projected;
  return state;
}

}  // namespace replan
