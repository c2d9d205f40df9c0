#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace replan {

inline constexpr double kPi = 3.14159265358979323846;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }
inline Point3 operator*(const Point3& p, double s) { return s * p; }
inline bool operator==(const Point3& a, const Point3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double squared_norm(const Point3& p) { return dot(p, p); }
inline double norm(const Point3& p) { return std::sqrt(squared_norm(p)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on non-finite input.
inline double normalize_yaw(double yaw) {
  if (!std::isfinite(yaw)) throw std::invalid_argument("normalize_yaw: non-finite angle");
  double r = std::remainder(yaw, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

struct Pose {
  Point3 position;
  double yaw = 0.0;
};

/// Ordered waypoint list with optional per-waypoint timestamps.
/// Invariant when timestamps are present: same length as waypoints, strictly increasing.
struct Trajectory {
  std::vector<Point3> waypoints;
  std::vector<double> timestamps;

  bool empty() const { return waypoints.empty(); }
  std::size_t size() const { return waypoints.size(); }
  const Point3& front() const { return waypoints.front(); }
  const Point3& back() const { return waypoints.back(); }

  void validate() const {
    if (timestamps.empty()) return;
    if (timestamps.size() != waypoints.size())
      throw std::invalid_argument("Trajectory: timestamp count differs from waypoint count");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
      if (!(timestamps[i] > timestamps[i - 1]))
        throw std::invalid_argument("Trajectory: timestamps not strictly increasing");
  }
};

inline double trajectory_total_length(const Trajectory& t) {
  double len = 0.0;
  for (std::size_t i = 1; i < t.waypoints.size(); ++i)
    len += distance(t.waypoints[i], t.waypoints[i - 1]);
  return len;
}

/// Shared planner and replanning parameters. All distances in meters.
struct PlannerConfig {
  double replanning_dis = 5.0;          // length of the online window
  double obs_avoid_dis = 2.0;           // proximity that triggers replanning; also densify spacing
  double obstacle_fail_safe_dis = 0.5;  // hard clearance floor, must stay below obs_avoid_dis
  double conjugate_diameter = 4.0;      // minor diameter of the sampling region
  std::size_t max_iterations = 5000;
  double step_size = 0.5;
  double neighbor_radius = 1.0;
  double goal_tolerance = 0.3;
  double waypoint_reached_delta = 0.2;  // consume radius for online waypoints
  std::uint64_t rng_seed = 42;

  // Clearance-aware nearest selection: sampling sphere around the blocked
  // waypoint, doubling each attempt.
  std::size_t nearest_sphere_npts = 10;
  std::size_t nearest_sphere_attempts = 2;
  double nearest_sphere_radius = 4.0;

  // Keep searching after the first feasible path and return the cheapest
  // goal connection found within the iteration budget.
  bool refine_to_budget = false;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("PlannerConfig: ") + name + " must be positive");
    };
    positive(replanning_dis, "replanning_dis");
    positive(obs_avoid_dis, "obs_avoid_dis");
    positive(obstacle_fail_safe_dis, "obstacle_fail_safe_dis");
    positive(conjugate_diameter, "conjugate_diameter");
    positive(step_size, "step_size");
    positive(neighbor_radius, "neighbor_radius");
    positive(goal_tolerance, "goal_tolerance");
    positive(waypoint_reached_delta, "waypoint_reached_delta");
    positive(nearest_sphere_radius, "nearest_sphere_radius");
    if (max_iterations == 0)
      throw std::invalid_argument("PlannerConfig: max_iterations must be positive");
    if (!(obstacle_fail_safe_dis < obs_avoid_dis))
      throw std::invalid_argument("PlannerConfig: obstacle_fail_safe_dis must stay below obs_avoid_dis");
  }
};

}  // namespace replan
