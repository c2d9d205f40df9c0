#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "replan/bspline.hpp"
#include "replan/core.hpp"
#include "replan/obstacle_map.hpp"
#include "replan/path_cost.hpp"
#include "replan/sampler.hpp"

namespace replan {

struct Aabb {
  Point3 min;
  Point3 max;

  void validate() const {
    if (!is_finite(min) || !is_finite(max) || min.x > max.x || min.y > max.y || min.z > max.z)
      throw std::invalid_argument("Aabb: min must not exceed max");
  }

  bool contains(const Point3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }

  Point3 sample_uniform(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> ux(min.x, max.x), uy(min.y, max.y), uz(min.z, max.z);
    const double x = ux(rng), y = uy(rng), z = uz(rng);
    return {x, y, z};
  }
};

/// Search tree vertex. parent is -1 for the root; cost_to_come equals the
/// parent's cost plus the connecting edge length.
struct PlanVertex {
  Point3 position;
  std::int32_t parent = -1;
  double cost_to_come = 0.0;
};

struct PlanGraph {
  std::vector<PlanVertex> vertices;

  /// Index of the vertex closest to q; ties resolve to the lowest index.
  std::size_t nearest_vertex(const Point3& q) const {
    if (vertices.empty()) throw std::logic_error("PlanGraph: nearest on empty graph");
    std::size_t best = 0;
    double best_d2 = squared_norm(vertices[0].position - q);
    for (std::size_t i = 1; i < vertices.size(); ++i) {
      const double d2 = squared_norm(vertices[i].position - q);
      if (d2 < best_d2) {
        best = i;
        best_d2 = d2;
      }
    }
    return best;
  }
};

struct PlanResult {
  Trajectory path;
  Trajectory smoothed;
  std::size_t iterations = 0;
  double elapsed_seconds = 0.0;
  double cost = 0.0;  // dimensionless smoothness ratio when a reference exists
  bool success = false;
  std::string status;
  PlanGraph graph;
};

struct PlanHooks {
  std::function<void(const PlanGraph&, std::size_t)> after_iteration;
};

/// Steering origin selection that pulls growth toward the blocked part of the
/// current trajectory: find the obstacle closest to x_rand, the trajectory
/// waypoint closest to that obstacle, then sample near that waypoint until a
/// point clears obstacle_fail_safe_dis. The sphere doubles between attempts.
/// Falls back to the nearest tree vertex when the map or trajectory is empty
/// or every candidate fails.
inline Point3 nearest_with_clearance(const PlanGraph& graph, const Point3& x_rand,
                                     const Trajectory& traj, const ObstacleMap& map,
                                     const PlannerConfig& cfg, std::mt19937_64& rng) {
  if (graph.vertices.empty()) throw std::logic_error("nearest_with_clearance: empty graph");
  const auto fallback = [&] { return graph.vertices[graph.nearest_vertex(x_rand)].position; };
  const auto near_obs = map.nearest_obstacle(x_rand);
  if (!near_obs || traj.empty()) return fallback();

  std::size_t wp = 0;
  double wp_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
    const double d2 = squared_norm(traj.waypoints[i] - near_obs->point);
    if (d2 < wp_d2) {
      wp = i;
      wp_d2 = d2;
    }
  }

  double radius = cfg.nearest_sphere_radius;
  for (std::size_t attempt = 0; attempt < cfg.nearest_sphere_attempts; ++attempt) {
    const auto batch = sample_free(ball_region(traj.waypoints[wp], radius), cfg.nearest_sphere_npts, rng);
    for (const auto& candidate : batch.points) {
      if (distance(candidate, near_obs->point) >= cfg.obstacle_fail_safe_dis &&
          map.point_collision_free(candidate, cfg.obstacle_fail_safe_dis))
        return candidate;
    }
    radius *= 2.0;
  }
  return fallback();
}

namespace detail {

inline Point3 steer(const Point3& from, const Point3& toward, double step) {
  const Point3 d = toward - from;
  const double len = norm(d);
  if (len <= step) return toward;
  return from + (step / len) * d;
}

/// Shared RRT* loop. The two planners differ only in how x_rand is drawn and
/// which point steering starts from.
template <typename SampleFn, typename OriginFn>
PlanResult rrtstar_core(const Point3& start, const Point3& goal, const ObstacleMap& map,
                        const PlannerConfig& cfg, SampleFn&& draw_sample, OriginFn&& steer_origin,
                        const PlanHooks* hooks) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  if (!is_finite(start) || !is_finite(goal))
    throw std::invalid_argument("planner: non-finite endpoint");
  const double safe = cfg.obstacle_fail_safe_dis;

  PlanResult result;
  auto finish = [&](bool ok, std::string status) {
    result.success = ok;
    result.status = std::move(status);
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  };

  if (!map.point_collision_free(start, safe)) return finish(false, "start blocked");
  if (!map.point_collision_free(goal, safe)) return finish(false, "goal blocked");

  PlanGraph& graph = result.graph;
  graph.vertices.push_back({start, -1, 0.0});
  std::vector<std::vector<std::int32_t>> children(1);

  std::int32_t goal_vertex = -1;
  if (distance(start, goal) <= cfg.goal_tolerance) goal_vertex = 0;

  std::size_t iter = 0;
  while (iter < cfg.max_iterations && (goal_vertex < 0 || cfg.refine_to_budget)) {
    ++iter;
    result.iterations = iter;

    Point3 x_rand;
    if (!draw_sample(x_rand)) {
      if (hooks && hooks->after_iteration) hooks->after_iteration(graph, iter);
      continue;
    }
    const Point3 origin = steer_origin(graph, x_rand);
    if (origin == x_rand) {
      if (hooks && hooks->after_iteration) hooks->after_iteration(graph, iter);
      continue;
    }
    const Point3 x_new = steer(origin, x_rand, cfg.step_size);
    if (!map.segment_collision_free(origin, x_new, safe)) {
      if (hooks && hooks->after_iteration) hooks->after_iteration(graph, iter);
      continue;
    }

    // Parent candidates: the neighborhood of x_new plus the plain nearest vertex.
    std::vector<std::int32_t> near;
    const double r2 = cfg.neighbor_radius * cfg.neighbor_radius;
    for (std::size_t i = 0; i < graph.vertices.size(); ++i)
      if (squared_norm(graph.vertices[i].position - x_new) <= r2)
        near.push_back(static_cast<std::int32_t>(i));
    const auto plain_nearest = static_cast<std::int32_t>(graph.nearest_vertex(x_new));

    std::int32_t best_parent = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    auto consider = [&](std::int32_t idx) {
      const auto& v = graph.vertices[static_cast<std::size_t>(idx)];
      const double c = v.cost_to_come + distance(v.position, x_new);
      if (c < best_cost && map.segment_collision_free(v.position, x_new, safe)) {
        best_parent = idx;
        best_cost = c;
      }
    };
    for (const auto idx : near) consider(idx);
    if (std::find(near.begin(), near.end(), plain_nearest) == near.end()) consider(plain_nearest);
    if (best_parent < 0) {
      if (hooks && hooks->after_iteration) hooks->after_iteration(graph, iter);
      continue;
    }

    const auto new_idx = static_cast<std::int32_t>(graph.vertices.size());
    graph.vertices.push_back({x_new, best_parent, best_cost});
    children.emplace_back();
    children[static_cast<std::size_t>(best_parent)].push_back(new_idx);

    // Rewire: adopt neighbors whose cost drops through x_new, then push the
    // saving down their subtrees.
    for (const auto idx : near) {
      auto& v = graph.vertices[static_cast<std::size_t>(idx)];
      const double through = best_cost + distance(x_new, v.position);
      if (through + 1e-12 < v.cost_to_come &&
          map.segment_collision_free(x_new, v.position, safe)) {
        auto& old_children = children[static_cast<std::size_t>(v.parent)];
        old_children.erase(std::find(old_children.begin(), old_children.end(), idx));
        children[static_cast<std::size_t>(new_idx)].push_back(idx);
        const double delta = through - v.cost_to_come;
        v.parent = new_idx;
        std::vector<std::int32_t> stack{idx};
        while (!stack.empty()) {
          const auto u = stack.back();
          stack.pop_back();
          graph.vertices[static_cast<std::size_t>(u)].cost_to_come += delta;
          for (const auto c : children[static_cast<std::size_t>(u)]) stack.push_back(c);
        }
      }
    }

    if (distance(x_new, goal) <= cfg.goal_tolerance && goal_vertex < 0) goal_vertex = new_idx;
    if (hooks && hooks->after_iteration) hooks->after_iteration(graph, iter);
  }

  if (cfg.refine_to_budget) {
    // The cheapest goal connection may have changed through rewiring.
    goal_vertex = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
      if (distance(graph.vertices[i].position, goal) <= cfg.goal_tolerance &&
          graph.vertices[i].cost_to_come < best) {
        best = graph.vertices[i].cost_to_come;
        goal_vertex = static_cast<std::int32_t>(i);
      }
    }
  }

  if (goal_vertex < 0) return finish(false, "no feasible path within iteration budget");

  std::vector<Point3> rev;
  for (std::int32_t v = goal_vertex; v >= 0; v = graph.vertices[static_cast<std::size_t>(v)].parent)
    rev.push_back(graph.vertices[static_cast<std::size_t>(v)].position);
  result.path.waypoints.assign(rev.rbegin(), rev.rend());
  // Close the remaining gap to the exact goal when that hop is clear.
  if (distance(result.path.back(), goal) > 1e-12 &&
      map.segment_collision_free(result.path.back(), goal, safe))
    result.path.waypoints.push_back(goal);
  result.smoothed = smooth_trajectory(result.path);
  return finish(true, "ok");
}

}  // namespace detail

/// Reduced-region planner: draws from the ellipsoid spanning start and goal,
/// steers from clearance-aware origins near the blocked trajectory, and stops
/// at the first feasible path. `traj` is the trajectory being repaired; when
/// it is non-empty the result cost is measured against it.
inline PlanResult plan_improved_rrtstar(const Point3& start, const Point3& goal,
                                        const ObstacleMap& map, const Trajectory& traj,
                                        const PlannerConfig& cfg, std::mt19937_64& rng,
                                        const PlanHooks* hooks = nullptr) {
  if (!is_finite(start) || !is_finite(goal))
    throw std::invalid_argument("planner: non-finite endpoint");
  if (!(distance(start, goal) > 1e-12)) {
    PlanResult r;
    if (!map.point_collision_free(start, cfg.obstacle_fail_safe_dis)) {
      r.status = "start blocked";
      return r;
    }
    r.path.waypoints = {start, goal};
    r.smoothed = r.path;
    r.success = true;
    r.status = "degenerate: start equals goal";
    return r;
  }
  const EllipsoidRegion region = build_region(start, goal, cfg.conjugate_diameter);
  auto draw = [&](Point3& out) {
    auto batch = sample_free(region, 1, rng, &map, cfg.obstacle_fail_safe_dis);
    if (batch.points.empty()) return false;
    out = batch.points.front();
    return true;
  };
  auto origin = [&](const PlanGraph& graph, const Point3& x_rand) {
    return nearest_with_clearance(graph, x_rand, traj, map, cfg, rng);
  };
  PlanResult result = detail::rrtstar_core(start, goal, map, cfg, draw, origin, hooks);
  if (result.success && !traj.empty() && result.smoothed.size() >= 2)
    result.cost = path_cost(result.smoothed, traj).value;
  return result;
}

/// Textbook RRT* over the whole scene box: uniform samples, nearest-vertex
/// steering, otherwise identical machinery.
inline PlanResult plan_baseline_rrtstar(const Point3& start, const Point3& goal,
                                        const ObstacleMap& map, const PlannerConfig& cfg,
                                        std::mt19937_64& rng, const Aabb& bounds,
                                        const PlanHooks* hooks = nullptr) {
  bounds.validate();
  auto draw = [&](Point3& out) {
    out = bounds.sample_uniform(rng);
    return true;
  };
  auto origin = [&](const PlanGraph& graph, const Point3& x_rand) {
    return graph.vertices[graph.nearest_vertex(x_rand)].position;
  };
  return detail::rrtstar_core(start, goal, map, cfg, draw, origin, hooks);
}

/// Occupancy A* on a voxelization of the map. Voxels whose center lies within
/// `clearance` of a stored point are blocked, so returned waypoints keep the
/// same clearance floor as the sampling planners. 26-connected neighborhood,
/// Euclidean heuristic. Start or goal outside the bounds or inside a blocked
/// voxel throws std::invalid_argument.
inline PlanResult plan_astar_grid(const Point3& start, const Point3& goal, const ObstacleMap& map,
                                  double voxel, const Aabb& bounds, double clearance = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  bounds.validate();
  if (!(voxel > 0.0)) throw std::invalid_argument("plan_astar_grid: voxel must be positive");
  if (!bounds.contains(start) || !bounds.contains(goal))
    throw std::invalid_argument("plan_astar_grid: endpoint outside bounds");

  const auto dim = [&](double lo, double hi) {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi - lo) / voxel)));
  };
  const std::int64_t nx = dim(bounds.min.x, bounds.max.x);
  const std::int64_t ny = dim(bounds.min.y, bounds.max.y);
  const std::int64_t nz = dim(bounds.min.z, bounds.max.z);
  const std::int64_t cells = nx * ny * nz;
  if (cells > 50'000'000) throw std::invalid_argument("plan_astar_grid: grid too large");

  const auto index = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    return static_cast<std::size_t>((k * ny + j) * nx + i);
  };
  const auto center = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    return Point3{bounds.min.x + (static_cast<double>(i) + 0.5) * voxel,
                  bounds.min.y + (static_cast<double>(j) + 0.5) * voxel,
                  bounds.min.z + (static_cast<double>(k) + 0.5) * voxel};
  };

  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(cells), 0);
  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(clearance / voxel)) + 1;
  for (const auto& p : map.all_points()) {
    const auto ci = static_cast<std::int64_t>(std::floor((p.x - bounds.min.x) / voxel));
    const auto cj = static_cast<std::int64_t>(std::floor((p.y - bounds.min.y) / voxel));
    const auto ck = static_cast<std::int64_t>(std::floor((p.z - bounds.min.z) / voxel));
    // The voxel holding the point is always blocked, whatever the clearance.
    if (ci >= 0 && ci < nx && cj >= 0 && cj < ny && ck >= 0 && ck < nz)
      blocked[index(ci, cj, ck)] = 1;
    if (!(clearance > 0.0)) continue;
    for (std::int64_t k = std::max<std::int64_t>(0, ck - reach); k <= std::min(nz - 1, ck + reach); ++k)
      for (std::int64_t j = std::max<std::int64_t>(0, cj - reach); j <= std::min(ny - 1, cj + reach); ++j)
        for (std::int64_t i = std::max<std::int64_t>(0, ci - reach); i <= std::min(nx - 1, ci + reach); ++i)
          if (!blocked[index(i, j, k)] && distance(center(i, j, k), p) <= clearance)
            blocked[index(i, j, k)] = 1;
  }

  const auto cell_of = [&](const Point3& p) {
    const auto clampi = [](std::int64_t v, std::int64_t hi) {
      return std::clamp<std::int64_t>(v, 0, hi - 1);
    };
    return std::array<std::int64_t, 3>{
        clampi(static_cast<std::int64_t>(std::floor((p.x - bounds.min.x) / voxel)), nx),
        clampi(static_cast<std::int64_t>(std::floor((p.y - bounds.min.y) / voxel)), ny),
        clampi(static_cast<std::int64_t>(std::floor((p.z - bounds.min.z) / voxel)), nz)};
  };
  const auto sc = cell_of(start);
  const auto gc = cell_of(goal);
  if (blocked[index(sc[0], sc[1], sc[2])] || blocked[index(gc[0], gc[1], gc[2])])
    throw std::invalid_argument("plan_astar_grid: endpoint voxel blocked");

  PlanResult result;
  const Point3 goal_center = center(gc[0], gc[1], gc[2]);
  const std::size_t goal_idx = index(gc[0], gc[1], gc[2]);
  const std::size_t start_idx = index(sc[0], sc[1], sc[2]);

  std::vector<double> g(static_cast<std::size_t>(cells), std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> came(static_cast<std::size_t>(cells), -1);
  using QEntry = std::pair<double, std::size_t>;  // (f, cell); index breaks ties
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<>> open;
  g[start_idx] = 0.0;
  open.emplace(distance(center(sc[0], sc[1], sc[2]), goal_center), start_idx);

  bool found = false;
  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    const std::int64_t ck = static_cast<std::int64_t>(cur) / (nx * ny);
    const std::int64_t cj = (static_cast<std::int64_t>(cur) / nx) % ny;
    const std::int64_t ci = static_cast<std::int64_t>(cur) % nx;
    const Point3 cc = center(ci, cj, ck);
    if (f > g[cur] + distance(cc, goal_center) + 1e-12) continue;  // stale entry
    ++result.iterations;
    if (cur == goal_idx) {
      found = true;
      break;
    }
    for (std::int64_t dk = -1; dk <= 1; ++dk)
      for (std::int64_t dj = -1; dj <= 1; ++dj)
        for (std::int64_t di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const std::int64_t i = ci + di, j = cj + dj, k = ck + dk;
          if (i < 0 || i >= nx || j < 0 || j >= ny || k < 0 || k >= nz) continue;
          const std::size_t nb = index(i, j, k);
          if (blocked[nb]) continue;
          const double step = voxel * std::sqrt(static_cast<double>(di * di + dj * dj + dk * dk));
          const double cand = g[cur] + step;
          if (cand < g[nb]) {
            g[nb] = cand;
            came[nb] = static_cast<std::int64_t>(cur);
            open.emplace(cand + distance(center(i, j, k), goal_center), nb);
          }
        }
  }

  result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!found) {
    result.status = "no grid path";
    return result;
  }
  std::vector<Point3> rev;
  for (std::int64_t cur = static_cast<std::int64_t>(goal_idx); cur >= 0; cur = came[static_cast<std::size_t>(cur)]) {
    const std::int64_t k = cur / (nx * ny), j = (cur / nx) % ny, i = cur % nx;
    rev.push_back(center(i, j, k));
  }
  result.path.waypoints.assign(rev.rbegin(), rev.rend());
  result.smoothed = smooth_trajectory(result.path);
  result.success = true;
  result.status = "ok";
  return result;
}

}  // namespace replan
