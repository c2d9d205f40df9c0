#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "replan/core.hpp"
#include "replan/obstacle_map.hpp"

namespace replan {

/// Rotation taking the +z axis onto the direction of p. Continuous everywhere
/// except the antipodal direction, which maps to a fixed half-turn about x.
inline Eigen::Matrix3d rotation_align(const Eigen::Vector3d& p) {
  const double n = p.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("rotation_align: direction must be non-zero");
  const Eigen::Vector3d d = p / n;
  const double c = d.z();
  if (c < -1.0 + 1e-12) {
    Eigen::Matrix3d flip;
    flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    return flip;
  }
  const Eigen::Vector3d v = Eigen::Vector3d::UnitZ().cross(d);
  Eigen::Matrix3d vx;
  vx << 0, -v.z(), v.y(),
      v.z(), 0, -v.x(),
      -v.y(), v.x(), 0;
  return Eigen::Matrix3d::Identity() + vx + vx * vx / (1.0 + c);
}

/// Axis-aligned-in-body ellipsoid: semi-axis transverse/2 along the rotated z
/// axis, conjugate/2 across it. sigma carries the same shape as a covariance.
struct EllipsoidRegion {
  Point3 center;
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Identity();
  double transverse = 0.0;  // full extent along the start-goal axis
  double conjugate = 0.0;   // full extent across it
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d semi_axes = Eigen::Vector3d::Ones();
};

/// Region spanning start to goal: transverse diameter is the endpoint
/// distance, conjugate diameter is d. Throws on coincident endpoints.
inline EllipsoidRegion build_region(const Point3& start, const Point3& goal, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("build_region: conjugate diameter must be positive");
  const Point3 axis = goal - start;
  const double len = norm(axis);
  if (!(len > 1e-12)) throw std::invalid_argument("build_region: coincident endpoints");
  EllipsoidRegion r;
  r.center = 0.5 * (start + goal);
  r.transverse = len;
  r.conjugate = d;
  r.rotation = rotation_align(Eigen::Vector3d(axis.x, axis.y, axis.z));
  r.semi_axes = Eigen::Vector3d(0.5 * d, 0.5 * d, 0.5 * len);
  r.sigma = r.rotation * r.semi_axes.cwiseProduct(r.semi_axes).asDiagonal() * r.rotation.transpose();
  return r;
}

/// Sphere as a degenerate region, used for local sampling around a waypoint.
inline EllipsoidRegion ball_region(const Point3& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_region: radius must be positive");
  EllipsoidRegion r;
  r.center = center;
  r.transverse = 2.0 * radius;
  r.conjugate = 2.0 * radius;
  r.semi_axes = Eigen::Vector3d::Constant(radius);
  r.sigma = Eigen::Matrix3d::Identity() * radius * radius;
  return r;
}

/// (p - c)^T sigma^{-1} (p - c), evaluated in the body frame. At most 1 inside.
inline double quadratic_form(const EllipsoidRegion& r, const Point3& p) {
  const Point3 d = p - r.center;
  const Eigen::Vector3d body = r.rotation.transpose() * Eigen::Vector3d(d.x, d.y, d.z);
  return (body.cwiseQuotient(r.semi_axes)).squaredNorm();
}

inline bool region_contains(const EllipsoidRegion& r, const Point3& p) {
  return quadratic_form(r, p) <= 1.0;
}

/// Exact region volume over the free-space volume.
inline double volume_ratio(const EllipsoidRegion& r, double free_volume) {
  if (!(free_volume > 0.0)) throw std::invalid_argument("volume_ratio: free volume must be positive");
  return kPi / 6.0 * r.transverse * r.conjugate * r.conjugate / free_volume;
}

struct SampleBatch {
  std::vector<Point3> points;
  bool complete = true;  // false when the rejection budget ran out
};

/// Uniform draws inside the region: an isotropic gaussian direction with a
/// cube-root radius, stretched by the semi-axes and rotated into the world.
/// With a map, points closer than `clearance` to an obstacle are rejected and
/// redrawn; the budget is 10 attempts per requested point.
inline SampleBatch sample_free(const EllipsoidRegion& region, std::size_t npts, std::mt19937_64& rng,
                               const ObstacleMap* map = nullptr, double clearance = 0.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampleBatch batch;
  batch.points.reserve(npts);
  std::size_t attempts_left = npts * 10;
  while (batch.points.size() < npts && attempts_left > 0) {
    --attempts_left;
    Eigen::Vector3d g(gauss(rng), gauss(rng), gauss(rng));
    const double gn = g.norm();
    if (!(gn > 1e-300)) continue;
    const double radius = std::cbrt(unit(rng));
    const Eigen::Vector3d body = (radius / gn) * g.cwiseProduct(region.semi_axes);
    const Eigen::Vector3d world = region.rotation * body;
    const Point3 p{region.center.x + world.x(), region.center.y + world.y(),
                   region.center.z + world.z()};
    if (map != nullptr) {
      const auto near = map->nearest_obstacle(p);
      if (near && near->dist < clearance) continue;
    }
    batch.points.push_back(p);
  }
  batch.complete = batch.points.size() == npts;
  return batch;
}

}  // namespace replan
