#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/box.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "replan/core.hpp"

namespace replan {

/// One sensor frame: points in the world frame plus an acquisition stamp.
struct PointCloud {
  std::vector<Point3> points;
  double stamp = 0.0;
};

/// Keeps points with center distance <= radius.
inline PointCloud crop_sphere(const PointCloud& cloud, const Point3& center, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("crop_sphere: negative radius");
  PointCloud out;
  out.stamp = cloud.stamp;
  const double r2 = radius * radius;
  for (const auto& p : cloud.points)
    if (squared_norm(p - center) <= r2) out.points.push_back(p);
  return out;
}

/// Drops points below the given height. Crude stand-in for ground removal.
inline PointCloud filter_ground(const PointCloud& cloud, double z_ground) {
  PointCloud out;
  out.stamp = cloud.stamp;
  for (const auto& p : cloud.points)
    if (p.z >= z_ground) out.points.push_back(p);
  return out;
}

inline double point_segment_distance(const Point3& p, const Point3& a, const Point3& b) {
  const Point3 ab = b - a;
  const double len2 = squared_norm(ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

struct InsertionReport {
  std::size_t inserted = 0;
  std::size_t deduplicated = 0;
  double elapsed_seconds = 0.0;
};

struct NearestObstacle {
  Point3 point;
  double dist = 0.0;
};

namespace detail {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint64_t v : {static_cast<std::uint64_t>(k.x), static_cast<std::uint64_t>(k.y),
                            static_cast<std::uint64_t>(k.z)}) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

/// Spatial index over recent sensor clouds. Points are deduplicated per voxel
/// (the first point to claim a voxel wins) and whole clouds age out once more
/// than `capacity` of them are held. Copying takes a consistent snapshot.
class ObstacleMap {
 public:
  explicit ObstacleMap(double resolution = 0.2, std::size_t capacity = 10)
      : resolution_(resolution), capacity_(capacity) {
    if (!(resolution > 0.0)) throw std::invalid_argument("ObstacleMap: resolution must be positive");
    if (capacity == 0) throw std::invalid_argument("ObstacleMap: capacity must be positive");
  }

  InsertionReport insert_cloud(const PointCloud& cloud) {
    const auto t0 = std::chrono::steady_clock::now();
    InsertionReport report;
    // Make room first: the incoming cloud must not collide with voxels that
    // are leaving the window in the same call.
    while (clouds_.size() >= capacity_) {
      for (const auto& p : clouds_.front()) {
        tree_.remove(to_bpoint(p));
        occupied_.erase(voxel_of(p));
      }
      clouds_.pop_front();
    }
    std::vector<Point3> survivors;
    survivors.reserve(cloud.points.size());
    for (const auto& p : cloud.points) {
      if (!is_finite(p)) throw std::invalid_argument("ObstacleMap: non-finite point");
      const auto key = voxel_of(p);
      if (occupied_.contains(key)) {
        ++report.deduplicated;
        continue;
      }
      occupied_.insert(key);
      tree_.insert(to_bpoint(p));
      survivors.push_back(p);
      ++report.inserted;
    }
    clouds_.push_back(std::move(survivors));
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  }

  std::optional<NearestObstacle> nearest_obstacle(const Point3& q) const {
    namespace bgi = boost::geometry::index;
    if (tree_.empty()) return std::nullopt;
    BPoint hit;
    tree_.query(bgi::nearest(to_bpoint(q), 1), &hit);
    const Point3 p = from_bpoint(hit);
    return NearestObstacle{p, distance(p, q)};
  }

  /// True when every stored point keeps at least `clearance` from segment ab.
  bool segment_collision_free(const Point3& a, const Point3& b, double clearance) const {
    namespace bgi = boost::geometry::index;
    if (!(clearance >= 0.0)) throw std::invalid_argument("segment_collision_free: negative clearance");
    if (tree_.empty()) return true;
    const BBox box(to_bpoint({std::min(a.x, b.x) - clearance, std::min(a.y, b.y) - clearance,
                              std::min(a.z, b.z) - clearance}),
                   to_bpoint({std::max(a.x, b.x) + clearance, std::max(a.y, b.y) + clearance,
                              std::max(a.z, b.z) + clearance}));
    for (auto it = tree_.qbegin(bgi::intersects(box)); it != tree_.qend(); ++it)
      if (point_segment_distance(from_bpoint(*it), a, b) < clearance) return false;
    return true;
  }

  /// True when the nearest stored point keeps at least `clearance` away.
  bool point_collision_free(const Point3& p, double clearance) const {
    const auto near = nearest_obstacle(p);
    return !near || near->dist >= clearance;
  }

  std::size_t size() const { return tree_.size(); }
  std::size_t cloud_count() const { return clouds_.size(); }
  double resolution() const { return resolution_; }
  std::size_t capacity() const { return capacity_; }

  /// Stored points in insertion order, oldest cloud first.
  std::vector<Point3> all_points() const {
    std::vector<Point3> out;
    out.reserve(tree_.size());
    for (const auto& cloud : clouds_) out.insert(out.end(), cloud.begin(), cloud.end());
    return out;
  }

 private:
  using BPoint = boost::geometry::model::point<double, 3, boost::geometry::cs::cartesian>;
  using BBox = boost::geometry::model::box<BPoint>;

  static BPoint to_bpoint(const Point3& p) { return BPoint(p.x, p.y, p.z); }
  static Point3 from_bpoint(const BPoint& p) { return {p.get<0>(), p.get<1>(), p.get<2>()}; }

  detail::VoxelKey voxel_of(const Point3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / resolution_)),
            static_cast<std::int64_t>(std::floor(p.y / resolution_)),
            static_cast<std::int64_t>(std::floor(p.z / resolution_))};
  }

  double resolution_;
  std::size_t capacity_;
  boost::geometry::index::rtree<BPoint, boost::geometry::index::quadratic<16>> tree_;
  std::unordered_set<detail::VoxelKey, detail::VoxelKeyHash> occupied_;
  std::deque<std::vector<Point3>> clouds_;
};

}  // namespace replan
