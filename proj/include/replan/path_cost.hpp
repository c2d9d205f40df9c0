#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "replan/core.hpp"

namespace replan {

/// Second-difference smoothing operator: 2 on the diagonal, -1 on both
/// off-diagonals. Applied matrix-free.
struct SecondDifferenceMatrix {
  std::size_t n = 0;

  explicit SecondDifferenceMatrix(std::size_t size) : n(size) {
    if (n == 0) throw std::invalid_argument("SecondDifferenceMatrix: empty");
  }

  std::vector<double> multiply(std::span<const double> q) const {
    if (q.size() != n) throw std::invalid_argument("SecondDifferenceMatrix: size mismatch");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 2.0 * q[i];
      if (i > 0) v -= q[i - 1];
      if (i + 1 < n) v -= q[i + 1];
      out[i] = v;
    }
    return out;
  }

  double quadratic_form(std::span<const double> q) const {
    if (q.size() != n) throw std::invalid_argument("SecondDifferenceMatrix: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = 2.0 * q[i];
      if (i > 0) v -= q[i - 1];
      if (i + 1 < n) v -= q[i + 1];
      acc += q[i] * v;
    }
    return acc;
  }
};

/// Sum over dimensions of q^T A q with the second-difference operator.
/// Fewer than three waypoints score zero.
inline double path_energy(const Trajectory& traj) {
  const std::size_t n = traj.waypoints.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  auto axis_energy = [&](auto get) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = 2.0 * get(traj.waypoints[i]);
      if (i > 0) v -= get(traj.waypoints[i - 1]);
      if (i + 1 < n) v -= get(traj.waypoints[i + 1]);
      e += get(traj.waypoints[i]) * v;
    }
    return e;
  };
  acc += axis_energy([](const Point3& p) { return p.x; });
  acc += axis_energy([](const Point3& p) { return p.y; });
  acc += axis_energy([](const Point3& p) { return p.z; });
  return acc;
}

/// Gradient of the half-energy 0.5 sum q^T A q, which is A q per dimension.
inline std::vector<Point3> path_energy_gradient(const Trajectory& traj) {
  const std::size_t n = traj.waypoints.size();
  std::vector<Point3> grad(n);
  if (n < 3) return grad;
  for (std::size_t i = 0; i < n; ++i) {
    Point3 v = 2.0 * traj.waypoints[i];
    if (i > 0) v = v - traj.waypoints[i - 1];
    if (i + 1 < n) v = v - traj.waypoints[i + 1];
    grad[i] = v;
  }
  return grad;
}

/// Resamples a polyline to n waypoints at equal arc-length spacing.
/// A degenerate (zero-length) input repeats its first point.
inline Trajectory resample_by_arclength(const Trajectory& traj, std::size_t n) {
  if (n < 2) throw std::invalid_argument("resample_by_arclength: need at least two samples");
  if (traj.empty()) throw std::invalid_argument("resample_by_arclength: empty trajectory");
  const auto& p = traj.waypoints;
  std::vector<double> cum(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) cum[i] = cum[i - 1] + distance(p[i], p[i - 1]);
  const double total = cum.back();
  Trajectory out;
  out.waypoints.reserve(n);
  if (total == 0.0) {
    out.waypoints.assign(n, p.front());
    return out;
  }
  std::size_t seg = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const double target = total * static_cast<double>(s) / static_cast<double>(n - 1);
    while (seg + 2 < p.size() && cum[seg + 1] < target) ++seg;
    const double width = cum[seg + 1] - cum[seg];
    const double t = width > 0.0 ? std::clamp((target - cum[seg]) / width, 0.0, 1.0) : 0.0;
    out.waypoints.push_back(p[seg] + t * (p[seg + 1] - p[seg]));
  }
  return out;
}

struct PathCostResult {
  double value = 0.0;
  bool degenerate_reference = false;  // reference energy vanished; value used an epsilon floor
};

/// Smoothness of q relative to a reference: both are resampled to n points,
/// shifted into the frame centered between the reference endpoints, and their
/// energies ratioed. The shared shift makes the ratio invariant under a common
/// rigid motion of both trajectories.
inline PathCostResult path_cost(const Trajectory& q, const Trajectory& reference, std::size_t n = 50) {
  if (q.empty() || reference.empty()) throw std::invalid_argument("path_cost: empty trajectory");
  Trajectory qs = resample_by_arclength(q, n);
  Trajectory rs = resample_by_arclength(reference, n);
  const Point3 shift = 0.5 * (rs.waypoints.front() + rs.waypoints.back());
  for (auto& p : qs.waypoints) p = p - shift;
  for (auto& p : rs.waypoints) p = p - shift;
  const double eq = path_energy(qs);
  const double er = path_energy(rs);
  constexpr double kFloor = 1e-12;
  PathCostResult result;
  result.degenerate_reference = !(er > kFloor);
  result.value = eq / std::max(er, kFloor);
  return result;
}

}  // namespace replan
