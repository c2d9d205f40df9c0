#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "replan/core.hpp"

namespace replan {

/// Non-decreasing knot sequence for quadratic splines.
struct KnotVector {
  std::vector<double> knots;

  void validate() const {
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (knots[i] < knots[i - 1])
        throw std::invalid_argument("KnotVector: knots must be non-decreasing");
  }
};

/// Cox-de Boor basis value of order k (degree k-1) for knot index j at parameter t.
/// Supported orders: 1, 2, 3. Zero-width spans contribute zero.
inline double cox_de_boor(std::size_t j, int k, double t, const KnotVector& kv) {
  const auto& u = kv.knots;
  if (k < 1 || k > 3) throw std::invalid_argument("cox_de_boor: order must be 1, 2 or 3");
  if (j + static_cast<std::size_t>(k) >= u.size())
    throw std::invalid_argument("cox_de_boor: knot index out of range for order");
  if (k == 1) return (u[j] <= t && t < u[j + 1]) ? 1.0 : 0.0;
  const double d1 = u[j + k - 1] - u[j];
  const double d2 = u[j + k] - u[j + 1];
  double acc = 0.0;
  if (d1 > 0.0) acc += (t - u[j]) / d1 * cox_de_boor(j, k - 1, t, kv);
  if (d2 > 0.0) acc += (u[j + k] - t) / d2 * cox_de_boor(j + 1, k - 1, t, kv);
  return acc;
}

/// Quadratic blending matrix for span [t_i, t_{i+1}). Row r, column c scale
/// u^r and control point P_{i-2+c}; rows always sum to (1, 0, 0).
struct BasisMatrix3 {
  std::array<std::array<double, 3>, 3> m{};
  double a = 0.0;  // span width over t_{i+1} - t_{i-1}
  double b = 0.0;  // span width over t_{i+2} - t_i

  /// Blend weights for the three control points at local parameter u. Uses the
  /// factored form of the matrix rows so the weights sum to one exactly and
  /// the curve hits the clamped endpoints bit-for-bit.
  std::array<double, 3> weights(double u) const {
    const double w0 = a * (1.0 - u) * (1.0 - u);
    const double w2 = b * u * u;
    return {w0, 1.0 - w0 - w2, w2};
  }
};

/// Builds the span matrix from the four surrounding knots t_{i-1}..t_{i+2}.
/// Requires a non-empty span (t_{i+1} > t_i).
inline BasisMatrix3 basis_matrix(std::size_t i, const KnotVector& kv) {
  const auto& t = kv.knots;
  if (i < 1 || i + 2 >= t.size())
    throw std::invalid_argument("basis_matrix: span needs knots t_{i-1} through t_{i+2}");
  const double span = t[i + 1] - t[i];
  if (!(span > 0.0)) throw std::invalid_argument("basis_matrix: empty span");
  BasisMatrix3 bm;
  bm.a = span / (t[i + 1] - t[i - 1]);
  bm.b = span / (t[i + 2] - t[i]);
  bm.m[0] = {bm.a, 1.0 - bm.a, 0.0};
  bm.m[1] = {-2.0 * bm.a, 2.0 * bm.a, 0.0};
  bm.m[2] = {bm.a, -(bm.a + bm.b), bm.b};
  return bm;
}

/// Clamped chord-length knot vector for n control points: three repeated knots
/// at each end, interior knots from averaged cumulative chord lengths.
inline KnotVector chord_length_knots(const std::vector<Point3>& pts) {
  const std::size_t n = pts.size();
  std::vector<double> chord(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    chord[i] = chord[i - 1] + distance(pts[i], pts[i - 1]);
  const double total = chord[n - 1];
  KnotVector kv;
  kv.knots.assign(3, 0.0);
  for (std::size_t j = 1; j + 2 < n; ++j)
    kv.knots.push_back(0.5 * (chord[j] + chord[j + 1]));
  kv.knots.insert(kv.knots.end(), 3, total);
  return kv;
}

/// Smooths a waypoint list with a clamped quadratic spline. The curve starts at
/// the first waypoint and ends at the last one; every sample stays inside the
/// convex hull of its three supporting waypoints. Inputs with fewer than three
/// waypoints (or zero total length) pass through unchanged.
/// Output size: (n - 1) * samples_per_segment + 1.
inline Trajectory smooth_trajectory(const Trajectory& traj, std::size_t samples_per_segment = 10) {
  if (samples_per_segment == 0)
    throw std::invalid_argument("smooth_trajectory: samples_per_segment must be positive");
  const auto& p = traj.waypoints;
  const std::size_t n = p.size();
  if (n < 3) return traj;

  const KnotVector kv = chord_length_knots(p);
  const double lo = kv.knots[2];
  const double hi = kv.knots[n];
  if (!(hi > lo)) return traj;

  // One matrix per non-empty span; spans collapsed by duplicate waypoints are skipped.
  struct Span {
    std::size_t i;
    BasisMatrix3 bm;
  };
  std::vector<Span> spans;
  for (std::size_t i = 2; i < n; ++i)
    if (kv.knots[i + 1] > kv.knots[i]) spans.push_back({i, basis_matrix(i, kv)});

  Trajectory out;
  const std::size_t total = (n - 1) * samples_per_segment + 1;
  out.waypoints.reserve(total);
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < total; ++s) {
    const double tau =
        lo + (hi - lo) * (static_cast<double>(s) / static_cast<double>(total - 1));
    while (cursor + 1 < spans.size() && tau >= kv.knots[spans[cursor].i + 1]) ++cursor;
    const Span& sp = spans[cursor];
    const double width = kv.knots[sp.i + 1] - kv.knots[sp.i];
    const double u = std::clamp((tau - kv.knots[sp.i]) / width, 0.0, 1.0);
    const auto w = sp.bm.weights(u);
    out.waypoints.push_back(w[0] * p[sp.i - 2] + w[1] * p[sp.i - 1] + w[2] * p[sp.i]);
  }
  return out;
}

}  // namespace replan
