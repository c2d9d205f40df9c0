#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "replan/path_cost.hpp"
#include "support/oracles.hpp"

using namespace replan;

namespace {

Trajectory random_path(std::mt19937_64& rng, std::size_t n, double extent) {
  std::uniform_real_distribution<double> coord(-extent, extent);
  Trajectory t;
  for (std::size_t i = 0; i < n; ++i) t.waypoints.push_back({coord(rng), coord(rng), coord(rng)});
  return t;
}

}  // namespace

TEST_CASE("one-dimensional energy reproduces the pinned value") {
  Trajectory t;
  t.waypoints = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  CHECK(path_energy(t) == 6.0);
}

TEST_CASE("short paths have zero energy") {
  Trajectory t;
  CHECK(path_energy(t) == 0.0);
  t.waypoints = {{3, 1, 4}};
  CHECK(path_energy(t) == 0.0);
  t.waypoints.push_back({1, 5, 9});
  CHECK(path_energy(t) == 0.0);
  CHECK(path_energy_gradient(t).size() == 2);
}

TEST_CASE("stencil products match the dense matrix") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (std::size_t n : {3u, 5u, 12u, 30u}) {
    const SecondDifferenceMatrix a(n);
    const auto dense = oracles::dense_second_difference(n);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> q(n);
      for (auto& v : q) v = val(rng);
      CHECK_THAT(a.quadratic_form(q),
                 Catch::Matchers::WithinAbs(oracles::dense_quadratic_form(dense, q), 1e-9));
      const auto product = a.multiply(q);
      for (std::size_t i = 0; i < n; ++i) {
        double expected = 0.0;
        for (std::size_t j = 0; j < n; ++j) expected += dense[i][j] * q[j];
        CHECK_THAT(product[i], Catch::Matchers::WithinAbs(expected, 1e-9));
      }
    }
  }
  CHECK_THROWS_AS(SecondDifferenceMatrix(0), std::invalid_argument);
}

TEST_CASE("spectrum follows the closed-form cosine rule") {
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto dense = oracles::dense_second_difference(n);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dense[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    REQUIRE(solver.info() == Eigen::Success);
    for (std::size_t k = 1; k <= n; ++k) {
      const double expected =
          2.0 - 2.0 * std::cos(static_cast<double>(k) * kPi / (static_cast<double>(n) + 1.0));
      CHECK_THAT(solver.eigenvalues()(static_cast<Eigen::Index>(k - 1)),
                 Catch::Matchers::WithinAbs(expected, 1e-9));
      CHECK(expected > 0.0);  // positive definite at every size
    }
  }
}

TEST_CASE("gradient equals a central difference of the half energy") {
  std::mt19937_64 rng(89);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    Trajectory t = random_path(rng, 4 + static_cast<std::size_t>(trial % 7), 2.0);
    const auto grad = path_energy_gradient(t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        auto nudge = [&](double delta) {
          Trajectory copy = t;
          auto& p = copy.waypoints[i];
          (axis == 0 ? p.x : axis == 1 ? p.y : p.z) += delta;
          return 0.5 * path_energy(copy);
        };
        const double fd = (nudge(h) - nudge(-h)) / (2.0 * h);
        const double analytic = axis == 0 ? grad[i].x : axis == 1 ? grad[i].y : grad[i].z;
        CHECK_THAT(analytic, Catch::Matchers::WithinAbs(fd, 1e-6));
      }
    }
  }
}

TEST_CASE("uniform straight lines have zero interior gradient") {
  Trajectory t;
  for (int i = 0; i < 8; ++i) t.waypoints.push_back({0.5 * i, 1.0 * i, -0.25 * i});
  const auto grad = path_energy_gradient(t);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    CHECK_THAT(grad[i].x, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(grad[i].y, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(grad[i].z, Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
  CHECK(norm(grad.front()) > 0.0);
  CHECK(norm(grad.back()) > 0.0);
}

TEST_CASE("arc-length resampling spreads points evenly") {
  Trajectory t;
  t.waypoints = {{0, 0, 0}, {1, 0, 0}, {1, 2, 0}, {1, 2, 3}};
  const Trajectory out = resample_by_arclength(t, 13);
  REQUIRE(out.size() == 13);
  CHECK(out.front() == t.front());
  CHECK(out.back() == t.back());
  // Arc positions along the polyline advance by total/12 per sample.
  const double total = trajectory_total_length(t);
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double step = distance(out.waypoints[i], out.waypoints[i - 1]);
    CHECK(step <= total / 12.0 + 1e-9);
  }
  CHECK_THAT(trajectory_total_length(out), Catch::Matchers::WithinAbs(total, 1e-9));

  Trajectory stacked;
  stacked.waypoints = {{1, 1, 1}, {1, 1, 1}};
  const Trajectory rep = resample_by_arclength(stacked, 5);
  REQUIRE(rep.size() == 5);
  for (const auto& p : rep.waypoints) CHECK(p == Point3{1, 1, 1});

  CHECK_THROWS_AS(resample_by_arclength(t, 1), std::invalid_argument);
  CHECK_THROWS_AS(resample_by_arclength(Trajectory{}, 5), std::invalid_argument);
}

TEST_CASE("identical trajectories cost exactly one") {
  std::mt19937_64 rng(97);
  const Trajectory t = random_path(rng, 9, 4.0);
  const auto result = path_cost(t, t);
  CHECK(result.value == 1.0);
  CHECK_FALSE(result.degenerate_reference);
}

TEST_CASE("a shared rigid motion leaves the ratio unchanged") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> shift(-20.0, 20.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Trajectory q = random_path(rng, 8, 3.0);
    const Trajectory ref = random_path(rng, 11, 3.0);
    const double base = path_cost(q, ref).value;

    const double a = angle(rng), b = angle(rng);
    const Point3 tr{shift(rng), shift(rng), shift(rng)};
    auto rigid = [&](const Point3& p) {
      // Rotate about z then x, then translate.
      const double x1 = std::cos(a) * p.x - std::sin(a) * p.y;
      const double y1 = std::sin(a) * p.x + std::cos(a) * p.y;
      const double z1 = p.z;
      const double y2 = std::cos(b) * y1 - std::sin(b) * z1;
      const double z2 = std::sin(b) * y1 + std::cos(b) * z1;
      return Point3{x1 + tr.x, y2 + tr.y, z2 + tr.z};
    };
    Trajectory qm, refm;
    for (const auto& p : q.waypoints) qm.waypoints.push_back(rigid(p));
    for (const auto& p : ref.waypoints) refm.waypoints.push_back(rigid(p));
    CHECK_THAT(path_cost(qm, refm).value, Catch::Matchers::WithinAbs(base, 1e-9));
  }
}

TEST_CASE("degenerate references are flagged") {
  Trajectory q;
  q.waypoints = {{0, 0, 0}, {1, 1, 0}, {2, 0, 0}};
  Trajectory ref;
  ref.waypoints = {{5, 5, 5}};
  const auto result = path_cost(q, ref);
  CHECK(result.degenerate_reference);
  CHECK(result.value >= 0.0);
  CHECK_THROWS_AS(path_cost(Trajectory{}, q), std::invalid_argument);
  CHECK_THROWS_AS(path_cost(q, Trajectory{}), std::invalid_argument);
}

TEST_CASE("smoother detours score lower than jagged ones") {
  // Same endpoints, one gently curved and one zigzag path.
  Trajectory ref;
  for (int i = 0; i <= 20; ++i) ref.waypoints.push_back({0.5 * i, 0, 0});
  Trajectory gentle = ref;
  for (std::size_t i = 0; i < gentle.size(); ++i)
    gentle.waypoints[i].y = std::sin(kPi * static_cast<double>(i) / 20.0);
  Trajectory jagged = ref;
  for (std::size_t i = 0; i < jagged.size(); ++i)
    jagged.waypoints[i].y = (i % 2 == 0) ? 0.0 : 1.0;
  const double g = path_cost(gentle, ref).value;
  const double j = path_cost(jagged, ref).value;
  CHECK(g < j);
  CHECK(g >= 1.0);  // the detour cannot be smoother than its own straight reference
}
