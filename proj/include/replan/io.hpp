#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "replan/core.hpp"
#include "replan/obstacle_map.hpp"
#include "replan/planners.hpp"
#include "replan/sim.hpp"

namespace replan {

/// Shortest decimal form that round-trips the double; locale-free.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Parses one point per line, coordinates separated by whitespace or commas.
/// '#' starts a comment; blank lines are skipped. Errors carry the 1-based
/// line number.
inline std::vector<Point3> parse_xyz_text(std::istream& in, const std::string& label) {
  std::vector<Point3> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream row(line);
    std::vector<double> vals;
    double v;
    while (row >> v) vals.push_back(v);
    const bool clean = row.eof();
    if (vals.empty() && clean) continue;
    if (vals.size() != 3 || !clean)
      throw std::runtime_error(label + " line " + std::to_string(lineno) +
                               ": expected three numbers");
    const Point3 p{vals[0], vals[1], vals[2]};
    if (!is_finite(p))
      throw std::runtime_error(label + " line " + std::to_string(lineno) +
                               ": non-finite coordinate");
    out.push_back(p);
  }
  return out;
}

inline std::vector<Point3> load_xyz_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_xyz_text(in, path.filename().string());
}

namespace detail {

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32_le(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32_le(out, bits);
}

inline float get_f32_le(const unsigned char* p) {
  const std::uint32_t bits = get_u32_le(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace detail

/// Binary cloud layout: little-endian uint32 point count, then count xyz
/// triples of little-endian float32.
inline void save_cloud_binary(const std::filesystem::path& path, const std::vector<Point3>& pts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  detail::put_u32_le(out, static_cast<std::uint32_t>(pts.size()));
  for (const auto& p : pts) {
    detail::put_f32_le(out, static_cast<float>(p.x));
    detail::put_f32_le(out, static_cast<float>(p.y));
    detail::put_f32_le(out, static_cast<float>(p.z));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::vector<Point3> load_cloud_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw std::runtime_error(path.string() + ": truncated count header");
  const std::uint32_t count = detail::get_u32_le(bytes.data());
  if (bytes.size() != 4 + static_cast<std::size_t>(count) * 12)
    throw std::runtime_error(path.string() + ": size does not match point count");
  std::vector<Point3> pts;
  pts.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const unsigned char* rec = bytes.data() + 4 + static_cast<std::size_t>(i) * 12;
    pts.push_back({detail::get_f32_le(rec), detail::get_f32_le(rec + 4),
                   detail::get_f32_le(rec + 8)});
  }
  return pts;
}

/// Loads a cloud file, picking the binary layout for a ".bin" extension and
/// the text layout otherwise.
inline std::vector<Point3> load_cloud_file(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return load_cloud_binary(path);
  return load_xyz_text(path);
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "x,y,z\n";
  for (const auto& p : traj.waypoints)
    out << format_number(p.x) << ',' << format_number(p.y) << ',' << format_number(p.z) << '\n';
}

// ---------------------------------------------------------------------------
// JSON helpers

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

inline Point3 point_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    throw std::runtime_error(what + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json point_to_json(const Point3& p) {
  return nlohmann::json::array({p.x, p.y, p.z});
}

/// Applies config overrides from a JSON object onto `base`. Unknown keys are
/// rejected so typos fail loudly.
inline PlannerConfig config_from_json(const nlohmann::json& j, PlannerConfig base = {}) {
  if (!j.is_object()) throw std::runtime_error("config: expected an object");
  static const std::set<std::string> known{
      "replanning_dis",       "obs_avoid_dis",         "obstacle_fail_safe_dis",
      "conjugate_diameter",   "max_iterations",        "step_size",
      "neighbor_radius",      "goal_tolerance",        "waypoint_reached_delta",
      "rng_seed",             "nearest_sphere_npts",   "nearest_sphere_attempts",
      "nearest_sphere_radius", "refine_to_budget"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw std::runtime_error("config: unknown key '" + item.key() + "'");
  if (j.contains("replanning_dis")) base.replanning_dis = j["replanning_dis"].get<double>();
  if (j.contains("obs_avoid_dis")) base.obs_avoid_dis = j["obs_avoid_dis"].get<double>();
  if (j.contains("obstacle_fail_safe_dis"))
    base.obstacle_fail_safe_dis = j["obstacle_fail_safe_dis"].get<double>();
  if (j.contains("conjugate_diameter")) base.conjugate_diameter = j["conjugate_diameter"].get<double>();
  if (j.contains("max_iterations")) base.max_iterations = j["max_iterations"].get<std::size_t>();
  if (j.contains("step_size")) base.step_size = j["step_size"].get<double>();
  if (j.contains("neighbor_radius")) base.neighbor_radius = j["neighbor_radius"].get<double>();
  if (j.contains("goal_tolerance")) base.goal_tolerance = j["goal_tolerance"].get<double>();
  if (j.contains("waypoint_reached_delta"))
    base.waypoint_reached_delta = j["waypoint_reached_delta"].get<double>();
  if (j.contains("rng_seed")) base.rng_seed = j["rng_seed"].get<std::uint64_t>();
  if (j.contains("nearest_sphere_npts"))
    base.nearest_sphere_npts = j["nearest_sphere_npts"].get<std::size_t>();
  if (j.contains("nearest_sphere_attempts"))
    base.nearest_sphere_attempts = j["nearest_sphere_attempts"].get<std::size_t>();
  if (j.contains("nearest_sphere_radius"))
    base.nearest_sphere_radius = j["nearest_sphere_radius"].get<double>();
  if (j.contains("refine_to_budget")) base.refine_to_budget = j["refine_to_budget"].get<bool>();
  base.validate();
  return base;
}

// ---------------------------------------------------------------------------
// Scenes: static planning problems for `plan` and the planner benchmark.

struct SceneObstacle {
  enum class Kind { sphere, box, cloud };
  Kind kind = Kind::sphere;
  Point3 center;
  double radius = 0.5;
  Point3 box_min, box_max;
  std::size_t density = 140;
  std::filesystem::path cloud_file;
};

struct Scene {
  Aabb bounds;
  Point3 start, goal;
  std::vector<SceneObstacle> obstacles;
  PlannerConfig config;
  std::uint64_t rng_seed = 1;
};

/// Parses a scene document. Relative cloud paths resolve against `base_dir`.
inline Scene scene_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw std::runtime_error("scene: expected an object");
  for (const auto& item : j.items()) {
    static const std::set<std::string> known{"bounds", "start", "goal", "obstacles", "rng_seed",
                                             "config"};
    if (!known.count(item.key())) throw std::runtime_error("scene: unknown key '" + item.key() + "'");
  }
  Scene scene;
  if (!j.contains("bounds") || !j["bounds"].is_object())
    throw std::runtime_error("scene: missing bounds object");
  scene.bounds.min = point_from_json(j["bounds"].at("min"), "scene bounds.min");
  scene.bounds.max = point_from_json(j["bounds"].at("max"), "scene bounds.max");
  scene.bounds.validate();
  scene.start = point_from_json(j.at("start"), "scene start");
  scene.goal = point_from_json(j.at("goal"), "scene goal");
  if (j.contains("rng_seed")) scene.rng_seed = j["rng_seed"].get<std::uint64_t>();
  if (j.contains("config")) scene.config = config_from_json(j["config"]);
  for (const auto& ob : j.value("obstacles", nlohmann::json::array())) {
    SceneObstacle so;
    if (ob.contains("cloud_file")) {
      so.kind = SceneObstacle::Kind::cloud;
      std::filesystem::path p = ob["cloud_file"].get<std::string>();
      so.cloud_file = p.is_absolute() ? p : base_dir / p;
    } else if (ob.contains("box_min")) {
      so.kind = SceneObstacle::Kind::box;
      so.box_min = point_from_json(ob.at("box_min"), "scene obstacle box_min");
      so.box_max = point_from_json(ob.at("box_max"), "scene obstacle box_max");
      so.density = ob.value("density", so.density);
    } else {
      so.kind = SceneObstacle::Kind::sphere;
      so.center = point_from_json(ob.at("center"), "scene obstacle center");
      so.radius = ob.value("radius", so.radius);
      so.density = ob.value("density", so.density);
      if (!(so.radius > 0.0)) throw std::runtime_error("scene: obstacle radius must be positive");
    }
    if (so.kind != SceneObstacle::Kind::cloud && so.density == 0)
      throw std::runtime_error("scene: obstacle density must be positive");
    scene.obstacles.push_back(std::move(so));
  }
  return scene;
}

inline Scene load_scene(const std::filesystem::path& path) {
  return scene_from_json(load_json_file(path), path.parent_path());
}

namespace detail {

inline std::mt19937_64 obstacle_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index + 1)};
  return std::mt19937_64(seq);
}

inline Point3 unit_gaussian_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double x = gauss(rng), y = gauss(rng), z = gauss(rng);
  const double n = std::sqrt(x * x + y * y + z * z);
  if (n < 1e-12) return {1.0, 0.0, 0.0};
  return {x / n, y / n, z / n};
}

// Uniform point on an axis-aligned box surface: pick a face by area, then a
// uniform point on it.
inline Point3 box_surface_point(const Point3& lo, const Point3& hi, std::mt19937_64& rng) {
  const double dx = hi.x - lo.x, dy = hi.y - lo.y, dz = hi.z - lo.z;
  const double axy = dx * dy, ayz = dy * dz, azx = dz * dx;
  const double total = 2.0 * (axy + ayz + azx);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double pick = uni(rng) * total;
  const double u = uni(rng), v = uni(rng);
  if (pick < axy) return {lo.x + u * dx, lo.y + v * dy, lo.z};
  pick -= axy;
  if (pick < axy) return {lo.x + u * dx, lo.y + v * dy, hi.z};
  pick -= axy;
  if (pick < ayz) return {lo.x, lo.y + u * dy, lo.z + v * dz};
  pick -= ayz;
  if (pick < ayz) return {hi.x, lo.y + u * dy, lo.z + v * dz};
  pick -= ayz;
  if (pick < azx) return {lo.x + u * dx, lo.y, lo.z + v * dz};
  return {lo.x + u * dx, hi.y, lo.z + v * dz};
}

}  // namespace detail

/// All obstacle points of a scene, deterministic in (rng_seed, obstacle index).
inline std::vector<Point3> scene_obstacle_points(const Scene& scene) {
  std::vector<Point3> out;
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto& ob = scene.obstacles[i];
    if (ob.kind == SceneObstacle::Kind::cloud) {
      const auto pts = load_cloud_file(ob.cloud_file);
      out.insert(out.end(), pts.begin(), pts.end());
      continue;
    }
    auto rng = detail::obstacle_rng(scene.rng_seed, i);
    for (std::size_t s = 0; s < ob.density; ++s) {
      if (ob.kind == SceneObstacle::Kind::sphere) {
        const Point3 d = detail::unit_gaussian_direction(rng);
        out.push_back(ob.center + ob.radius * d);
      } else {
        out.push_back(detail::box_surface_point(ob.box_min, ob.box_max, rng));
      }
    }
  }
  return out;
}

inline ObstacleMap scene_to_map(const Scene& scene, double resolution = 0.2) {
  ObstacleMap map(resolution, 10);
  PointCloud cloud;
  cloud.points = scene_obstacle_points(scene);
  map.insert_cloud(cloud);
  return map;
}

/// Cluttered 10 m cube: start and goal on the x axis midline, spheres
/// stratified along the corridor between them.
inline Scene generate_scene(std::uint64_t seed, std::size_t obstacle_count = 14) {
  Scene scene;
  scene.bounds = {{0, 0, 0}, {10, 10, 10}};
  scene.start = {1, 5, 5};
  scene.goal = {9, 5, 5};
  scene.rng_seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> lateral(2.0, 8.0);
  std::uniform_real_distribution<double> size(0.3, 0.6);
  for (std::size_t i = 0; i < obstacle_count; ++i) {
    SceneObstacle ob;
    ob.kind = SceneObstacle::Kind::sphere;
    ob.radius = size(rng);
    // Stratified x keeps the corridor evenly cluttered; keep a margin around
    // the endpoints.
    const double band = 6.0 / static_cast<double>(obstacle_count);
    do {
      ob.center = {2.0 + band * (static_cast<double>(i) + jitter(rng)), lateral(rng), lateral(rng)};
    } while (distance(ob.center, scene.start) < 1.5 + ob.radius ||
             distance(ob.center, scene.goal) < 1.5 + ob.radius);
    ob.density = 140;
    scene.obstacles.push_back(ob);
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Scenarios: closed-loop simulation inputs.

/// Parses a scenario document. Relative cloud paths resolve against
/// `base_dir`.
inline Scenario scenario_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw std::runtime_error("scenario: expected an object");
  for (const auto& item : j.items()) {
    static const std::set<std::string> known{
        "waypoints", "static_obstacles", "dynamic_obstacles", "mav",        "config",
        "tick_hz",   "duration_s",       "sensor_range",      "map_resolution", "rng_seed"};
    if (!known.count(item.key()))
      throw std::runtime_error("scenario: unknown key '" + item.key() + "'");
  }
  Scenario sc;
  if (!j.contains("waypoints") || !j["waypoints"].is_array())
    throw std::runtime_error("scenario: missing waypoints array");
  for (const auto& w : j["waypoints"]) sc.waypoints.push_back(point_from_json(w, "scenario waypoint"));
  for (const auto& ob : j.value("static_obstacles", nlohmann::json::array())) {
    if (ob.contains("cloud_file")) {
      std::filesystem::path p = ob["cloud_file"].get<std::string>();
      PointCloud cloud;
      cloud.points = load_cloud_file(p.is_absolute() ? p : base_dir / p);
      sc.static_clouds.push_back(std::move(cloud));
      continue;
    }
    SphereObstacle so;
    so.center = point_from_json(ob.at("center"), "scenario obstacle center");
    so.radius = ob.value("radius", so.radius);
    so.density = ob.value("density", so.density);
    sc.obstacles.push_back(so);
  }
  for (const auto& ob : j.value("dynamic_obstacles", nlohmann::json::array())) {
    SphereObstacle so;
    so.center = point_from_json(ob.at("center"), "scenario obstacle center");
    so.velocity = point_from_json(ob.at("velocity"), "scenario obstacle velocity");
    so.radius = ob.value("radius", so.radius);
    so.density = ob.value("density", so.density);
    sc.obstacles.push_back(so);
  }
  if (j.contains("mav")) {
    const auto& m = j["mav"];
    sc.mav.speed = m.value("speed", sc.mav.speed);
    if (m.contains("start")) sc.mav.start.position = point_from_json(m["start"], "scenario mav start");
    sc.mav.start.yaw = m.value("yaw", sc.mav.start.yaw);
  }
  if (j.contains("config")) sc.config = config_from_json(j["config"]);
  sc.tick_hz = j.value("tick_hz", sc.tick_hz);
  sc.duration_s = j.value("duration_s", sc.duration_s);
  sc.sensor_range = j.value("sensor_range", sc.sensor_range);
  sc.map_resolution = j.value("map_resolution", sc.map_resolution);
  if (j.contains("rng_seed")) sc.rng_seed = j["rng_seed"].get<std::uint64_t>();
  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(load_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Simulation log output.

inline void write_simlog_csv(std::ostream& out, const SimLog& log) {
  out << "tick,time,px,py,pz,yaw,vx,vy,vz,yaw_rate,mode,replans\n";
  for (const auto& rec : log.ticks) {
    out << rec.tick << ',' << format_number(rec.time) << ',' << format_number(rec.pose.position.x)
        << ',' << format_number(rec.pose.position.y) << ',' << format_number(rec.pose.position.z)
        << ',' << format_number(rec.pose.yaw) << ',' << format_number(rec.velocity.x) << ','
        << format_number(rec.velocity.y) << ',' << format_number(rec.velocity.z) << ','
        << format_number(rec.yaw_rate) << ',' << to_string(rec.mode) << ',' << rec.replan_count
        << '\n';
  }
}

inline nlohmann::json simlog_summary_json(const SimLog& log) {
  nlohmann::json j;
  j["outcome"] = log.outcome;
  j["completed"] = log.completed;
  j["ticks"] = log.ticks.size();
  j["replan_count"] = log.replan_count;
  j["failed_replans"] = log.failed_replans;
  j["min_obstacle_distance"] =
      std::isfinite(log.min_obstacle_distance) ? nlohmann::json(log.min_obstacle_distance)
                                               : nlohmann::json();
  j["flown_cost_vs_target"] = std::isfinite(log.flown_cost_vs_target)
                                  ? nlohmann::json(log.flown_cost_vs_target)
                                  : nlohmann::json();
  j["replan_seconds"] = log.replan_seconds;
  j["flown_waypoints"] = log.flown.size();
  return j;
}

}  // namespace replan
