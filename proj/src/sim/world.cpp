#include "steinmcl/sim/world.hpp"

#include <cmath>
#include <stdexcept>

namespace steinmcl::sim {

double World::total_area() const {
  double a = 0.0;
  for (const Rect& r : surfaces) a += r.area();
  return a;
}

Aabb World::bounds() const {
  if (surfaces.empty()) throw std::invalid_argument("World::bounds: no surfaces");
  Aabb b{surfaces[0].origin, surfaces[0].origin};
  for (const Rect& r : surfaces) {
    for (const Vec3& c : {r.origin, Vec3(r.origin + r.edge_u), Vec3(r.origin + r.edge_v),
                          Vec3(r.origin + r.edge_u + r.edge_v)}) {
      b.min = b.min.cwiseMin(c);
      b.max = b.max.cwiseMax(c);
    }
  }
  return b;
}

std::optional<double> World::raycast(const Vec3& org, const Vec3& dir,
                                     double max_range) const {
  double best = max_range;
  bool hit = false;
  for (const Rect& r : surfaces) {
    const Vec3 n = r.edge_u.cross(r.edge_v);
    const double denom = dir.dot(n);
    if (std::abs(denom) < 1e-12) continue;  // parallel
    const double t = (r.origin - org).dot(n) / denom;
    if (t <= 1e-9 || t >= best) continue;
    const Vec3 q = org + t * dir - r.origin;
    const double uu = r.edge_u.squaredNorm();
    const double vv = r.edge_v.squaredNorm();
    const double u = q.dot(r.edge_u) / uu;
    const double v = q.dot(r.edge_v) / vv;
    if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
    best = t;
    hit = true;
  }
  if (!hit) return std::nullopt;
  return best;
}

void add_box(World& world, const Vec3& lo, const Vec3& hi) {
  const Vec3 d = hi - lo;
  const Vec3 ex(d.x(), 0, 0), ey(0, d.y(), 0), ez(0, 0, d.z());
  world.surfaces.push_back({lo, ex, ey});                       // floor
  world.surfaces.push_back({Vec3(lo.x(), lo.y(), hi.z()), ex, ey});  // ceiling
  world.surfaces.push_back({lo, ex, ez});                       // y = lo.y
  world.surfaces.push_back({Vec3(lo.x(), hi.y(), lo.z()), ex, ez});  // y = hi.y
  world.surfaces.push_back({lo, ey, ez});                       // x = lo.x
  world.surfaces.push_back({Vec3(hi.x(), lo.y(), lo.z()), ey, ez});  // x = hi.x
}

void add_wall_y(World& world, double y, double x0, double x1, double z0, double z1,
                double door_x0, double door_x1, double door_h) {
  auto rect = [&](double ax0, double ax1, double az0, double az1) {
    if (ax1 - ax0 <= 1e-9 || az1 - az0 <= 1e-9) return;
    world.surfaces.push_back({Vec3(ax0, y, az0), Vec3(ax1 - ax0, 0, 0), Vec3(0, 0, az1 - az0)});
  };
  if (door_x1 <= door_x0 || door_h <= z0) {
    rect(x0, x1, z0, z1);
    return;
  }
  rect(x0, door_x0, z0, z1);          // left of the door
  rect(door_x1, x1, z0, z1);          // right of the door
  rect(door_x0, door_x1, door_h, z1); // lintel above the door
}

World corridor_world(const CorridorSpec& s) {
  if (s.n_rooms < 1) throw std::invalid_argument("corridor_world: need at least one room");
  World w;
  const double h = s.height;
  const double len = s.corridor_length;
  const double cw = s.corridor_width;
  const double pitch = len / s.n_rooms;

  // Corridor runs along x in [0, len] x [0, cw]; rooms attach on +y.
  w.surfaces.push_back({Vec3(0, 0, 0), Vec3(len, 0, 0), Vec3(0, cw, 0)});  // floor
  w.surfaces.push_back({Vec3(0, 0, h), Vec3(len, 0, 0), Vec3(0, cw, 0)});  // ceiling
  add_wall_y(w, 0.0, 0.0, len, 0.0, h);  // solid -y wall
  w.surfaces.push_back({Vec3(0, 0, 0), Vec3(0, cw, 0), Vec3(0, 0, h)});    // x = 0 end
  w.surfaces.push_back({Vec3(len, 0, 0), Vec3(0, cw, 0), Vec3(0, 0, h)});  // x = len end

  // Shared +y wall: segments between the door openings, lintels above them.
  double wall_x = 0.0;
  for (int r = 0; r < s.n_rooms; ++r) {
    const double cx = (r + 0.5) * pitch;
    const double dx0 = cx - 0.5 * s.door_width;
    const double dx1 = cx + 0.5 * s.door_width;
    add_wall_y(w, cw, wall_x, dx0, 0.0, h);
    add_wall_y(w, cw, dx0, dx1, s.door_height, h);  // lintel
    wall_x = dx1;
  }
  add_wall_y(w, cw, wall_x, len, 0.0, h);

  if (s.furniture) {
    // Crates against the -y wall at irregular stations, clamped to the
    // corridor extent. Sizes and spots are fixed so worlds are reproducible.
    const double stations[6] = {0.08, 0.22, 0.43, 0.58, 0.77, 0.93};
    const double widths[6] = {1.2, 0.7, 1.0, 0.5, 1.4, 0.8};
    const double depths[6] = {0.8, 0.5, 0.6, 0.9, 0.5, 0.7};
    const double heights[6] = {0.9, 1.4, 0.7, 1.1, 0.8, 1.3};
    for (int b = 0; b < 6; ++b) {
      const double cx = stations[b] * len;
      const double x0 = std::max(0.2, cx - 0.5 * widths[b]);
      const double x1 = std::min(len - 0.2, cx + 0.5 * widths[b]);
      add_box(w, Vec3(x0, 0.0, 0.0), Vec3(x1, depths[b], heights[b]));
    }
  }

  // Identical rooms behind the wall, one per door.
  for (int r = 0; r < s.n_rooms; ++r) {
    const double cx = (r + 0.5) * pitch;
    const double rx0 = cx - 0.5 * s.room_width;
    const double rx1 = cx + 0.5 * s.room_width;
    const double ry0 = cw;
    const double ry1 = cw + s.room_depth;
    w.surfaces.push_back({Vec3(rx0, ry0, 0), Vec3(rx1 - rx0, 0, 0), Vec3(0, ry1 - ry0, 0)});
    w.surfaces.push_back({Vec3(rx0, ry0, h), Vec3(rx1 - rx0, 0, 0), Vec3(0, ry1 - ry0, 0)});
    add_wall_y(w, ry1, rx0, rx1, 0.0, h);
    w.surfaces.push_back({Vec3(rx0, ry0, 0), Vec3(0, ry1 - ry0, 0), Vec3(0, 0, h)});
    w.surfaces.push_back({Vec3(rx1, ry0, 0), Vec3(0, ry1 - ry0, 0), Vec3(0, 0, h)});
  }
  return w;
}

World box_room(const Vec3& size) {
  World w;
  add_box(w, Vec3::Zero(), size);
  return w;
}

GaussianCloud sample_world(const World& world, double density_per_m2,
                           std::uint64_t seed, int covariance_k, double epsilon_plane) {
  if (world.surfaces.empty()) throw std::invalid_argument("sample_world: empty world spec");
  if (!(density_per_m2 > 0.0)) throw std::invalid_argument("sample_world: density must be positive");

  std::vector<Vec3> points;
  SplitMix64 rng(seed);
  for (const Rect& r : world.surfaces) {
    const auto count = static_cast<std::size_t>(std::llround(r.area() * density_per_m2));
    for (std::size_t i = 0; i < count; ++i) {
      const double u = uniform01(rng);
      const double v = uniform01(rng);
      points.push_back(r.origin + u * r.edge_u + v * r.edge_v);
    }
  }
  if (points.size() < static_cast<std::size_t>(covariance_k) + 1) {
    throw std::invalid_argument("sample_world: too few samples; raise the density");
  }
  return estimate_covariances(points, covariance_k, epsilon_plane);
}

std::vector<Vec3> simulate_scan_points(const World& world, const Pose& pose,
                                       const SensorSpec& sensor, SplitMix64& rng) {
  std::vector<Vec3> hits;
  hits.reserve(static_cast<std::size_t>(sensor.ray_count()));
  for (const double elev_deg : sensor.elevations_deg) {
    const double elev = elev_deg * M_PI / 180.0;
    for (int a = 0; a < sensor.n_azimuth; ++a) {
      const double az = 2.0 * M_PI * a / sensor.n_azimuth;
      const Vec3 dir_s(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az),
                       std::sin(elev));
      const Vec3 dir_w = pose.R * dir_s;
      const auto range = world.raycast(pose.t, dir_w, sensor.max_range);
      double noise = sensor.noise_sigma > 0.0 ? sensor.noise_sigma * normal01(rng) : 0.0;
      if (!range) continue;
      const double r = *range + noise;
      if (r < sensor.min_range) continue;
      hits.push_back(r * dir_s);
    }
  }
  return hits;
}

}  // namespace steinmcl::sim
