#pragma once

#include <optional>
#include <string>
#include <vector>

#include "steinmcl/gaussian_cloud.hpp"
#include "steinmcl/rng.hpp"
#include "steinmcl/se3.hpp"

namespace steinmcl::sim {

// Finite rectangle patch: origin corner plus two edge vectors. Worlds are
// built from these so ray casting has an exact analytic answer.
struct Rect {
  Vec3 origin;
  Vec3 edge_u;
  Vec3 edge_v;

  Vec3 normal() const { return edge_u.cross(edge_v).normalized(); }
  double area() const { return edge_u.cross(edge_v).norm(); }
};

struct World {
  std::vector<Rect> surfaces;

  double total_area() const;
  Aabb bounds() const;
  // Range to the closest surface along the ray, if any within max_range.
  std::optional<double> raycast(const Vec3& org, const Vec3& dir, double max_range) const;
};

// Axis-aligned box as 6 rectangles.
void add_box(World& world, const Vec3& lo, const Vec3& hi);

// Wall in the y = const plane spanning [x0, x1] x [z0, z1], with an optional
// door gap [door_x0, door_x1] x [0, door_h] cut out of it.
void add_wall_y(World& world, double y, double x0, double x1, double z0, double z1,
                double door_x0 = 0.0, double door_x1 = 0.0, double door_h = 0.0);

struct CorridorSpec {
  double corridor_length = 40.0;
  double corridor_width = 3.0;
  double height = 3.0;
  int n_rooms = 4;        // identical rooms along the +y side of the corridor
  double room_width = 6.0;   // along x
  double room_depth = 5.0;   // along y
  double door_width = 1.2;
  double door_height = 2.2;
  // Corridor clutter (crates along the -y wall). The rooms stay identical, so
  // room-level ambiguity survives, but corridor cross-sections become
  // distinguishable the way real corridors are.
  bool furniture = true;
};

// Corridor with identical rooms on one side: deliberately repetitive so
// translation hypotheses alias between rooms until doors or the end walls
// come into view.
World corridor_world(const CorridorSpec& spec);

// Single rectangular room.
World box_room(const Vec3& size);

// Surface-sampled map cloud: round(area * density) uniform samples per
// rectangle, with GICP covariances attached.
GaussianCloud sample_world(const World& world, double density_per_m2,
                           std::uint64_t seed, int covariance_k = 10,
                           double epsilon_plane = 1e-3);

struct SensorSpec {
  int n_azimuth = 16;
  std::vector<double> elevations_deg = {-30.0, -10.0, 0.0, 10.0, 30.0};
  double max_range = 30.0;
  double min_range = 0.2;
  double noise_sigma = 0.01;  // m, applied along the ray

  int ray_count() const { return n_azimuth * static_cast<int>(elevations_deg.size()); }
};

// Ray-cast scan from the given pose, returned in the sensor frame. Rays that
// miss every surface within max_range produce no point.
std::vector<Vec3> simulate_scan_points(const World& world, const Pose& pose,
                                       const SensorSpec& sensor, SplitMix64& rng);

}  // namespace steinmcl::sim
