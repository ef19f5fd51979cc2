#pragma once

#include <string>
#include <vector>

#include "steinmcl/config.hpp"
#include "steinmcl/eval.hpp"
#include "steinmcl/filter.hpp"
#include "steinmcl/sim/world.hpp"
#include "steinmcl/trajectory_io.hpp"

namespace steinmcl::sim {

struct Teleport {
  int frame = 0;   // must fall inside an occlusion window
  Vec3 position;   // yaw is preserved: the sensor is carried, not spun
};

// A full synthetic experiment: world template, scripted ground-truth
// trajectory, sensor and odometry noise, occlusion windows with optional
// teleports (kidnapping).
struct Scenario {
  std::string name = "custom";

  std::string world_kind = "corridor";  // corridor | box
  CorridorSpec corridor;
  Vec3 box_size = Vec3(10.0, 10.0, 3.0);
  double density = 100.0;  // map sampling, points per m^2

  SensorSpec sensor;
  double sensor_height = 1.5;

  double rate_hz = 10.0;
  double speed = 1.0;  // m/s along the waypoint path
  int n_frames = 150;

  double odom_sigma_rot = 0.002;    // rad per axis per frame
  double odom_sigma_trans = 0.005;  // m per axis per frame

  std::vector<Vec3> waypoints;  // ground-truth path (z = sensor_height)
  std::vector<OcclusionWindow> occlusions;
  std::vector<Teleport> teleports;

  std::uint64_t seed = 1;

  World build_world() const;
  Mat6 odom_cov() const;
};

// Built-in scenarios; "corridor_easy" and "corridor_kidnap" mirror the
// global-localization and kidnap-recovery protocols.
Scenario scenario_preset(const std::string& name);

// Scenario from a key=value file. A "preset" key selects the base scenario;
// all other keys override its fields.
Scenario scenario_from_file(const std::string& path);

// Frame-by-frame ground truth. Walks the waypoint polyline at `speed` with
// smoothed heading; holds still once the path is exhausted; freezes during
// occlusion windows and jumps at teleports (yaw preserved).
std::vector<TrajPoint> build_trajectory(const Scenario& sc);

// Noisy odometry between consecutive ground-truth poses; invalid (identity,
// diffusion handled by the filter) while the sensor is occluded.
std::vector<OdometryInput> build_odometry(const Scenario& sc,
                                          const std::vector<TrajPoint>& truth);

struct ScenarioResult {
  EvalReport report;
  std::vector<TrajPoint> estimated;
  std::vector<TrajPoint> truth;
};

// Closed-loop run: simulate scans, feed the filter, write artifacts
// (est.tum, gt.tum, report.txt, stats.csv, optional posterior snapshots)
// under out_dir when it is non-empty.
ScenarioResult run_scenario(const Scenario& sc, const FilterConfig& cfg,
                            const std::string& out_dir = "",
                            int snapshot_every = 0);

// Pre-generate scans and odometry for replay: map.ply, scans/NNNNN.ply,
// odom.txt, gt.tum.
void simulate_to_dir(const Scenario& sc, const std::string& out_dir);

bool is_occluded(const Scenario& sc, int frame);

}  // namespace steinmcl::sim
