#include "steinmcl/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "steinmcl/ply.hpp"

namespace steinmcl::sim {

namespace {

enum : std::uint64_t { k_stream_scan = 11, k_stream_odom = 12, k_stream_map = 13 };

Mat3 yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace

World Scenario::build_world() const {
  if (world_kind == "corridor") return corridor_world(corridor);
  if (world_kind == "box") return box_room(box_size);
  throw std::runtime_error("unknown world kind: " + world_kind);
}

Mat6 Scenario::odom_cov() const {
  Vec6 d;
  d.head<3>().setConstant(odom_sigma_rot * odom_sigma_rot);
  d.tail<3>().setConstant(odom_sigma_trans * odom_sigma_trans);
  return d.asDiagonal();
}

Scenario scenario_preset(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "corridor_easy") {
    // Start near the x=0 end wall (an unambiguous anchor), then walk down the
    // corridor past the identical rooms.
    sc.n_frames = 150;
    sc.waypoints = {{6.0, 1.5, 0.0}, {2.0, 1.5, 0.0}, {12.0, 1.5, 0.0}};
    return sc;
  }
  if (name == "corridor_kidnap") {
    // Converge, then two full occlusions with teleports into rooms; after each
    // one the path leads back out of the room into the corridor.
    sc.n_frames = 440;
    sc.waypoints = {{5.0, 1.5, 0.0}, {2.0, 1.5, 0.0}, {8.0, 1.5, 0.0},
                    {15.0, 5.5, 0.0},  // reached only after teleport 1
                    {15.0, 1.5, 0.0}, {10.0, 1.5, 0.0},
                    {35.0, 5.5, 0.0},  // reached only after teleport 2
                    {35.0, 1.5, 0.0}, {38.5, 1.5, 0.0}};
    sc.occlusions = {{80, 180}, {260, 360}};
    sc.teleports = {{130, {15.0, 5.5, 0.0}}, {310, {35.0, 5.5, 0.0}}};
    return sc;
  }
  if (name == "box_easy") {
    sc.world_kind = "box";
    sc.n_frames = 60;
    sc.waypoints = {{3.0, 3.0, 0.0}, {7.0, 3.0, 0.0}, {7.0, 7.0, 0.0}};
    return sc;
  }
  throw std::runtime_error("unknown scenario preset: " + name);
}

Scenario scenario_from_file(const std::string& path) {
  KeyValues kv = read_key_values(path);
  Scenario sc;
  const auto preset = kv.find("preset");
  if (preset != kv.end()) {
    sc = scenario_preset(preset->second);
    kv.erase(preset);
  }

  auto take_d = [&](const char* key, double& out) {
    if (auto it = kv.find(key); it != kv.end()) {
      out = std::stod(it->second);
      kv.erase(it);
    }
  };
  auto take_i = [&](const char* key, int& out) {
    if (auto it = kv.find(key); it != kv.end()) {
      out = static_cast<int>(std::stod(it->second));
      kv.erase(it);
    }
  };
  if (auto it = kv.find("world"); it != kv.end()) {
    sc.world_kind = it->second;
    kv.erase(it);
  }
  if (auto it = kv.find("name"); it != kv.end()) {
    sc.name = it->second;
    kv.erase(it);
  }
  take_d("corridor_length", sc.corridor.corridor_length);
  take_d("corridor_width", sc.corridor.corridor_width);
  take_d("height", sc.corridor.height);
  take_i("n_rooms", sc.corridor.n_rooms);
  take_d("room_width", sc.corridor.room_width);
  take_d("room_depth", sc.corridor.room_depth);
  take_d("door_width", sc.corridor.door_width);
  take_d("door_height", sc.corridor.door_height);
  take_d("box_x", sc.box_size.x());
  take_d("box_y", sc.box_size.y());
  take_d("box_z", sc.box_size.z());
  take_d("density", sc.density);
  take_i("n_azimuth", sc.sensor.n_azimuth);
  if (auto it = kv.find("elevations"); it != kv.end()) {
    sc.sensor.elevations_deg = parse_double_list(it->second);
    kv.erase(it);
  }
  take_d("max_range", sc.sensor.max_range);
  take_d("min_range", sc.sensor.min_range);
  take_d("range_noise_sigma", sc.sensor.noise_sigma);
  take_d("sensor_height", sc.sensor_height);
  take_d("rate", sc.rate_hz);
  take_d("speed", sc.speed);
  take_i("n_frames", sc.n_frames);
  take_d("odom_sigma_rot", sc.odom_sigma_rot);
  take_d("odom_sigma_trans", sc.odom_sigma_trans);
  if (auto it = kv.find("seed"); it != kv.end()) {
    sc.seed = std::stoull(it->second);
    kv.erase(it);
  }
  if (auto it = kv.find("waypoints"); it != kv.end()) {
    sc.waypoints.clear();
    std::stringstream ss(it->second);
    std::string part;
    while (std::getline(ss, part, ';')) {
      const auto nums = parse_double_list(part);
      if (nums.size() < 2) throw std::runtime_error("waypoints: expected 'x,y[,z]' entries");
      sc.waypoints.emplace_back(nums[0], nums[1], nums.size() > 2 ? nums[2] : 0.0);
    }
    kv.erase(it);
  }
  if (auto it = kv.find("occlusions"); it != kv.end()) {
    sc.occlusions.clear();
    std::stringstream ss(it->second);
    std::string part;
    while (std::getline(ss, part, ',')) {
      int b, e;
      if (std::sscanf(part.c_str(), "%d:%d", &b, &e) != 2) {
        throw std::runtime_error("occlusions: expected 'begin:end' entries");
      }
      sc.occlusions.push_back({b, e});
    }
    kv.erase(it);
  }
  if (auto it = kv.find("teleports"); it != kv.end()) {
    sc.teleports.clear();
    std::stringstream ss(it->second);
    std::string part;
    while (std::getline(ss, part, ';')) {
      Teleport t;
      if (std::sscanf(part.c_str(), "%d:%lf,%lf", &t.frame, &t.position.x(),
                      &t.position.y()) != 3) {
        throw std::runtime_error("teleports: expected 'frame:x,y' entries");
      }
      sc.teleports.push_back(t);
    }
    kv.erase(it);
  }
  reject_unknown_keys(kv, path);

  for (const OcclusionWindow& w : sc.occlusions) {
    if (w.begin < 0 || w.end <= w.begin || w.end > sc.n_frames) {
      throw std::runtime_error("occlusion window outside the trajectory");
    }
  }
  return sc;
}

bool is_occluded(const Scenario& sc, int frame) {
  for (const OcclusionWindow& w : sc.occlusions) {
    if (frame >= w.begin && frame < w.end) return true;
  }
  return false;
}

std::vector<TrajPoint> build_trajectory(const Scenario& sc) {
  if (sc.waypoints.empty()) throw std::runtime_error("build_trajectory: no waypoints");
  const double dt = 1.0 / sc.rate_hz;

  std::vector<TrajPoint> traj;
  traj.reserve(static_cast<std::size_t>(sc.n_frames));

  Vec3 position = sc.waypoints.front();
  position.z() = sc.sensor_height;
  std::size_t target = 1;
  Vec3 heading = Vec3::UnitX();
  if (sc.waypoints.size() > 1) {
    Vec3 d = sc.waypoints[1] - sc.waypoints[0];
    d.z() = 0.0;
    if (d.norm() > 1e-9) heading = d.normalized();
  }

  for (int f = 0; f < sc.n_frames; ++f) {
    const bool occluded = is_occluded(sc, f);
    for (const Teleport& tp : sc.teleports) {
      if (tp.frame == f) {
        position.head<2>() = tp.position.head<2>();
        position.z() = sc.sensor_height;
        // Resume the walk after the waypoint matching the teleport position,
        // so the scripted path continues from the new room.
        for (std::size_t wi = 0; wi < sc.waypoints.size(); ++wi) {
          if ((sc.waypoints[wi].head<2>() - position.head<2>()).norm() < 0.5) {
            target = wi + 1;
          }
        }
      }
    }

    if (!occluded && target < sc.waypoints.size()) {
      double budget = sc.speed * dt;
      while (budget > 1e-12 && target < sc.waypoints.size()) {
        Vec3 goal = sc.waypoints[target];
        goal.z() = sc.sensor_height;
        const Vec3 to_goal = goal - position;
        const double dist = to_goal.norm();
        if (dist < 1e-9) {
          ++target;
          continue;
        }
        const Vec3 dir = to_goal / dist;
        // Heading smoothing keeps odometry turns gradual at corners.
        heading = (0.7 * heading + 0.3 * dir);
        heading.z() = 0.0;
        if (heading.norm() < 1e-9) heading = dir;
        heading.normalize();
        const double step = std::min(dist, budget);
        position += step * dir;
        budget -= step;
        if (step >= dist - 1e-12) ++target;
      }
    }

    TrajPoint p;
    p.stamp = f * dt;
    p.pose.t = position;
    p.pose.R = yaw_rotation(std::atan2(heading.y(), heading.x()));
    traj.push_back(p);
  }
  return traj;
}

std::vector<OdometryInput> build_odometry(const Scenario& sc,
                                          const std::vector<TrajPoint>& truth) {
  std::vector<OdometryInput> odo(truth.size());
  const Mat6 cov = sc.odom_cov();
  Vec6 sigma;
  sigma.head<3>().setConstant(sc.odom_sigma_rot);
  sigma.tail<3>().setConstant(sc.odom_sigma_trans);

  for (std::size_t f = 0; f < truth.size(); ++f) {
    OdometryInput& o = odo[f];
    if (is_occluded(sc, static_cast<int>(f))) {
      // A blocked sensor also blocks the scan-matching odometry.
      o.delta = Pose::identity();
      o.cov = Mat6::Zero();
      o.valid = false;
      continue;
    }
    const Pose delta_gt =
        f == 0 ? Pose::identity() : truth[f - 1].pose.inverse() * truth[f].pose;
    SplitMix64 rng(mix_seed(sc.seed, k_stream_odom, f));
    const Vec6 noise = sigma.cwiseProduct(normal6(rng));
    o.delta = delta_gt * se3_exp(noise);
    o.cov = cov;
    o.valid = true;
  }
  return odo;
}

namespace {

GaussianCloud scan_for_frame(const Scenario& sc, const World& world,
                             const std::vector<TrajPoint>& truth, int frame,
                             const FilterConfig& cfg) {
  if (is_occluded(sc, frame)) return {};
  SplitMix64 rng(mix_seed(sc.seed, k_stream_scan, static_cast<std::uint64_t>(frame)));
  const std::vector<Vec3> pts =
      simulate_scan_points(world, truth[static_cast<std::size_t>(frame)].pose, sc.sensor, rng);
  return make_scan_cloud(pts, cfg);
}

void write_snapshot(const std::string& path, const ParticleSet& set) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open snapshot file: " + path);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Eigen::Quaterniond q(set.poses[i].R);
    std::fprintf(f, "%d %.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9g\n", set.id[i],
                 set.poses[i].t.x(), set.poses[i].t.y(), set.poses[i].t.z(), q.x(),
                 q.y(), q.z(), q.w(), set.log_post[i]);
  }
  std::fclose(f);
}

}  // namespace

ScenarioResult run_scenario(const Scenario& sc, const FilterConfig& cfg,
                            const std::string& out_dir, int snapshot_every) {
  namespace fs = std::filesystem;
  const bool writing = !out_dir.empty();
  if (writing) {
    fs::create_directories(out_dir);
    if (snapshot_every > 0) fs::create_directories(out_dir + "/snapshots");
  }

  const World world = sc.build_world();
  const GaussianCloud map = sample_world(world, sc.density, mix_seed(sc.seed, k_stream_map),
                                         cfg.covariance_k, cfg.epsilon_plane);
  FilterEngine engine(map, cfg);
  engine.init_uniform(engine.map().bounds);

  const std::vector<TrajPoint> truth = build_trajectory(sc);
  const std::vector<OdometryInput> odo = build_odometry(sc, truth);

  ScenarioResult result;
  result.truth = truth;
  result.estimated.reserve(truth.size());

  std::FILE* stats = nullptr;
  if (writing) {
    stats = std::fopen((out_dir + "/stats.csv").c_str(), "w");
    if (!stats) throw std::runtime_error("cannot open stats.csv in " + out_dir);
    std::fprintf(stats,
                 "frame,stamp,occluded,rep_id,rep_x,rep_y,rep_z,rep_log_post,"
                 "trans_err,mean_n_matched,observation_rejected,overflow,"
                 "predict_ms,neighbor_ms,likelihood_ms,update_ms,posterior_ms,total_ms\n");
  }

  StageTimes sum_times;
  for (int f = 0; f < sc.n_frames; ++f) {
    const GaussianCloud scan = scan_for_frame(sc, world, truth, f, cfg);
    const FrameResult fr = engine.step(scan, odo[static_cast<std::size_t>(f)]);
    result.estimated.push_back({truth[static_cast<std::size_t>(f)].stamp, fr.representative});

    sum_times.predict_ms += fr.times.predict_ms;
    sum_times.neighbor_ms += fr.times.neighbor_ms;
    sum_times.likelihood_ms += fr.times.likelihood_ms;
    sum_times.update_ms += fr.times.update_ms;
    sum_times.posterior_ms += fr.times.posterior_ms;
    sum_times.total_ms += fr.times.total_ms;

    if (stats) {
      const double terr =
          (fr.representative.t - truth[static_cast<std::size_t>(f)].pose.t).norm();
      std::fprintf(stats,
                   "%d,%.3f,%d,%d,%.6f,%.6f,%.6f,%.6g,%.6f,%.2f,%d,%lld,"
                   "%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n",
                   f, truth[static_cast<std::size_t>(f)].stamp, fr.scan_empty ? 1 : 0,
                   fr.rep_id, fr.representative.t.x(), fr.representative.t.y(),
                   fr.representative.t.z(), fr.rep_log_post, terr, fr.mean_n_matched,
                   fr.observation_rejected ? 1 : 0,
                   static_cast<long long>(fr.neighbor_stats.overflow_dropped),
                   fr.times.predict_ms, fr.times.neighbor_ms, fr.times.likelihood_ms,
                   fr.times.update_ms, fr.times.posterior_ms, fr.times.total_ms);
    }
    if (writing && snapshot_every > 0 && f % snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "/snapshots/snap_%06d.txt", f);
      write_snapshot(out_dir + name, engine.particles());
    }
  }
  if (stats) std::fclose(stats);

  AteOptions ate_opts;
  ate_opts.occlusions = sc.occlusions;
  result.report = evaluate_ate(result.estimated, result.truth, 0, ate_opts);
  const double nf = static_cast<double>(std::max(sc.n_frames, 1));
  result.report.mean_times = {sum_times.predict_ms / nf,    sum_times.neighbor_ms / nf,
                              sum_times.likelihood_ms / nf, sum_times.update_ms / nf,
                              sum_times.posterior_ms / nf,  sum_times.total_ms / nf};

  if (writing) {
    write_tum(out_dir + "/est.tum", result.estimated);
    write_tum(out_dir + "/gt.tum", result.truth);
    // report.txt carries only run-deterministic fields; timings go to
    // stats.csv, which is expected to differ between replays.
    std::FILE* rep = std::fopen((out_dir + "/report.txt").c_str(), "w");
    if (!rep) throw std::runtime_error("cannot open report.txt in " + out_dir);
    std::fprintf(rep, "scenario: %s\nseed: %llu\nparticles: %d\n", sc.name.c_str(),
                 static_cast<unsigned long long>(sc.seed), cfg.n_particles);
    const std::string body = format_report(result.report);
    std::fwrite(body.data(), 1, body.size(), rep);
    std::fclose(rep);
  }
  return result;
}

void simulate_to_dir(const Scenario& sc, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/scans");

  const World world = sc.build_world();
  // Raw surface samples; covariances are re-estimated by the consumer.
  std::vector<Vec3> map_points;
  SplitMix64 map_rng(mix_seed(sc.seed, k_stream_map));
  for (const Rect& r : world.surfaces) {
    const auto count = static_cast<std::size_t>(std::llround(r.area() * sc.density));
    for (std::size_t i = 0; i < count; ++i) {
      const double u = uniform01(map_rng);
      const double v = uniform01(map_rng);
      map_points.push_back(r.origin + u * r.edge_u + v * r.edge_v);
    }
  }
  write_ply_points(out_dir + "/map.ply", map_points);

  const std::vector<TrajPoint> truth = build_trajectory(sc);
  const std::vector<OdometryInput> odo = build_odometry(sc, truth);
  write_tum(out_dir + "/gt.tum", truth);
  write_odometry(out_dir + "/odom.txt", odo);

  for (int f = 0; f < sc.n_frames; ++f) {
    std::vector<Vec3> pts;
    if (!is_occluded(sc, f)) {
      SplitMix64 rng(mix_seed(sc.seed, k_stream_scan, static_cast<std::uint64_t>(f)));
      pts = simulate_scan_points(world, truth[static_cast<std::size_t>(f)].pose,
                                 sc.sensor, rng);
    }
    char name[64];
    std::snprintf(name, sizeof(name), "/scans/%05d.ply", f);
    write_ply_points(out_dir + name, pts);
  }
}

}  // namespace steinmcl::sim
