#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "steinmcl/bench.hpp"
#include "steinmcl/config.hpp"
#include "steinmcl/eval.hpp"
#include "steinmcl/filter.hpp"
#include "steinmcl/ply.hpp"
#include "steinmcl/sim/scenario.hpp"
#include "steinmcl/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace steinmcl;

namespace {

FilterConfig load_filter_config(const std::string& path) {
  FilterConfig cfg;
  if (path.empty()) return cfg;
  KeyValues kv = read_key_values(path);
  apply_filter_config(kv, cfg);
  reject_unknown_keys(kv, path);
  return cfg;
}

sim::Scenario load_scenario(const std::string& spec) {
  if (fs::exists(spec)) return sim::scenario_from_file(spec);
  return sim::scenario_preset(spec);
}

int cmd_localize(const std::string& map_path, const std::string& scans,
                 const std::string& odom_path, const std::string& config_path,
                 const std::string& out_dir, std::uint64_t seed, int particles,
                 int snapshot_every) {
  FilterConfig cfg = load_filter_config(config_path);
  if (seed != 0) cfg.seed = seed;
  if (particles > 0) cfg.n_particles = particles;

  if (!fs::is_directory(scans)) {
    // Closed-loop scenario run; the map argument is unused (the scenario
    // builds its own world).
    sim::Scenario sc = load_scenario(scans);
    if (seed != 0) sc.seed = mix_seed(seed, 777);
    const sim::ScenarioResult res = run_scenario(sc, cfg, out_dir, snapshot_every);
    std::cout << format_report(res.report);
    return 0;
  }

  if (map_path.empty()) throw std::runtime_error("localize: --map is required for replay");
  if (odom_path.empty()) throw std::runtime_error("localize: --odom is required for replay");

  const std::vector<Vec3> map_points = read_ply_points(map_path);
  const GaussianCloud map =
      estimate_covariances(map_points, cfg.covariance_k, cfg.epsilon_plane);
  FilterEngine engine(map, cfg);
  engine.init_uniform(engine.map().bounds);

  std::vector<std::string> scan_files;
  for (const auto& e : fs::directory_iterator(scans)) {
    if (e.path().extension() == ".ply") scan_files.push_back(e.path().string());
  }
  std::sort(scan_files.begin(), scan_files.end());
  if (scan_files.empty()) throw std::runtime_error("localize: no .ply scans in " + scans);

  const std::vector<OdometryInput> odo = read_odometry(odom_path);
  if (odo.size() < scan_files.size()) {
    throw std::runtime_error("localize: odometry shorter than the scan sequence");
  }

  fs::create_directories(out_dir);
  if (snapshot_every > 0) fs::create_directories(out_dir + "/snapshots");
  std::vector<TrajPoint> est;
  for (std::size_t f = 0; f < scan_files.size(); ++f) {
    const std::vector<Vec3> pts = read_ply_points(scan_files[f]);
    const GaussianCloud scan = make_scan_cloud(pts, cfg);
    const FrameResult fr = engine.step(scan, odo[f]);
    est.push_back({static_cast<double>(f), fr.representative});
    if (snapshot_every > 0 && static_cast<int>(f) % snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "/snapshots/snap_%06zu.txt", f);
      std::FILE* snap = std::fopen((out_dir + name).c_str(), "w");
      if (snap) {
        const ParticleSet& set = engine.particles();
        for (std::size_t i = 0; i < set.size(); ++i) {
          const Eigen::Quaterniond q(set.poses[i].R);
          std::fprintf(snap, "%d %.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9g\n", set.id[i],
                       set.poses[i].t.x(), set.poses[i].t.y(), set.poses[i].t.z(),
                       q.x(), q.y(), q.z(), q.w(), set.log_post[i]);
        }
        std::fclose(snap);
      }
    }
  }
  write_tum(out_dir + "/est.tum", est);
  std::cout << "localized " << scan_files.size() << " frames -> " << out_dir
            << "/est.tum" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"6-DoF range-based Monte Carlo localization with Stein variational updates"};
  app.require_subcommand(1);

  // localize
  std::string map_path, scans, odom_path, config_path, out_dir = "out";
  std::uint64_t seed = 0;
  int particles = 0, snapshot_every = 0;
  auto* loc = app.add_subcommand("localize", "Run the filter on scans or a scenario");
  loc->add_option("--map", map_path, "Map point cloud (ascii PLY)");
  loc->add_option("--scans", scans, "Scan directory, scenario file, or preset name")
      ->required();
  loc->add_option("--odom", odom_path, "Odometry file (replay mode)");
  loc->add_option("--config", config_path, "Filter config (key = value)");
  loc->add_option("--out", out_dir, "Output directory");
  loc->add_option("--seed", seed, "Override the random seed");
  loc->add_option("--particles", particles, "Override the particle count");
  loc->add_option("--snapshot-every", snapshot_every, "Posterior snapshot period");

  // simulate
  std::string sim_scenario, sim_out = "sim_out";
  std::uint64_t sim_seed = 0;
  auto* simc = app.add_subcommand("simulate", "Pre-generate scans + odometry for replay");
  simc->add_option("--scenario", sim_scenario, "Scenario file or preset name")->required();
  simc->add_option("--out", sim_out, "Output directory");
  simc->add_option("--seed", sim_seed, "Override the scenario seed");

  // evaluate
  std::string est_path, gt_path;
  int skip = 0;
  bool align = false;
  auto* ev = app.add_subcommand("evaluate", "Translation ATE between TUM trajectories");
  ev->add_option("--est", est_path, "Estimated trajectory (TUM)")->required();
  ev->add_option("--gt", gt_path, "Ground-truth trajectory (TUM)")->required();
  ev->add_option("--skip", skip, "Frames to skip at the start");
  ev->add_flag("--align", align, "SE3 alignment before computing errors");

  // bench
  std::string particles_list = "1e4,1e5,1e6";
  int bench_frames = 3, scan_points = 16;
  bool compare_serial = false;
  std::uint64_t bench_seed = 1;
  auto* be = app.add_subcommand("bench", "Per-stage timing table over particle counts");
  be->add_option("--particles", particles_list, "Comma-separated particle counts");
  be->add_option("--frames", bench_frames, "Frames per measurement");
  be->add_option("--scan-points", scan_points, "Scan size for the likelihood stage");
  be->add_flag("--compare-serial", compare_serial, "Also time the serial reference kernels");
  be->add_option("--seed", bench_seed, "Bench seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (loc->parsed()) {
      return cmd_localize(map_path, scans, odom_path, config_path, out_dir, seed,
                          particles, snapshot_every);
    }
    if (simc->parsed()) {
      sim::Scenario sc = load_scenario(sim_scenario);
      if (sim_seed != 0) sc.seed = sim_seed;
      simulate_to_dir(sc, sim_out);
      std::cout << "wrote " << sc.n_frames << " frames to " << sim_out << std::endl;
      return 0;
    }
    if (ev->parsed()) {
      const std::vector<TrajPoint> est = read_tum(est_path);
      const std::vector<TrajPoint> gt = read_tum(gt_path);
      AteOptions opts;
      opts.align = align;
      const EvalReport rep = evaluate_ate(est, gt, skip, opts);
      std::cout << format_report(rep);
      return 0;
    }
    if (be->parsed()) {
      BenchOptions opts;
      opts.particle_counts.clear();
      for (const double v : parse_double_list(particles_list)) {
        opts.particle_counts.push_back(static_cast<std::size_t>(v));
      }
      opts.frames = bench_frames;
      opts.scan_points = scan_points;
      opts.compare_serial = compare_serial;
      opts.seed = bench_seed;
      const std::vector<BenchRow> rows = run_bench(opts, std::cerr);
      print_bench_table(rows, compare_serial, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
