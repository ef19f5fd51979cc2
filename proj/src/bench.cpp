#include "steinmcl/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>

#include "steinmcl/reference.hpp"
#include "steinmcl/sim/world.hpp"

namespace steinmcl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(const Clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct BenchScene {
  GaussianCloud map;
  NearestNeighborField nnf;
  GaussianCloud scan;
  Aabb cube;
};

BenchScene make_scene(const BenchOptions& opts) {
  BenchScene scene;
  const sim::World room = sim::box_room(Vec3(10.0, 10.0, 3.0));
  scene.map = sim::sample_world(room, 40.0, mix_seed(opts.seed, 101));
  scene.nnf = build_nnf(scene.map, 0.2, 0.5, 1.0);

  SplitMix64 rng(mix_seed(opts.seed, 102));
  Pose center;
  center.t = Vec3(5.0, 5.0, 1.5);
  sim::SensorSpec sensor;
  sensor.n_azimuth = std::max(4, opts.scan_points / 4);
  sensor.max_range = 15.0;
  std::vector<Vec3> pts = sim::simulate_scan_points(room, center, sensor, rng);
  if (pts.size() > static_cast<std::size_t>(opts.scan_points)) {
    pts.resize(static_cast<std::size_t>(opts.scan_points));
  }
  scene.scan = estimate_covariances(pts, std::min<int>(10, static_cast<int>(pts.size()) - 1));
  return scene;
}

// Particle cloud with constant density: cube side grows as cbrt(n).
ParticleSet make_particles(std::size_t n, const FilterConfig& cfg, Aabb& cube,
                           std::uint64_t seed) {
  const double side = std::cbrt(static_cast<double>(n) / 10.0);
  cube.min = Vec3::Zero();
  cube.max = Vec3::Constant(side);

  ParticleSet set;
  set.poses.resize(n);
  set.log_post.assign(n, -std::log(static_cast<double>(n)));
  set.id.resize(n);
  set.neighbors.init_self(n, cfg.lsh.k_neighbors);
  const std::uint64_t stream = mix_seed(seed, 103);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    SplitMix64 rng(mix_seed(stream, static_cast<std::uint64_t>(i)));
    Pose& p = set.poses[static_cast<std::size_t>(i)];
    Vec3 axis(normal01(rng), normal01(rng), normal01(rng));
    Tangent xi = Tangent::Zero();
    xi.head<3>() = 0.1 * axis;
    p = se3_exp(xi);
    for (int a = 0; a < 3; ++a) p.t[a] = uniform_range(rng, cube.min[a], cube.max[a]);
    set.id[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
  }
  return set;
}

StageBench bench_kernels(const BenchScene& scene, const BenchOptions& opts,
                         std::size_t n, bool serial) {
  FilterConfig cfg;
  cfg.n_particles = static_cast<int>(n);

  Aabb cube;
  ParticleSet set = make_particles(n, cfg, cube, opts.seed);

  std::vector<Tangent> steps(n, Tangent::Zero());
  std::vector<Tangent> phis(n, Tangent::Zero());
  std::vector<double> log_lik(n, 0.0);
  std::vector<std::int32_t> n_matched(n, 0);

  Pose delta;
  delta.t = Vec3(0.05, 0.0, 0.0);
  Vec6 d;
  d.head<3>().setConstant(1e-4);
  d.tail<3>().setConstant(1e-3);
  const Mat6 cov = d.asDiagonal();

  StageBench acc;
  const int total = opts.frames + 1;  // first frame is warmup
  for (int f = 0; f < total; ++f) {
    StageBench t;

    auto t0 = Clock::now();
    predict(set, delta, cov, mix_seed(opts.seed, 200, static_cast<std::uint64_t>(f)));
    t.predict_ms = ms_since(t0);

    t0 = Clock::now();
    const std::uint64_t pass_seed = mix_seed(opts.seed, 201, static_cast<std::uint64_t>(f));
    if (serial) {
      ref::update_neighbors(set, cfg.lsh, cfg.kernel, pass_seed, cube);
    } else {
      update_neighbors(set, cfg.lsh, cfg.kernel, pass_seed, cube);
    }
    t.neighbor_ms = ms_since(t0);

    t0 = Clock::now();
    if (serial) {
      ref::evaluate_all(scene.map, scene.nnf, scene.scan, set.poses, cfg.gicp, steps,
                        log_lik, n_matched);
    } else {
      evaluate_all(scene.map, scene.nnf, scene.scan, set.poses, cfg.gicp, steps,
                   log_lik, n_matched);
    }
    t.likelihood_ms = ms_since(t0);

    t0 = Clock::now();
    if (serial) {
      ref::compute_phis(set.poses, steps, set.neighbors, cfg.kernel, phis);
      ref::apply_updates(set.poses, phis);
    } else {
      compute_phis(set.poses, steps, set.neighbors.idx, set.neighbors.count,
                   set.neighbors.k_max, cfg.kernel, phis);
      apply_updates(set.poses, phis);
    }
    t.svgd_ms = ms_since(t0);

    t0 = Clock::now();
    bayes_update(set.log_post, log_lik, n_matched, cfg.beta);
    if (serial) {
      ref::smooth(set.log_post, set.neighbors, cfg.smooth_iters);
    } else {
      smooth(set.log_post, set.neighbors, cfg.smooth_iters);
    }
    t.posterior_ms = ms_since(t0);

    if (f > 0) {
      acc.predict_ms += t.predict_ms;
      acc.neighbor_ms += t.neighbor_ms;
      acc.likelihood_ms += t.likelihood_ms;
      acc.svgd_ms += t.svgd_ms;
      acc.posterior_ms += t.posterior_ms;
    }
  }
  const double nf = static_cast<double>(opts.frames);
  acc.predict_ms /= nf;
  acc.neighbor_ms /= nf;
  acc.likelihood_ms /= nf;
  acc.svgd_ms /= nf;
  acc.posterior_ms /= nf;
  return acc;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opts, std::ostream& log) {
  const BenchScene scene = make_scene(opts);
  std::vector<BenchRow> rows;
  for (const std::size_t n : opts.particle_counts) {
    log << "bench: " << n << " particles..." << std::endl;
    BenchRow row;
    row.n_particles = n;
    row.parallel = bench_kernels(scene, opts, n, false);
    if (opts.compare_serial) row.serial = bench_kernels(scene, opts, n, true);
    rows.push_back(row);
  }
  return rows;
}

void print_bench_table(const std::vector<BenchRow>& rows, bool compare_serial,
                       std::ostream& out) {
  auto print_block = [&](const char* label, auto pick) {
    out << label << " [ms/frame]\n";
    out << std::left << std::setw(28) << "  Process";
    for (const BenchRow& r : rows) out << std::right << std::setw(14) << r.n_particles;
    out << "\n";
    const char* names[5] = {"  Prediction", "  Neighbor list update",
                            "  Likelihood evaluation", "  Particle state update",
                            "  Posterior probability"};
    for (int s = 0; s < 5; ++s) {
      out << std::left << std::setw(28) << names[s];
      for (const BenchRow& r : rows) {
        const StageBench& b = pick(r);
        const double v[5] = {b.predict_ms, b.neighbor_ms, b.likelihood_ms, b.svgd_ms,
                             b.posterior_ms};
        out << std::right << std::setw(14) << std::fixed << std::setprecision(2) << v[s];
      }
      out << "\n";
    }
    out << std::left << std::setw(28) << "  Total";
    for (const BenchRow& r : rows) {
      const StageBench& b = pick(r);
      out << std::right << std::setw(14) << std::fixed << std::setprecision(2)
          << (b.predict_ms + b.neighbor_ms + b.likelihood_ms + b.svgd_ms + b.posterior_ms);
    }
    out << "\n";
  };
  print_block("OpenMP kernels", [](const BenchRow& r) -> const StageBench& { return r.parallel; });
  if (compare_serial) {
    print_block("Serial reference", [](const BenchRow& r) -> const StageBench& { return r.serial; });
  }
}

}  // namespace steinmcl
