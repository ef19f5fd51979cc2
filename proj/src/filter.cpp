#include "steinmcl/filter.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "steinmcl/reduce.hpp"

namespace steinmcl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(const Clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Stage ids for deriving independent random streams from the root seed.
enum : std::uint64_t { k_stream_init = 1, k_stream_predict = 2, k_stream_neighbors = 3 };

Mat6 covariance_sqrt(const Mat6& cov) {
  Eigen::LLT<Mat6> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // PSD but rank deficient: jitter once, then fall back to an eigen square
  // root with clamped eigenvalues.
  Eigen::LLT<Mat6> jittered(cov + 1e-12 * Mat6::Identity());
  if (jittered.info() == Eigen::Success) return jittered.matrixL();
  Eigen::SelfAdjointEigenSolver<Mat6> eig(cov);
  const Vec6 lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lam.asDiagonal();
}

}  // namespace

ParticleSet init_uniform(const FilterConfig& cfg, const Aabb& bounds,
                         bool full_rotation, std::uint64_t seed) {
  if (cfg.n_particles < 1) throw std::invalid_argument("init_uniform: n_particles must be >= 1");
  if (((bounds.max - bounds.min).array() <= 0.0).any()) {
    throw std::invalid_argument("init_uniform: degenerate bounds");
  }

  const std::size_t n = static_cast<std::size_t>(cfg.n_particles);
  ParticleSet set;
  set.poses.resize(n);
  set.log_post.assign(n, -std::log(static_cast<double>(n)));
  set.id.resize(n);
  set.neighbors.init_self(n, cfg.lsh.k_neighbors);

  const std::uint64_t stream = mix_seed(seed, k_stream_init);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    SplitMix64 rng(mix_seed(stream, static_cast<std::uint64_t>(i)));
    Pose& p = set.poses[static_cast<std::size_t>(i)];
    p.R = full_rotation ? random_rotation(rng) : random_yaw(rng);
    for (int a = 0; a < 3; ++a) {
      p.t[a] = uniform_range(rng, bounds.min[a], bounds.max[a]);
    }
    set.id[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
  }
  return set;
}

void predict(ParticleSet& set, const Pose& delta, const Mat6& cov,
             std::uint64_t frame_seed) {
  const std::size_t n = set.size();
  const bool noiseless = cov.isZero(0.0);
  const Mat6 sqrt_cov = noiseless ? Mat6::Zero() : covariance_sqrt(cov);

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    Pose& p = set.poses[static_cast<std::size_t>(i)];
    p = p * delta;
    if (!noiseless) {
      SplitMix64 rng(mix_seed(frame_seed, static_cast<std::uint64_t>(i)));
      const Tangent noise = sqrt_cov * normal6(rng);
      p = p * se3_exp(noise);
    }
    p.renormalize_if_needed();
  }
}

GaussianCloud make_scan_cloud(std::span<const Vec3> points, const FilterConfig& cfg) {
  if (points.size() < static_cast<std::size_t>(cfg.covariance_k) + 1 || points.size() < 5) {
    return {};
  }
  const std::vector<Vec3> down =
      downsample_to(points, static_cast<std::size_t>(cfg.n_scan_max), cfg.scan_voxel_leaf);
  const int k = std::min<int>(cfg.covariance_k, static_cast<int>(down.size()) - 1);
  if (k < 4) return {};
  GaussianCloud scan = estimate_covariances(down, k, cfg.epsilon_plane);
  const double noise_var = cfg.sensor_noise_sigma * cfg.sensor_noise_sigma;
  if (noise_var > 0.0) {
    for (Mat3& s : scan.sigma) s += noise_var * Mat3::Identity();
  }
  return scan;
}

FilterEngine::FilterEngine(GaussianCloud map, FilterConfig cfg)
    : map_(std::move(map)), cfg_(cfg) {
  if (map_.empty()) throw std::invalid_argument("FilterEngine: empty map");
  nnf_ = build_nnf(map_, cfg_.nnf_resolution, cfg_.nnf_padding, cfg_.nnf_max_query_dist);
}

void FilterEngine::init_uniform(const Aabb& bounds) {
  particles_ = steinmcl::init_uniform(cfg_, bounds, cfg_.full_rotation, cfg_.seed);
  frame_ = 0;
  const std::size_t n = particles_.size();
  steps_.assign(n, Tangent::Zero());
  phis_.assign(n, Tangent::Zero());
  log_lik_.assign(n, 0.0);
  n_matched_.assign(n, 0);
}

FrameResult FilterEngine::step(const GaussianCloud& scan, const OdometryInput& odo) {
  if (particles_.size() == 0) throw std::logic_error("FilterEngine::step: not initialized");
  const auto t_total = Clock::now();
  const std::size_t n = particles_.size();
  FrameResult out;
  out.n_particles = n;
  out.scan_empty = scan.empty();

  // Prediction. Invalid odometry keeps the pose chain still and substitutes
  // the diffusion covariance, so a blocked sensor spreads the belief.
  auto t0 = Clock::now();
  {
    Pose delta = odo.valid ? odo.delta : Pose::identity();
    Mat6 cov;
    if (odo.valid) {
      cov = odo.cov;
    } else {
      Vec6 d;
      d.head<3>().setConstant(cfg_.diffusion_sigma_rot * cfg_.diffusion_sigma_rot);
      d.tail<3>().setConstant(cfg_.diffusion_sigma_trans * cfg_.diffusion_sigma_trans);
      cov = d.asDiagonal();
    }
    predict(particles_, delta, cov,
            mix_seed(cfg_.seed, k_stream_predict, static_cast<std::uint64_t>(frame_)));
  }
  out.times.predict_ms = ms_since(t0);

  // One neighbor search pass per frame (may reorder particle storage).
  t0 = Clock::now();
  out.neighbor_stats = update_neighbors(
      particles_, cfg_.lsh, cfg_.kernel,
      mix_seed(cfg_.seed, k_stream_neighbors, static_cast<std::uint64_t>(frame_)),
      map_.bounds);
  out.times.neighbor_ms = ms_since(t0);

  if (!scan.empty()) {
    const GaussianCloud* gn_scan = &scan;
    GaussianCloud strided;
    if (cfg_.gn_scan_stride > 1 &&
        scan.size() > 2 * static_cast<std::size_t>(cfg_.gn_scan_stride)) {
      for (std::size_t k = 0; k < scan.size();
           k += static_cast<std::size_t>(cfg_.gn_scan_stride)) {
        strided.mu.push_back(scan.mu[k]);
        strided.sigma.push_back(scan.sigma[k]);
      }
      strided.bounds = scan.bounds;
      gn_scan = &strided;
    }
    for (int iter = 0; iter < cfg_.n_svgd_iters; ++iter) {
      // Likelihood evaluation and per-particle Gauss-Newton step.
      t0 = Clock::now();
      evaluate_all(map_, nnf_, *gn_scan, particles_.poses, cfg_.gicp, steps_, log_lik_,
                   n_matched_);
      out.times.likelihood_ms += ms_since(t0);

      // SVGD particle state update against a frozen pose snapshot.
      t0 = Clock::now();
      compute_phis(particles_.poses, steps_, particles_.neighbors.idx,
                   particles_.neighbors.count, particles_.neighbors.k_max, cfg_.kernel,
                   phis_);
      apply_updates(particles_.poses, phis_);
      out.times.update_ms += ms_since(t0);
    }

    // The posterior ranks the corrected states, so the Bayes likelihood is
    // re-evaluated at the updated poses (cheap, no Gauss-Newton system).
    t0 = Clock::now();
    evaluate_likelihoods(map_, nnf_, scan, particles_.poses, cfg_.gicp, log_lik_,
                         n_matched_);
    out.times.likelihood_ms += ms_since(t0);

    t0 = Clock::now();
    out.observation_rejected =
        bayes_update(particles_.log_post, log_lik_, n_matched_, cfg_.beta,
                     cfg_.log_post_floor);
    out.mean_n_matched =
        chunked_sum(n, [&](std::size_t i) { return double(n_matched_[i]); }) /
        static_cast<double>(n);
  } else {
    t0 = Clock::now();
  }

  // Posterior smoothing over the neighbor graph and state extraction.
  smooth(particles_.log_post, particles_.neighbors, cfg_.smooth_iters,
         cfg_.log_post_floor);
  const Representative rep = representative(particles_.log_post, particles_.poses);
  out.times.posterior_ms = ms_since(t0);

  out.representative = rep.pose;
  out.rep_log_post = rep.log_post;
  out.rep_index = rep.index;
  out.rep_id = particles_.id[static_cast<std::size_t>(rep.index)];
  out.times.total_ms = ms_since(t_total);
  ++frame_;
  return out;
}

}  // namespace steinmcl
