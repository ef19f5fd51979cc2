#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "steinmcl/gaussian_cloud.hpp"
#include "steinmcl/gicp.hpp"
#include "steinmcl/neighbor_search.hpp"
#include "steinmcl/nnf.hpp"
#include "steinmcl/particle_set.hpp"
#include "steinmcl/posterior.hpp"
#include "steinmcl/svgd.hpp"

namespace steinmcl {

struct FilterConfig {
  int n_particles = 10000;
  KernelParams kernel;  // sigma_r = 5.0 rad^-1, sigma_t = 2.5 m^-1
  LshConfig lsh;        // k_neighbors = 20

  double nnf_resolution = 0.1;      // m (indoor profile; 0.2 outdoors)
  double nnf_max_query_dist = 1.0;  // m (2.0 outdoors)
  double nnf_padding = 0.5;         // m beyond map bounds

  int smooth_iters = 10;
  double beta = 2.0;  // likelihood temperature
  int n_svgd_iters = 1;
  // Scan subsampling stride for the Gauss-Newton correction only; the Bayes
  // likelihood always sees the full scan. 6 DoF need few dozen points.
  int gn_scan_stride = 1;
  GicpParams gicp;  // step clamps, damping
  double log_post_floor = k_default_log_post_floor;

  int covariance_k = 10;
  double epsilon_plane = 1e-3;
  int n_scan_max = 1000;
  double scan_voxel_leaf = 0.05;  // starting leaf for downsampling to n_scan_max
  // Isotropic range-noise term added to scan covariances. The plane model
  // alone understates the per-point noise (its normal variance comes from the
  // regularizer, not the sensor), which would make every pose in the
  // population look equally mediocre.
  double sensor_noise_sigma = 0.01;  // m

  // Per-frame tangent-space diffusion while odometry is invalid (kidnap).
  double diffusion_sigma_rot = 0.02;  // rad
  double diffusion_sigma_trans = 0.5; // m

  bool full_rotation = true;
  std::uint64_t seed = 1;
};

// Odometry increment with uncertainty, as supplied by the harness or an
// external estimator. When valid is false (sensor blocked) the engine ignores
// delta and substitutes the configured diffusion covariance.
struct OdometryInput {
  Pose delta;
  Mat6 cov = Mat6::Zero();
  bool valid = true;
};

struct StageTimes {
  double predict_ms = 0.0;
  double neighbor_ms = 0.0;
  double likelihood_ms = 0.0;
  double update_ms = 0.0;   // particle state update (SVGD)
  double posterior_ms = 0.0;
  double total_ms = 0.0;
};

struct FrameResult {
  Pose representative;
  double rep_log_post = 0.0;
  std::int64_t rep_index = -1;
  std::int32_t rep_id = -1;
  std::size_t n_particles = 0;
  double mean_n_matched = 0.0;
  bool scan_empty = false;
  bool observation_rejected = false;
  NeighborStats neighbor_stats;
  StageTimes times;
};

// Uniform particle initialization over the given bounds: translations uniform,
// rotations uniform on SO3 (or yaw-only), uniform posterior, neighbor lists
// containing only the particle itself.
ParticleSet init_uniform(const FilterConfig& cfg, const Aabb& bounds,
                         bool full_rotation, std::uint64_t seed);

// Prediction step: every pose is right-composed with delta and a per-particle
// Gaussian tangent draw with covariance cov. A zero covariance produces
// exactly zero noise.
void predict(ParticleSet& set, const Pose& delta, const Mat6& cov,
             std::uint64_t frame_seed);

// Downsample raw scan points and attach GICP covariances. Returns an empty
// cloud when there are too few points to estimate local shapes.
GaussianCloud make_scan_cloud(std::span<const Vec3> points, const FilterConfig& cfg);

// Per-frame pipeline: predict -> neighbor search pass -> per-particle
// likelihood/Gauss-Newton -> SVGD update -> Bayes update -> posterior
// smoothing -> representative extraction. An empty scan skips the
// likelihood/SVGD/Bayes stages (kidnap mode: prediction plus diffusion).
class FilterEngine {
 public:
  FilterEngine(GaussianCloud map, FilterConfig cfg);

  void init_uniform(const Aabb& bounds);
  FrameResult step(const GaussianCloud& scan, const OdometryInput& odo);

  const ParticleSet& particles() const { return particles_; }
  // Direct particle access for harnesses and tests (pose injection).
  ParticleSet& mutable_particles() { return particles_; }
  const GaussianCloud& map() const { return map_; }
  const NearestNeighborField& nnf() const { return nnf_; }
  const FilterConfig& config() const { return cfg_; }
  std::int64_t frame_index() const { return frame_; }

 private:
  GaussianCloud map_;
  FilterConfig cfg_;
  NearestNeighborField nnf_;
  ParticleSet particles_;
  std::int64_t frame_ = 0;

  std::vector<Tangent> steps_;
  std::vector<Tangent> phis_;
  std::vector<double> log_lik_;
  std::vector<std::int32_t> n_matched_;
};

}  // namespace steinmcl
