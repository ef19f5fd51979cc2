#pragma once

#include <cstdint>
#include <span>

#include "steinmcl/gaussian_cloud.hpp"
#include "steinmcl/nnf.hpp"
#include "steinmcl/se3.hpp"

namespace steinmcl {

// Log likelihood reported for a particle with no map correspondences at all.
inline constexpr double k_unmatched_log_lik = -1e30;

// Quadratic model of the negative GICP log likelihood around one particle
// pose: cost(xi) ~ const + 2 b^T xi + xi^T H xi with residuals
// e_k = mu_k^M - T mu_k^S and information Omega_k = (Sigma^M + R Sigma^S R^T)^-1.
struct GnSystem {
  Mat6 H = Mat6::Zero();
  Vec6 b = Vec6::Zero();
  double log_lik = 0.0;  // -sum e^T Omega e over matched points; <= 0
  int n_matched = 0;
};

// Accumulates the Gauss-Newton system of one particle over all scan points
// with a non-empty NNF lookup. Jacobian of the residual w.r.t. the right
// perturbation T * exp(xi), ordering [omega; v]:
//   e(xi) ~ e + R [mu^S]_x omega - R v,  J = [R [mu^S]_x | -R].
// With no matches the system is zero and log_lik is the unmatched sentinel.
GnSystem evaluate(const GaussianCloud& map, const NearestNeighborField& nnf,
                  const GaussianCloud& scan, const Pose& pose);

struct StepLimits {
  double omega_max = 0.5;  // rad, per component
  double v_max = 1.0;      // m, per component
};

// Damped Gauss-Newton step, i.e. the minimizer -(H + lambda I)^-1 b of the
// quadratic cost model (a descent direction on sum e^T Omega e). If the
// Cholesky factorization fails, lambda is doubled up to 3 times before giving
// up with a zero step. The result is clamped component-wise.
Tangent solve_step(const GnSystem& sys, double lambda,
                   const StepLimits& limits = {});

struct GicpParams {
  double damping_scale = 1e-3;  // lambda = damping_scale * trace(H) / 6
  StepLimits limits;
  // Particles matching fewer than this fraction of the scan report the
  // unmatched sentinel instead of their raw log likelihood. Per-matched-point
  // averaging would otherwise favor poses that match a handful of points
  // against a single plane, e.g. hovering outside the map.
  double min_match_fraction = 0.5;
  // Truncated cost for scan points without a field hit. A missed lookup still
  // says the pose is wrong there; without this, a pose that explains only the
  // locally ambiguous part of the scan ties with the true one.
  double miss_cost = 25.0;
};

// Per-particle evaluate + solve over the whole particle set (OpenMP over
// particles; map/nnf/scan are shared read-only).
void evaluate_all(const GaussianCloud& map, const NearestNeighborField& nnf,
                  const GaussianCloud& scan, std::span<const Pose> poses,
                  const GicpParams& params, std::span<Tangent> step_out,
                  std::span<double> log_lik_out, std::span<std::int32_t> n_matched_out);

// Log likelihood without the Gauss-Newton system, for posterior updates at
// already-corrected poses. Applies the same miss cost and match-fraction
// gating as evaluate_all. Roughly a third of the cost of a full evaluation.
void evaluate_likelihoods(const GaussianCloud& map, const NearestNeighborField& nnf,
                          const GaussianCloud& scan, std::span<const Pose> poses,
                          const GicpParams& params, std::span<double> log_lik_out,
                          std::span<std::int32_t> n_matched_out);

}  // namespace steinmcl
