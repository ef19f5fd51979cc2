#include "steinmcl/gicp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace steinmcl {

GnSystem evaluate(const GaussianCloud& map, const NearestNeighborField& nnf,
                  const GaussianCloud& scan, const Pose& pose) {
  if (scan.empty()) throw std::invalid_argument("gicp::evaluate: empty scan");

  GnSystem sys;
  const Mat3& r = pose.R;
  for (std::size_t k = 0; k < scan.size(); ++k) {
    const Vec3 p_world = pose * scan.mu[k];
    const std::int32_t m = nnf.lookup_nearest(p_world);
    if (m == NearestNeighborField::k_empty) continue;

    const Vec3 e = map.mu[static_cast<std::size_t>(m)] - p_world;
    const Mat3 omega =
        (map.sigma[static_cast<std::size_t>(m)] + r * scan.sigma[k] * r.transpose())
            .inverse();

    // J = [A | -R] with A = R [mu^S]_x; accumulate block-wise.
    const Mat3 a = r * skew(scan.mu[k]);
    const Mat3 oa = omega * a;
    const Mat3 or_ = omega * r;
    sys.H.topLeftCorner<3, 3>() += a.transpose() * oa;
    sys.H.topRightCorner<3, 3>() -= a.transpose() * or_;
    sys.H.bottomRightCorner<3, 3>() += r.transpose() * or_;
    const Vec3 oe = omega * e;
    sys.b.head<3>() += a.transpose() * oe;
    sys.b.tail<3>() -= r.transpose() * oe;
    sys.log_lik -= e.dot(oe);
    ++sys.n_matched;
  }
  sys.H.bottomLeftCorner<3, 3>() = sys.H.topRightCorner<3, 3>().transpose();
  if (sys.n_matched == 0) {
    sys.log_lik = k_unmatched_log_lik;
  }
  return sys;
}

Tangent solve_step(const GnSystem& sys, double lambda, const StepLimits& limits) {
  if (lambda < 0.0) throw std::invalid_argument("solve_step: lambda must be >= 0");

  Tangent step = Tangent::Zero();
  if (sys.b.isZero(0.0)) return step;

  double lm = lambda;
  bool solved = false;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const Mat6 damped = sys.H + lm * Mat6::Identity();
    const Eigen::LLT<Mat6> llt(damped);
    if (llt.info() == Eigen::Success) {
      step = -llt.solve(sys.b);
      if (step.allFinite()) {
        solved = true;
        break;
      }
      step.setZero();
    }
    lm *= 2.0;
  }
  if (!solved) return Tangent::Zero();

  for (int c = 0; c < 3; ++c) {
    step[c] = std::clamp(step[c], -limits.omega_max, limits.omega_max);
    step[c + 3] = std::clamp(step[c + 3], -limits.v_max, limits.v_max);
  }
  return step;
}

namespace {

double gated_log_lik(const GicpParams& params, std::size_t scan_size, double raw,
                     int n_matched, int min_matched) {
  if (n_matched < min_matched) return k_unmatched_log_lik;
  return raw - params.miss_cost * (static_cast<double>(scan_size) - n_matched);
}

}  // namespace

void evaluate_all(const GaussianCloud& map, const NearestNeighborField& nnf,
                  const GaussianCloud& scan, std::span<const Pose> poses,
                  const GicpParams& params, std::span<Tangent> step_out,
                  std::span<double> log_lik_out, std::span<std::int32_t> n_matched_out) {
  const std::int64_t n = static_cast<std::int64_t>(poses.size());
  const int min_matched = static_cast<int>(
      std::ceil(params.min_match_fraction * static_cast<double>(scan.size())));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const GnSystem sys = evaluate(map, nnf, scan, poses[static_cast<std::size_t>(i)]);
    log_lik_out[static_cast<std::size_t>(i)] =
        gated_log_lik(params, scan.size(), sys.log_lik, sys.n_matched, min_matched);
    n_matched_out[static_cast<std::size_t>(i)] = sys.n_matched;
    if (sys.n_matched == 0) {
      step_out[static_cast<std::size_t>(i)].setZero();
    } else {
      const double lambda = params.damping_scale * sys.H.trace() / 6.0;
      step_out[static_cast<std::size_t>(i)] = solve_step(sys, lambda, params.limits);
    }
  }
}

void evaluate_likelihoods(const GaussianCloud& map, const NearestNeighborField& nnf,
                          const GaussianCloud& scan, std::span<const Pose> poses,
                          const GicpParams& params, std::span<double> log_lik_out,
                          std::span<std::int32_t> n_matched_out) {
  const std::int64_t n = static_cast<std::int64_t>(poses.size());
  const int min_matched = static_cast<int>(
      std::ceil(params.min_match_fraction * static_cast<double>(scan.size())));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Pose& pose = poses[static_cast<std::size_t>(i)];
    const Mat3& r = pose.R;
    double ll = 0.0;
    int matched = 0;
    for (std::size_t k = 0; k < scan.size(); ++k) {
      const Vec3 p_world = pose * scan.mu[k];
      const std::int32_t m = nnf.lookup_nearest(p_world);
      if (m == NearestNeighborField::k_empty) continue;
      const Vec3 e = map.mu[static_cast<std::size_t>(m)] - p_world;
      const Mat3 cov =
          map.sigma[static_cast<std::size_t>(m)] + r * scan.sigma[k] * r.transpose();
      ll -= e.dot(cov.inverse() * e);
      ++matched;
    }
    if (matched == 0) ll = k_unmatched_log_lik;
    log_lik_out[static_cast<std::size_t>(i)] =
        gated_log_lik(params, scan.size(), ll, matched, min_matched);
    n_matched_out[static_cast<std::size_t>(i)] = matched;
  }
}

}  // namespace steinmcl
