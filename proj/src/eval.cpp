#include "steinmcl/eval.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace steinmcl {

namespace {

// First frame >= from where the error stays under the thresholds for
// opts.conv_sustain consecutive frames; -1 if never.
int first_sustained(std::span<const double> terr, std::span<const double> rerr_deg,
                    int from, const AteOptions& opts) {
  const int n = static_cast<int>(terr.size());
  int run = 0;
  for (int i = std::max(from, 0); i < n; ++i) {
    if (terr[static_cast<std::size_t>(i)] < opts.conv_trans &&
        rerr_deg[static_cast<std::size_t>(i)] < opts.conv_rot_deg) {
      if (++run >= opts.conv_sustain) return i - opts.conv_sustain + 1;
    } else {
      run = 0;
    }
  }
  return -1;
}

}  // namespace

EvalReport evaluate_ate(std::span<const TrajPoint> estimated,
                        std::span<const TrajPoint> truth, int skip,
                        const AteOptions& opts) {
  if (estimated.size() != truth.size()) {
    throw std::invalid_argument("evaluate_ate: trajectory length mismatch");
  }
  const std::size_t n = estimated.size();
  EvalReport rep;
  rep.n_frames = n;
  rep.skip = skip;
  if (n == 0) return rep;

  Pose correction = Pose::identity();
  if (opts.align) {
    Eigen::Matrix3Xd src(3, n), dst(3, n);
    for (std::size_t i = 0; i < n; ++i) {
      src.col(i) = estimated[i].pose.t;
      dst.col(i) = truth[i].pose.t;
    }
    const Eigen::Matrix4d m = Eigen::umeyama(src, dst, false);
    correction.R = m.topLeftCorner<3, 3>();
    correction.t = m.topRightCorner<3, 1>();
  }

  std::vector<double> terr(n), rerr_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Pose est = correction * estimated[i].pose;
    terr[i] = (est.t - truth[i].pose.t).norm();
    rerr_deg[i] = rotation_angle_between(est, truth[i].pose) * 180.0 / M_PI;
  }

  double sum = 0.0, sum2 = 0.0, mx = 0.0;
  std::size_t count = 0;
  for (std::size_t i = static_cast<std::size_t>(std::max(skip, 0)); i < n; ++i) {
    sum += terr[i];
    sum2 += terr[i] * terr[i];
    mx = std::max(mx, terr[i]);
    ++count;
  }
  if (count > 0) {
    rep.ate_mean = sum / static_cast<double>(count);
    rep.ate_rmse = std::sqrt(sum2 / static_cast<double>(count));
    rep.ate_std = std::sqrt(std::max(0.0, sum2 / static_cast<double>(count) -
                                              rep.ate_mean * rep.ate_mean));
    rep.ate_max = mx;
  }

  rep.convergence_frame = first_sustained(terr, rerr_deg, skip, opts);
  if (rep.convergence_frame >= 0) {
    double s2 = 0.0;
    std::size_t c = 0;
    for (std::size_t i = static_cast<std::size_t>(rep.convergence_frame); i < n; ++i) {
      s2 += terr[i] * terr[i];
      ++c;
    }
    rep.ate_rmse_post_convergence = std::sqrt(s2 / static_cast<double>(c));
  }

  for (const OcclusionWindow& w : opts.occlusions) {
    const int reconv = first_sustained(terr, rerr_deg, w.end, opts);
    rep.recovery_frames.push_back(reconv >= 0 ? reconv - w.end : -1);
  }
  return rep;
}

std::string format_report(const EvalReport& rep) {
  char buf[256];
  std::string out;
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
  };
  line("frames: %zu\n", rep.n_frames);
  line("skip: %d\n", rep.skip);
  line("ate_rmse: %.6f\n", rep.ate_rmse);
  line("ate_mean: %.6f\n", rep.ate_mean);
  line("ate_std: %.6f\n", rep.ate_std);
  line("ate_max: %.6f\n", rep.ate_max);
  line("convergence_frame: %d\n", rep.convergence_frame);
  line("ate_rmse_post_convergence: %.6f\n", rep.ate_rmse_post_convergence);
  for (std::size_t w = 0; w < rep.recovery_frames.size(); ++w) {
    line("recovery_frames_%zu: %d\n", w, rep.recovery_frames[w]);
  }
  return out;
}

}  // namespace steinmcl
