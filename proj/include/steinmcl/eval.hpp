#pragma once

#include <span>
#include <string>
#include <vector>

#include "steinmcl/trajectory_io.hpp"

namespace steinmcl {

struct OcclusionWindow {
  int begin = 0;  // first occluded frame
  int end = 0;    // one past the last occluded frame
};

struct AteOptions {
  bool align = false;            // SE3 Umeyama alignment on positions
  double conv_trans = 1.0;       // m
  double conv_rot_deg = 10.0;
  int conv_sustain = 10;         // frames the thresholds must hold
  std::vector<OcclusionWindow> occlusions;
};

struct EvalReport {
  std::size_t n_frames = 0;
  int skip = 0;
  double ate_rmse = 0.0;
  double ate_mean = 0.0;
  double ate_std = 0.0;
  double ate_max = 0.0;
  int convergence_frame = -1;            // -1 = never converged
  double ate_rmse_post_convergence = -1.0;
  std::vector<int> recovery_frames;      // per occlusion window; -1 = never
  StageTimes mean_times;                 // filled by scenario runs
};

// Translation ATE between two same-frame trajectories (no alignment by
// default: both live in the map frame, which is the whole point of global
// localization). Also reports the convergence frame (error under the
// thresholds sustained conv_sustain frames) and, per occlusion window, the
// number of frames after the window until the estimate re-converges.
EvalReport evaluate_ate(std::span<const TrajPoint> estimated,
                        std::span<const TrajPoint> truth, int skip,
                        const AteOptions& opts = {});

std::string format_report(const EvalReport& report);

}  // namespace steinmcl
