#pragma once

#include <string>
#include <vector>

#include "steinmcl/filter.hpp"
#include "steinmcl/se3.hpp"

namespace steinmcl {

struct TrajPoint {
  double stamp = 0.0;
  Pose pose;
};

Pose pose_from_quat(double qx, double qy, double qz, double qw, const Vec3& t);

// TUM format: "timestamp tx ty tz qx qy qz qw" per line.
std::vector<TrajPoint> read_tum(const std::string& path);
void write_tum(const std::string& path, const std::vector<TrajPoint>& traj);

// Odometry file: per frame "tx ty tz qx qy qz qw", the 21 upper-triangular
// covariance entries (row major), and a 0/1 valid flag, whitespace separated.
std::vector<OdometryInput> read_odometry(const std::string& path);
void write_odometry(const std::string& path, const std::vector<OdometryInput>& odo);

}  // namespace steinmcl
