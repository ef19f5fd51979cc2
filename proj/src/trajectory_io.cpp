#include "steinmcl/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace steinmcl {

Pose pose_from_quat(double qx, double qy, double qz, double qw, const Vec3& t) {
  Eigen::Quaterniond q(qw, qx, qy, qz);
  q.normalize();
  Pose p;
  p.R = q.toRotationMatrix();
  p.t = t;
  return p;
}

std::vector<TrajPoint> read_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_tum: cannot open " + path);
  std::vector<TrajPoint> traj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double stamp, tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> stamp >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw std::runtime_error("read_tum: malformed line in " + path);
    }
    traj.push_back({stamp, pose_from_quat(qx, qy, qz, qw, {tx, ty, tz})});
  }
  return traj;
}

void write_tum(const std::string& path, const std::vector<TrajPoint>& traj) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_tum: cannot open " + path);
  for (const TrajPoint& p : traj) {
    const Eigen::Quaterniond q(p.pose.R);
    std::fprintf(f, "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", p.stamp,
                 p.pose.t.x(), p.pose.t.y(), p.pose.t.z(), q.x(), q.y(), q.z(), q.w());
  }
  std::fclose(f);
}

std::vector<OdometryInput> read_odometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_odometry: cannot open " + path);
  std::vector<OdometryInput> odo;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw std::runtime_error("read_odometry: malformed line in " + path);
    }
    OdometryInput o;
    o.delta = pose_from_quat(qx, qy, qz, qw, {tx, ty, tz});
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) {
        double v;
        if (!(ls >> v)) throw std::runtime_error("read_odometry: truncated covariance in " + path);
        o.cov(r, c) = v;
        o.cov(c, r) = v;
      }
    }
    int valid;
    if (!(ls >> valid)) throw std::runtime_error("read_odometry: missing valid flag in " + path);
    o.valid = valid != 0;
    odo.push_back(o);
  }
  return odo;
}

void write_odometry(const std::string& path, const std::vector<OdometryInput>& odo) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_odometry: cannot open " + path);
  for (const OdometryInput& o : odo) {
    const Eigen::Quaterniond q(o.delta.R);
    std::fprintf(f, "%.12g %.12g %.12g %.12g %.12g %.12g %.12g", o.delta.t.x(),
                 o.delta.t.y(), o.delta.t.z(), q.x(), q.y(), q.z(), q.w());
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) std::fprintf(f, " %.12g", o.cov(r, c));
    }
    std::fprintf(f, " %d\n", o.valid ? 1 : 0);
  }
  std::fclose(f);
}

}  // namespace steinmcl
