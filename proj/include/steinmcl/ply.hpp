#pragma once

#include <span>
#include <string>
#include <vector>

#include "steinmcl/se3.hpp"

namespace steinmcl {

// ASCII PLY with x/y/z vertex properties; other properties are ignored on
// read. Binary PLY is rejected.
std::vector<Vec3> read_ply_points(const std::string& path);
void write_ply_points(const std::string& path, std::span<const Vec3> points);

}  // namespace steinmcl
