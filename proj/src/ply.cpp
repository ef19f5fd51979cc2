#include "steinmcl/ply.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace steinmcl {

std::vector<Vec3> read_ply_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_ply_points: cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw std::runtime_error("read_ply_points: not a PLY file: " + path);
  }

  std::size_t n_vertices = 0;
  int n_props = 0;
  int ix = -1, iy = -1, iz = -1;
  bool in_vertex_element = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") {
        throw std::runtime_error("read_ply_points: only ascii PLY is supported: " + path);
      }
    } else if (tok == "element") {
      std::string name;
      ls >> name;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) ls >> n_vertices;
    } else if (tok == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type >> name;
      if (name == "x") ix = n_props;
      if (name == "y") iy = n_props;
      if (name == "z") iz = n_props;
      ++n_props;
    } else if (tok == "end_header") {
      break;
    }
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw std::runtime_error("read_ply_points: vertex element lacks x/y/z: " + path);
  }

  std::vector<Vec3> points;
  points.reserve(n_vertices);
  std::vector<double> row(static_cast<std::size_t>(n_props));
  for (std::size_t i = 0; i < n_vertices; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("read_ply_points: truncated vertex data: " + path);
    }
    std::istringstream ls(line);
    for (int p = 0; p < n_props; ++p) {
      if (!(ls >> row[static_cast<std::size_t>(p)])) {
        throw std::runtime_error("read_ply_points: malformed vertex line: " + path);
      }
    }
    points.emplace_back(row[static_cast<std::size_t>(ix)],
                        row[static_cast<std::size_t>(iy)],
                        row[static_cast<std::size_t>(iz)]);
  }
  return points;
}

void write_ply_points(const std::string& path, std::span<const Vec3> points) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_ply_points: cannot open " + path);
  std::fprintf(f,
               "ply\nformat ascii 1.0\nelement vertex %zu\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n",
               points.size());
  for (const Vec3& p : points) {
    std::fprintf(f, "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
  }
  std::fclose(f);
}

}  // namespace steinmcl
