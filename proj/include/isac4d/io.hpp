#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "isac4d/errors.hpp"
#include "isac4d/fusion.hpp"

namespace isac4d {

inline std::string format_double(double v, const char* fmt = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

/// ASCII PLY with per-vertex position, radial velocity, power and bs id.
inline void write_ply(const std::string& path, const PointCloud4D& cloud,
                      std::uint64_t config_hash = 0) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "comment config_hash=" << config_hash << "\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property float radial_velocity\nproperty float power\n";
  out << "property int bs_id\nend_header\n";
  for (const Point4D& p : cloud.points) {
    out << format_double(p.position.x(), "%.6f") << ' '
        << format_double(p.position.y(), "%.6f") << ' '
        << format_double(p.position.z(), "%.6f") << ' '
        << format_double(p.radial_velocity_mps, "%.6f") << ' '
        << format_double(p.power, "%.6g") << ' ' << p.bs_id << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Reads vertex positions (first three float properties) from an ASCII PLY.
inline std::vector<Eigen::Vector3d> read_ply_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  std::size_t n_vertex = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.rfind("element vertex", 0) == 0) {
      n_vertex = std::stoul(line.substr(15));
    } else if (line == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw IoError("malformed PLY header: " + path);
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(n_vertex);
  for (std::size_t i = 0; i < n_vertex; ++i) {
    if (!std::getline(in, line)) {
      throw IoError("truncated PLY data: " + path);
    }
    std::istringstream row(line);
    double x, y, z;
    if (!(row >> x >> y >> z)) throw IoError("bad PLY row: " + path);
    pts.emplace_back(x, y, z);
  }
  return pts;
}

inline void write_cloud_csv(const std::string& path, const PointCloud4D& cloud,
                            std::uint64_t config_hash = 0) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# config_hash=" << config_hash << "\n";
  out << "x,y,z,v,power,bs_id\n";
  for (const Point4D& p : cloud.points) {
    out << format_double(p.position.x()) << ',' << format_double(p.position.y())
        << ',' << format_double(p.position.z()) << ','
        << format_double(p.radial_velocity_mps) << ','
        << format_double(p.power) << ',' << p.bs_id << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Dense binary dump of the integrated RDM: int64 N_R, int64 N_D, then
/// row-major 64-bit reals.
inline void write_rdm_dump(const std::string& path,
                           const Eigen::MatrixXd& integrated) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  const std::int64_t nr = integrated.rows();
  const std::int64_t nd = integrated.cols();
  out.write(reinterpret_cast<const char*>(&nr), sizeof(nr));
  out.write(reinterpret_cast<const char*>(&nd), sizeof(nd));
  for (std::int64_t m = 0; m < nr; ++m) {
    for (std::int64_t n = 0; n < nd; ++n) {
      const double v = integrated(m, n);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace isac4d
