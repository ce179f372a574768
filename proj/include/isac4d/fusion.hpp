#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "isac4d/angle_estimation.hpp"
#include "isac4d/array_geometry.hpp"
#include "isac4d/errors.hpp"

namespace isac4d {

/// Known pose of a BS in the global frame: p_glo = R * p_loc + t.
struct BsPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int bs_id = 0;
};

inline void validate(const BsPose& pose) {
  const Eigen::Matrix3d err =
      pose.rotation.transpose() * pose.rotation - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(pose.rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidPoseError("pose: rotation is not a proper orthonormal matrix");
  }
}

/// Pose from yaw-pitch-roll degrees: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline BsPose make_pose(double yaw_deg, double pitch_deg, double roll_deg,
                        const Eigen::Vector3d& translation, int bs_id) {
  BsPose pose;
  pose.rotation =
      (Eigen::AngleAxisd(deg2rad(yaw_deg), Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(deg2rad(pitch_deg), Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(deg2rad(roll_deg), Eigen::Vector3d::UnitX()))
          .toRotationMatrix();
  pose.translation = translation;
  pose.bs_id = bs_id;
  return pose;
}

struct Point4D {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double radial_velocity_mps = 0;
  double power = 0;
  int bs_id = 0;
};

struct PointCloud4D {
  std::vector<Point4D> points;
};

/// BS-local Cartesian position of a detection.
inline Eigen::Vector3d detection_to_local_point(const RdPeak& peak,
                                                const Angle& angle) {
  if (peak.range_m < 0) throw ConfigError("detection: range must be >= 0");
  return peak.range_m * angle_to_unit_vector(angle);
}

inline Eigen::Vector3d to_global(const Eigen::Vector3d& p_loc,
                                 const BsPose& pose) {
  validate(pose);
  return pose.rotation * p_loc + pose.translation;
}

/// Plain union of the transformed per-BS clouds. Radial velocities stay
/// per-BS and are tagged with the source bs_id; no deduplication.
inline PointCloud4D fuse(
    const std::vector<std::pair<BsPose, std::vector<Point4D>>>& clouds) {
  PointCloud4D global;
  for (const auto& [pose, local] : clouds) {
    validate(pose);
    for (const Point4D& pt : local) {
      Point4D g = pt;
      g.position = pose.rotation * pt.position + pose.translation;
      g.bs_id = pose.bs_id;
      global.points.push_back(g);
    }
  }
  return global;
}

}  // namespace isac4d
