#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "isac4d/common.hpp"
#include "isac4d/errors.hpp"

namespace isac4d {

/// P x Q uniform planar array in the X-Y plane: P elements along X,
/// Q along Y, spacing given as a fraction of the wavelength.
struct UpaConfig {
  int p = 1;
  int q = 1;
  double d_over_lambda = 0.5;

  int size() const { return p * q; }
};

struct Angle {
  double theta_rad = 0;  // azimuth
  double phi_rad = 0;    // elevation
};

inline void validate(const UpaConfig& cfg) {
  if (cfg.p < 1 || cfg.q < 1) throw ConfigError("upa: P and Q must be >= 1");
  if (!(cfg.d_over_lambda > 0)) {
    throw ConfigError("upa: d_over_lambda must be > 0");
  }
}

/// Steering vector of the UPA, flattened vertical-major: the entry for
/// element (p, q) sits at index q*P + p and equals
/// exp(-j 2 pi (d/lambda) (p cos(phi) cos(theta) + q cos(phi) sin(theta))).
inline Eigen::VectorXcd steering_vector(const UpaConfig& cfg,
                                        const Angle& ang) {
  const double u = std::cos(ang.phi_rad) * std::cos(ang.theta_rad);
  const double v = std::cos(ang.phi_rad) * std::sin(ang.theta_rad);
  const double cp = -2.0 * kPi * cfg.d_over_lambda;
  Eigen::VectorXcd a(cfg.size());
  for (int q = 0; q < cfg.q; ++q) {
    for (int p = 0; p < cfg.p; ++p) {
      a(q * cfg.p + p) = std::polar(1.0, cp * (p * u + q * v));
    }
  }
  return a;
}

/// Effective steering vector: (a_Tx^H w) * a_Rx with identical Tx/Rx arrays.
inline Eigen::VectorXcd effective_steering(const UpaConfig& cfg,
                                           const Angle& ang,
                                           const Eigen::VectorXcd& w) {
  if (w.size() != cfg.size()) {
    throw DimensionError("effective_steering: precoder length " +
                         std::to_string(w.size()) + " != PQ " +
                         std::to_string(cfg.size()));
  }
  const Eigen::VectorXcd a = steering_vector(cfg, ang);
  const cdouble g = a.dot(w);  // a^H w
  return g * a;
}

/// Unit direction for (theta, phi): (cos phi cos theta, cos phi sin theta,
/// sin phi).
inline Eigen::Vector3d angle_to_unit_vector(const Angle& ang) {
  return {std::cos(ang.phi_rad) * std::cos(ang.theta_rad),
          std::cos(ang.phi_rad) * std::sin(ang.theta_rad),
          std::sin(ang.phi_rad)};
}

/// Inverse of angle_to_unit_vector for a nonzero Cartesian point.
inline Angle unit_vector_to_angle(const Eigen::Vector3d& p) {
  const double r = p.norm();
  if (r == 0.0) return {0.0, 0.0};
  return {std::atan2(p.y(), p.x()), std::asin(p.z() / r)};
}

/// Matched beam steered at the given boresight, normalized to unit power.
inline Eigen::VectorXcd matched_precoder(const UpaConfig& cfg,
                                         const Angle& boresight = {0, 0}) {
  return steering_vector(cfg, boresight) / std::sqrt(double(cfg.size()));
}

}  // namespace isac4d
