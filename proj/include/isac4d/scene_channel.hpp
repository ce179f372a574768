#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <random>
#include <vector>

#include "isac4d/array_geometry.hpp"
#include "isac4d/common.hpp"
#include "isac4d/errors.hpp"
#include "isac4d/nr_grid.hpp"

namespace isac4d {

/// One point scatterer in the BS-local frame. Positive radial velocity
/// means the scatterer approaches the BS.
struct Scatterer {
  double range_m = 0;
  Angle angle;
  double radial_velocity_mps = 0;
  cdouble gain{1.0, 0.0};
};

struct ScatterScene {
  std::vector<Scatterer> scatterers;
};

/// Per-antenna received grids Y_pq, flattened vertical-major like the
/// steering vectors.
struct ReceivedGrid {
  std::vector<Eigen::MatrixXcd> per_antenna;  // PQ matrices, each K x L
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t noise_seed = 0;
};

/// Scatterer parameters from a BS-local Cartesian position and a Cartesian
/// velocity. The radial velocity is the approach speed along the line of
/// sight.
inline Scatterer scatterer_from_cartesian(const Eigen::Vector3d& position,
                                          const Eigen::Vector3d& velocity,
                                          cdouble gain) {
  Scatterer s;
  s.range_m = position.norm();
  s.angle = unit_vector_to_angle(position);
  s.radial_velocity_mps =
      s.range_m > 0 ? -velocity.dot(position) / s.range_m : 0.0;
  s.gain = gain;
  return s;
}

/// Noise variance per receive antenna and resource element for the given
/// SNR. The SNR reference is a unit-gain scatterer under matched precoding,
/// whose per-antenna signal power is PQ for unit-power symbols.
inline double noise_variance(const UpaConfig& cfg, double snr_db) {
  if (std::isinf(snr_db)) return 0.0;
  return cfg.size() / std::pow(10.0, snr_db / 10.0);
}

/// Frequency-domain echo synthesis: applies the scatterer channel to the
/// precoded grid and adds white complex Gaussian noise.
inline ReceivedGrid synthesize_echo(const ResourceGrid& grid,
                                    const UpaConfig& cfg,
                                    const Eigen::VectorXcd& w,
                                    const ScatterScene& scene, double snr_db,
                                    std::uint64_t seed) {
  validate(cfg);
  if (w.size() != cfg.size()) {
    throw DimensionError("synthesize_echo: precoder length mismatch");
  }
  if (!(snr_db == snr_db)) {
    throw ConfigError("synthesize_echo: snr_db must not be NaN");
  }
  const GridDims& dims = grid.dims;
  const int K = dims.K;
  const int L = dims.L;
  const int na = cfg.size();
  const double df = dims.num.scs_hz;
  const double ts = dims.symbol_duration_s;
  const double lambda = dims.wavelength_m;
  const double v_max = lambda / (4.0 * ts);

  std::vector<Eigen::MatrixXcd> channel(
      na, Eigen::MatrixXcd::Zero(K, L));
  Eigen::VectorXcd range_ramp(K);
  Eigen::VectorXcd doppler_ramp(L);
  for (const Scatterer& sc : scene.scatterers) {
    if (sc.range_m < 0) throw ConfigError("scatterer: range_m must be >= 0");
    if (std::abs(sc.radial_velocity_mps) >= v_max) {
      std::cerr << "warning: scatterer radial velocity "
                << sc.radial_velocity_mps
                << " m/s exceeds the unambiguous limit " << v_max << " m/s\n";
    }
    const double tau = 2.0 * sc.range_m / kSpeedOfLight;
    const double fd = 2.0 * sc.radial_velocity_mps / lambda;
    for (int k = 0; k < K; ++k) {
      range_ramp(k) = std::polar(1.0, -2.0 * kPi * k * df * tau);
    }
    for (int l = 0; l < L; ++l) {
      doppler_ramp(l) = std::polar(1.0, 2.0 * kPi * fd * l * ts);
    }
    const Eigen::VectorXcd b = effective_steering(cfg, sc.angle, w);
    const Eigen::MatrixXcd ramp =
        sc.gain * (range_ramp * doppler_ramp.transpose());
    for (int a = 0; a < na; ++a) {
      channel[a].noalias() += b(a) * ramp;
    }
  }

  ReceivedGrid rx;
  rx.snr_db = snr_db;
  rx.noise_seed = seed;
  rx.per_antenna.resize(na);
  const double sigma2 = noise_variance(cfg, snr_db);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
  for (int a = 0; a < na; ++a) {
    rx.per_antenna[a] = channel[a].cwiseProduct(grid.symbols);
    if (sigma2 > 0) {
      for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
          rx.per_antenna[a](k, l) += cdouble(gauss(rng), gauss(rng));
        }
      }
    }
  }
  return rx;
}

/// Axis-aligned box or planar rectangle, posed in a parent frame.
/// Rectangles span size.x() by size.y() in their local z=0 plane.
struct Primitive {
  enum class Kind { rectangle, box };
  Kind kind = Kind::rectangle;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

inline double surface_area(const Primitive& p) {
  if (p.kind == Primitive::Kind::rectangle) return p.size.x() * p.size.y();
  const double a = p.size.x(), b = p.size.y(), c = p.size.z();
  return 2.0 * (a * b + b * c + a * c);
}

/// Uniform surface samples of a primitive, in the primitive's parent frame.
inline std::vector<Eigen::Vector3d> sample_primitive_surface(
    const Primitive& prim, double density, std::mt19937_64& rng) {
  if (!(density > 0)) throw ConfigError("primitive: density must be > 0");
  const long n = std::lround(surface_area(prim) * density);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::Vector3d> out;
  out.reserve(n);
  const double sx = prim.size.x(), sy = prim.size.y(), sz = prim.size.z();
  for (long i = 0; i < n; ++i) {
    Eigen::Vector3d local;
    if (prim.kind == Primitive::Kind::rectangle) {
      local = {(unit(rng) - 0.5) * sx, (unit(rng) - 0.5) * sy, 0.0};
    } else {
      // Pick a face with probability proportional to its area.
      const double axy = sx * sy, ayz = sy * sz, axz = sx * sz;
      const double pick = unit(rng) * (axy + ayz + axz);
      const double sign = unit(rng) < 0.5 ? -0.5 : 0.5;
      if (pick < axy) {
        local = {(unit(rng) - 0.5) * sx, (unit(rng) - 0.5) * sy, sign * sz};
      } else if (pick < axy + ayz) {
        local = {sign * sx, (unit(rng) - 0.5) * sy, (unit(rng) - 0.5) * sz};
      } else {
        local = {(unit(rng) - 0.5) * sx, sign * sy, (unit(rng) - 0.5) * sz};
      }
    }
    out.push_back(prim.center + prim.rotation * local);
  }
  return out;
}

/// Deterministic scene sampled on primitive surfaces. Positions are taken
/// as BS-local Cartesian coordinates; scatterers are static with
/// unit-magnitude random-phase gains.
inline ScatterScene sample_scene_from_primitives(
    const std::vector<Primitive>& spec, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  ScatterScene scene;
  for (const Primitive& prim : spec) {
    for (const Eigen::Vector3d& p :
         sample_primitive_surface(prim, density, rng)) {
      scene.scatterers.push_back(scatterer_from_cartesian(
          p, Eigen::Vector3d::Zero(), std::polar(1.0, phase(rng))));
    }
  }
  return scene;
}

}  // namespace isac4d
