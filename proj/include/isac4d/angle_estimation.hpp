#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "isac4d/array_geometry.hpp"
#include "isac4d/common.hpp"
#include "isac4d/errors.hpp"
#include "isac4d/range_doppler.hpp"

namespace isac4d {

/// Rectangular angular lattice, radians, strictly increasing along both axes.
struct AngularGrid {
  std::vector<double> theta_values;
  std::vector<double> phi_values;
  double theta_step = 0;
  double phi_step = 0;

  std::size_t size() const { return theta_values.size() * phi_values.size(); }
};

inline std::vector<double> uniform_axis(double lo, double hi, double step) {
  if (!(step > 0) || hi < lo) {
    throw ConfigError("angular grid: need step > 0 and hi >= lo");
  }
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + i * step;
  return v;
}

inline AngularGrid make_uniform_grid(double theta_lo, double theta_hi,
                                     double theta_step, double phi_lo,
                                     double phi_hi, double phi_step) {
  AngularGrid g;
  g.theta_values = uniform_axis(theta_lo, theta_hi, theta_step);
  g.phi_values = uniform_axis(phi_lo, phi_hi, phi_step);
  g.theta_step = theta_step;
  g.phi_step = phi_step;
  if (g.theta_values.front() < -kPi || g.theta_values.back() > kPi ||
      g.phi_values.front() < -kPi / 2 || g.phi_values.back() > kPi / 2) {
    throw ConfigError("angular grid: values outside angle bounds");
  }
  return g;
}

inline AngularGrid make_uniform_grid_deg(double theta_lo, double theta_hi,
                                         double theta_step, double phi_lo,
                                         double phi_hi, double phi_step) {
  return make_uniform_grid(deg2rad(theta_lo), deg2rad(theta_hi),
                           deg2rad(theta_step), deg2rad(phi_lo),
                           deg2rad(phi_hi), deg2rad(phi_step));
}

/// Builds effective-steering atoms via per-element phasor recursion.
/// Column norms come for free as |a^H w| * sqrt(PQ).
class AtomBuilder {
 public:
  AtomBuilder(const UpaConfig& cfg, Eigen::VectorXcd w)
      : cfg_(cfg), w_(std::move(w)), ap_(cfg.p), aq_(cfg.q) {
    validate(cfg_);
    if (w_.size() != cfg_.size()) {
      throw DimensionError("AtomBuilder: precoder length mismatch");
    }
  }

  double build(const Angle& ang, Eigen::Ref<Eigen::VectorXcd> col) const {
    const double u = std::cos(ang.phi_rad) * std::cos(ang.theta_rad);
    const double v = std::cos(ang.phi_rad) * std::sin(ang.theta_rad);
    const cdouble wp = std::polar(1.0, -2.0 * kPi * cfg_.d_over_lambda * u);
    const cdouble wq = std::polar(1.0, -2.0 * kPi * cfg_.d_over_lambda * v);
    ap_(0) = 1.0;
    for (int p = 1; p < cfg_.p; ++p) ap_(p) = ap_(p - 1) * wp;
    aq_(0) = 1.0;
    for (int q = 1; q < cfg_.q; ++q) aq_(q) = aq_(q - 1) * wq;
    cdouble g = 0.0;  // a^H w
    for (int q = 0; q < cfg_.q; ++q) {
      const cdouble cq = std::conj(aq_(q));
      for (int p = 0; p < cfg_.p; ++p) {
        g += cq * std::conj(ap_(p)) * w_(q * cfg_.p + p);
      }
    }
    for (int q = 0; q < cfg_.q; ++q) {
      for (int p = 0; p < cfg_.p; ++p) {
        col(q * cfg_.p + p) = g * aq_(q) * ap_(p);
      }
    }
    return std::abs(g) * std::sqrt(static_cast<double>(cfg_.size()));
  }

  const UpaConfig& cfg() const { return cfg_; }
  const Eigen::VectorXcd& precoder() const { return w_; }

 private:
  UpaConfig cfg_;
  Eigen::VectorXcd w_;
  mutable Eigen::VectorXcd ap_, aq_;
};

/// Overcomplete dictionary of effective steering vectors, column order
/// theta-major (phi runs fastest).
struct Dictionary {
  AngularGrid grid;
  Eigen::MatrixXcd atoms;      // PQ x G
  Eigen::VectorXd atom_norms;  // column 2-norms
  std::vector<Angle> angles;   // per column
};

inline Dictionary build_dictionary(const UpaConfig& cfg,
                                   const Eigen::VectorXcd& w,
                                   const AngularGrid& grid) {
  if (grid.size() == 0) throw ConfigError("build_dictionary: empty grid");
  const AtomBuilder builder(cfg, w);
  Dictionary d;
  d.grid = grid;
  const auto g_total = static_cast<Eigen::Index>(grid.size());
  d.atoms.resize(cfg.size(), g_total);
  d.atom_norms.resize(g_total);
  d.angles.reserve(grid.size());
  Eigen::Index col = 0;
  for (double theta : grid.theta_values) {
    for (double phi : grid.phi_values) {
      const Angle ang{theta, phi};
      d.atom_norms(col) = builder.build(ang, d.atoms.col(col));
      if (d.atom_norms(col) < 1e-12) {
        throw DegenerateDictionaryError(
            "build_dictionary: zero-norm column (precoder null) at theta=" +
            std::to_string(rad2deg(theta)) + " deg, phi=" +
            std::to_string(rad2deg(phi)) + " deg");
      }
      d.angles.push_back(ang);
      ++col;
    }
  }
  return d;
}

/// Greedy sparse recovery result. correlation_count tallies every atom
/// correlation evaluated during selection.
struct SparseSolution {
  std::vector<Angle> support;
  std::vector<int> support_indices;  // column indices; -1 for zoom fine atoms
  Eigen::VectorXcd coefficients;
  double residual_norm = 0;
  long correlation_count = 0;
};

namespace detail {

/// argmax_g |b_g^H r| / ||b_g||; ties resolve to the lowest index.
inline int best_atom(const Eigen::MatrixXcd& atoms,
                     const Eigen::VectorXd& norms,
                     const Eigen::VectorXcd& r) {
  const Eigen::VectorXd c =
      (atoms.adjoint() * r).cwiseAbs().cwiseQuotient(norms);
  int best = 0;
  double best_val = c(0);
  for (Eigen::Index g = 1; g < c.size(); ++g) {
    if (c(g) > best_val) {
      best_val = c(g);
      best = static_cast<int>(g);
    }
  }
  return best;
}

/// Least-squares update on the current atom matrix; throws when the support
/// is rank deficient and the residual is not already negligible.
inline void project_update(const Eigen::MatrixXcd& psi,
                           const Eigen::VectorXcd& h, Eigen::VectorXcd& x,
                           Eigen::VectorXcd& r) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(psi);
  x = cod.solve(h);
  r = h - psi * x;
  if (cod.rank() < psi.cols() && r.norm() > 1e-9 * h.norm()) {
    throw IllConditionedSupportError(
        "omp: selected atoms are rank deficient");
  }
}

}  // namespace detail

/// Classic OMP over the full dictionary.
inline SparseSolution omp_full(const Eigen::VectorXcd& h,
                               const Dictionary& dict, int n_target) {
  if (n_target < 1) throw ConfigError("omp_full: n_target must be >= 1");
  if (n_target > dict.atoms.rows()) {
    throw ConfigError("omp_full: n_target exceeds the antenna count");
  }
  if (h.size() != dict.atoms.rows()) {
    throw DimensionError("omp_full: spatial vector length mismatch");
  }
  SparseSolution sol;
  Eigen::VectorXcd r = h;
  Eigen::MatrixXcd psi(h.size(), 0);
  for (int t = 0; t < n_target; ++t) {
    const int g = detail::best_atom(dict.atoms, dict.atom_norms, r);
    sol.correlation_count += dict.atoms.cols();
    sol.support.push_back(dict.angles[g]);
    sol.support_indices.push_back(g);
    psi.conservativeResize(Eigen::NoChange, t + 1);
    psi.col(t) = dict.atoms.col(g);
    detail::project_update(psi, h, sol.coefficients, r);
  }
  sol.residual_norm = r.norm();
  return sol;
}

struct ZoomOmpParams {
  double fine_step_theta = deg2rad(0.5);
  double fine_step_phi = deg2rad(0.5);
  double halfwidth_theta = deg2rad(5.0);
  double halfwidth_phi = deg2rad(5.0);
};

/// Coarse-to-fine OMP: a global coarse correlation search followed by a
/// fine search on a window around the coarse pick; the fine atom enters the
/// support. The coarse dictionary is built once and reused across calls.
class ZoomOmpSolver {
 public:
  ZoomOmpSolver(const UpaConfig& cfg, const Eigen::VectorXcd& w,
                const AngularGrid& coarse, const ZoomOmpParams& params)
      : builder_(cfg, w),
        coarse_(build_dictionary(cfg, w, coarse)),
        params_(params) {
    if (coarse.theta_step > 0 &&
        !(params.fine_step_theta < coarse.theta_step)) {
      throw ConfigError("zoom_omp: fine theta step must be below coarse");
    }
    if (coarse.phi_step > 0 && !(params.fine_step_phi < coarse.phi_step)) {
      throw ConfigError("zoom_omp: fine phi step must be below coarse");
    }
    if (coarse.theta_step > 0 &&
        2.0 * params.halfwidth_theta + 1e-12 < coarse.theta_step) {
      throw ConfigError("zoom_omp: theta window narrower than a coarse step");
    }
    if (coarse.phi_step > 0 &&
        2.0 * params.halfwidth_phi + 1e-12 < coarse.phi_step) {
      throw ConfigError("zoom_omp: phi window narrower than a coarse step");
    }
  }

  const Dictionary& coarse_dictionary() const { return coarse_; }

  SparseSolution solve(const Eigen::VectorXcd& h, int n_target) const {
    const auto pq = static_cast<Eigen::Index>(builder_.cfg().size());
    if (n_target < 1) throw ConfigError("zoom_omp: n_target must be >= 1");
    if (n_target > pq) {
      throw ConfigError("zoom_omp: n_target exceeds the antenna count");
    }
    if (h.size() != pq) {
      throw DimensionError("zoom_omp: spatial vector length mismatch");
    }
    SparseSolution sol;
    Eigen::VectorXcd r = h;
    Eigen::MatrixXcd psi(h.size(), 0);
    Eigen::MatrixXcd fine_atoms(pq, 0);
    Eigen::VectorXd fine_norms;
    std::vector<Angle> fine_angles;
    for (int t = 0; t < n_target; ++t) {
      const int gc =
          detail::best_atom(coarse_.atoms, coarse_.atom_norms, r);
      sol.correlation_count += coarse_.atoms.cols();
      const Angle center = coarse_.angles[gc];

      // Fine lattice around the coarse pick, aligned to multiples of the
      // fine step and clipped to the coarse grid extents.
      const auto theta_vals = window_axis(
          center.theta_rad, params_.halfwidth_theta, params_.fine_step_theta,
          coarse_.grid.theta_values.front(), coarse_.grid.theta_values.back());
      const auto phi_vals = window_axis(
          center.phi_rad, params_.halfwidth_phi, params_.fine_step_phi,
          coarse_.grid.phi_values.front(), coarse_.grid.phi_values.back());
      const auto gf =
          static_cast<Eigen::Index>(theta_vals.size() * phi_vals.size());
      if (gf == 0) throw ConfigError("zoom_omp: empty fine window");
      fine_atoms.resize(Eigen::NoChange, gf);
      fine_norms.resize(gf);
      fine_angles.clear();
      Eigen::Index col = 0;
      for (double theta : theta_vals) {
        for (double phi : phi_vals) {
          const Angle ang{theta, phi};
          fine_norms(col) = builder_.build(ang, fine_atoms.col(col));
          fine_angles.push_back(ang);
          ++col;
        }
      }
      const int gfine = detail::best_atom(fine_atoms, fine_norms, r);
      sol.correlation_count += gf;
      sol.support.push_back(fine_angles[gfine]);
      sol.support_indices.push_back(-1);
      psi.conservativeResize(Eigen::NoChange, t + 1);
      psi.col(t) = fine_atoms.col(gfine);
      detail::project_update(psi, h, sol.coefficients, r);
    }
    sol.residual_norm = r.norm();
    return sol;
  }

 private:
  static std::vector<double> window_axis(double center, double halfwidth,
                                         double step, double lo, double hi) {
    const int nw = static_cast<int>(std::floor(halfwidth / step + 1e-9));
    std::vector<double> vals;
    vals.reserve(2 * nw + 1);
    for (int i = -nw; i <= nw; ++i) {
      const double v = center + i * step;
      if (v >= lo - 1e-12 && v <= hi + 1e-12) vals.push_back(v);
    }
    return vals;
  }

  AtomBuilder builder_;
  Dictionary coarse_;
  ZoomOmpParams params_;
};

inline SparseSolution zoom_omp(const Eigen::VectorXcd& h,
                               const AngularGrid& coarse,
                               const ZoomOmpParams& params,
                               const UpaConfig& cfg,
                               const Eigen::VectorXcd& w, int n_target) {
  return ZoomOmpSolver(cfg, w, coarse, params).solve(h, n_target);
}

enum class AngleSolver { zoom_omp, omp_full };

struct AngleEstimationParams {
  AngleSolver method = AngleSolver::zoom_omp;
  AngularGrid coarse;      // zoom coarse grid
  AngularGrid full_grid;   // dictionary for omp_full
  ZoomOmpParams zoom;
  int n_target = 1;
};

struct AngleDetection {
  RdPeak peak;
  Angle angle;
  double power = 0;  // |solved amplitude|^2
};

/// Per-peak angle recovery: spatial vector extraction followed by the
/// selected sparse solver; one detection per recovered atom.
inline std::vector<AngleDetection> estimate_angles(
    const RangeDopplerMap& map, const std::vector<RdPeak>& peaks,
    const UpaConfig& cfg, const Eigen::VectorXcd& w,
    const AngleEstimationParams& params, long* correlation_total = nullptr) {
  std::vector<AngleDetection> out;
  if (peaks.empty()) return out;
  long count = 0;
  auto emit = [&](const RdPeak& peak, const SparseSolution& sol) {
    count += sol.correlation_count;
    for (std::size_t s = 0; s < sol.support.size(); ++s) {
      out.push_back({peak, sol.support[s], std::norm(sol.coefficients(s))});
    }
  };
  if (params.method == AngleSolver::zoom_omp) {
    const ZoomOmpSolver solver(cfg, w, params.coarse, params.zoom);
    for (const RdPeak& peak : peaks) {
      emit(peak, solver.solve(extract_spatial_vector(map, peak),
                              params.n_target));
    }
  } else {
    const Dictionary dict = build_dictionary(cfg, w, params.full_grid);
    for (const RdPeak& peak : peaks) {
      emit(peak, omp_full(extract_spatial_vector(map, peak), dict,
                          params.n_target));
    }
  }
  if (correlation_total) *correlation_total += count;
  return out;
}

}  // namespace isac4d
