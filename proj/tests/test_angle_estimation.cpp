#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isac4d/angle_estimation.hpp"

using namespace isac4d;

namespace {

Eigen::VectorXcd random_vec(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = cdouble(g(rng), g(rng));
  return v;
}

// Exhaustive normalized-correlation search built directly on
// effective_steering, independent of the dictionary machinery.
Angle brute_force_best(const UpaConfig& cfg, const Eigen::VectorXcd& w,
                       const Eigen::VectorXcd& h, const AngularGrid& grid) {
  Angle best{0, 0};
  double best_val = -1;
  for (double theta : grid.theta_values) {
    for (double phi : grid.phi_values) {
      const Eigen::VectorXcd b = effective_steering(cfg, {theta, phi}, w);
      const double n = b.norm();
      if (n < 1e-12) continue;
      const double val = std::abs(b.dot(h)) / n;
      if (val > best_val) {
        best_val = val;
        best = {theta, phi};
      }
    }
  }
  return best;
}

}  // namespace

TEST(AngularGrid, AxisCounts) {
  EXPECT_EQ(uniform_axis(-60, 60, 5).size(), 25u);
  EXPECT_EQ(uniform_axis(-30, 30, 5).size(), 13u);
  EXPECT_EQ(uniform_axis(-60, 60, 0.5).size(), 241u);
  EXPECT_EQ(uniform_axis(-30, 30, 0.5).size(), 121u);
  EXPECT_EQ(make_uniform_grid_deg(-60, 60, 5, -30, 30, 5).size(), 325u);
  EXPECT_EQ(make_uniform_grid_deg(-60, 60, 0.5, -30, 30, 0.5).size(), 29161u);
}

TEST(AngularGrid, Invalid) {
  EXPECT_THROW(uniform_axis(0, 1, 0), ConfigError);
  EXPECT_THROW(uniform_axis(1, 0, 0.5), ConfigError);
  EXPECT_THROW(make_uniform_grid_deg(-200, 200, 5, 0, 0, 5), ConfigError);
  EXPECT_THROW(make_uniform_grid_deg(0, 0, 5, -100, 100, 5), ConfigError);
}

TEST(AtomBuilder, MatchesEffectiveSteering) {
  const UpaConfig cfg{4, 4, 0.5};
  const Eigen::VectorXcd w = random_vec(16, 3).normalized();
  const AtomBuilder builder(cfg, w);
  Eigen::VectorXcd col(16);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ut(-kPi / 2, kPi / 2);
  for (int it = 0; it < 25; ++it) {
    const Angle ang{ut(rng), 0.5 * ut(rng)};
    const double norm = builder.build(ang, col);
    const Eigen::VectorXcd ref = effective_steering(cfg, ang, w);
    EXPECT_LT((col - ref).norm(), 1e-12 * std::max(1.0, ref.norm()));
    EXPECT_NEAR(norm, ref.norm(), 1e-10);
  }
}

TEST(Dictionary, BoresightMatchedNormIsPq) {
  const UpaConfig cfg{4, 4, 0.5};
  const AngularGrid grid = make_uniform_grid_deg(-10, 10, 5, -10, 10, 5);
  const Dictionary d = build_dictionary(cfg, matched_precoder(cfg), grid);
  ASSERT_EQ(d.atoms.cols(), 25);
  // theta-major, phi fastest: boresight sits at (2 * 5) + 2.
  const int col = 2 * 5 + 2;
  EXPECT_NEAR(d.angles[col].theta_rad, 0.0, 1e-15);
  EXPECT_NEAR(d.angles[col].phi_rad, 0.0, 1e-15);
  EXPECT_NEAR(d.atom_norms(col), 16.0, 1e-10);
}

TEST(Dictionary, ColumnOrderThetaMajor) {
  const AngularGrid grid = make_uniform_grid_deg(0, 10, 5, 0, 5, 5);
  const Dictionary d =
      build_dictionary({2, 2, 0.5}, matched_precoder({2, 2, 0.5}), grid);
  ASSERT_EQ(d.angles.size(), 6u);
  EXPECT_NEAR(d.angles[0].theta_rad, 0.0, 1e-15);
  EXPECT_NEAR(d.angles[0].phi_rad, 0.0, 1e-15);
  EXPECT_NEAR(d.angles[1].phi_rad, deg2rad(5.0), 1e-15);
  EXPECT_NEAR(d.angles[2].theta_rad, deg2rad(5.0), 1e-15);
}

TEST(Dictionary, NullPrecoderColumnThrows) {
  // w orthogonal to the single steering vector on the grid.
  Eigen::VectorXcd w(2);
  w << M_SQRT1_2, M_SQRT1_2;  // a(0,0) = [1,-1]
  const AngularGrid grid = make_uniform_grid_deg(0, 0, 1, 0, 0, 1);
  EXPECT_THROW(build_dictionary({2, 1, 0.5}, w, grid),
               DegenerateDictionaryError);
}

TEST(OmpFull, RecoversExactAtom) {
  const UpaConfig cfg{4, 4, 0.5};
  const Eigen::VectorXcd w = matched_precoder(cfg);
  // phi >= 5 keeps the columns distinct (the array cannot tell +-phi
  // apart) and stays clear of the exact boresight-precoder nulls that sit
  // on (+-60, 0) and (+-30, 0).
  const AngularGrid grid = make_uniform_grid_deg(-60, 60, 5, 5, 30, 5);
  const Dictionary dict = build_dictionary(cfg, w, grid);
  const int target = 137;
  const cdouble c{2.0, -1.0};
  const Eigen::VectorXcd h = c * dict.atoms.col(target);
  const SparseSolution sol = omp_full(h, dict, 1);
  ASSERT_EQ(sol.support_indices.size(), 1u);
  EXPECT_EQ(sol.support_indices[0], target);
  EXPECT_NEAR(std::abs(sol.coefficients(0) - c), 0.0, 1e-10);
  EXPECT_LT(sol.residual_norm, 1e-10);
  EXPECT_EQ(sol.correlation_count, 150);
}

TEST(OmpFull, ZeroInputTiesToLowestIndex) {
  const UpaConfig cfg{2, 2, 0.5};
  const AngularGrid grid = make_uniform_grid_deg(-10, 10, 5, 0, 10, 5);
  const Dictionary dict = build_dictionary(cfg, matched_precoder(cfg), grid);
  const SparseSolution sol =
      omp_full(Eigen::VectorXcd::Zero(4), dict, 1);
  ASSERT_EQ(sol.support_indices.size(), 1u);
  EXPECT_EQ(sol.support_indices[0], 0);
  EXPECT_NEAR(std::abs(sol.coefficients(0)), 0.0, 1e-12);
  EXPECT_LT(sol.residual_norm, 1e-12);
}

TEST(OmpFull, TwoOrthogonalAtoms) {
  // 2-element array, w = e_0: atoms are the plain steering vectors.
  // a(theta=0, phi=0) = [1,-1]; a(any theta, phi=pi/2) = [1,1].
  const UpaConfig cfg{2, 1, 0.5};
  Eigen::VectorXcd w(2);
  w << 1.0, 0.0;
  AngularGrid grid;
  grid.theta_values = {0.0};
  grid.phi_values = {0.0, kPi / 2};
  grid.theta_step = 1.0;
  grid.phi_step = kPi / 2;
  const Dictionary dict = build_dictionary(cfg, w, grid);
  Eigen::VectorXcd h(2);
  const cdouble c0{3.0, 0.0}, c1{0.0, 2.0};
  h = c1 * dict.atoms.col(0) + c0 * dict.atoms.col(1);
  const SparseSolution sol = omp_full(h, dict, 2);
  ASSERT_EQ(sol.support_indices.size(), 2u);
  EXPECT_EQ(sol.support_indices[0], 1);  // larger correlation first
  EXPECT_EQ(sol.support_indices[1], 0);
  EXPECT_NEAR(std::abs(sol.coefficients(0) - c0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(sol.coefficients(1) - c1), 0.0, 1e-10);
  EXPECT_LT(sol.residual_norm, 1e-10);
  EXPECT_EQ(sol.correlation_count, 4);
}

TEST(OmpFull, ResidualOrthogonalToSupport) {
  const UpaConfig cfg{4, 4, 0.5};
  const Eigen::VectorXcd w = matched_precoder(cfg);
  const AngularGrid grid = make_uniform_grid_deg(-60, 60, 10, 10, 30, 10);
  const Dictionary dict = build_dictionary(cfg, w, grid);
  const Eigen::VectorXcd h = random_vec(16, 21);
  const SparseSolution sol = omp_full(h, dict, 3);
  const Eigen::VectorXcd r =
      h - [&] {
        Eigen::VectorXcd fit = Eigen::VectorXcd::Zero(16);
        for (std::size_t s = 0; s < sol.support_indices.size(); ++s) {
          fit += sol.coefficients(s) * dict.atoms.col(sol.support_indices[s]);
        }
        return fit;
      }();
  EXPECT_NEAR(r.norm(), sol.residual_norm, 1e-9);
  for (int idx : sol.support_indices) {
    EXPECT_LT(std::abs(dict.atoms.col(idx).dot(r)), 1e-9 * h.norm());
  }
}

TEST(OmpFull, ResidualMonotoneInTargets) {
  const UpaConfig cfg{4, 4, 0.5};
  const Dictionary dict =
      build_dictionary(cfg, matched_precoder(cfg),
                       make_uniform_grid_deg(-60, 60, 10, 10, 30, 10));
  const Eigen::VectorXcd h = random_vec(16, 33);
  double prev = h.norm();
  for (int t = 1; t <= 4; ++t) {
    const double r = omp_full(h, dict, t).residual_norm;
    EXPECT_LE(r, prev + 1e-12);
    prev = r;
  }
}

TEST(OmpFull, ScaleEquivariance) {
  const UpaConfig cfg{4, 4, 0.5};
  const Dictionary dict =
      build_dictionary(cfg, matched_precoder(cfg),
                       make_uniform_grid_deg(-60, 60, 10, 10, 30, 10));
  const Eigen::VectorXcd h = random_vec(16, 44);
  const cdouble c{0.3, -1.4};
  const SparseSolution a = omp_full(h, dict, 2);
  const SparseSolution b = omp_full(c * h, dict, 2);
  ASSERT_EQ(a.support_indices, b.support_indices);
  EXPECT_LT((b.coefficients - c * a.coefficients).norm(), 1e-9);
  EXPECT_NEAR(b.residual_norm, std::abs(c) * a.residual_norm, 1e-9);
}

TEST(OmpFull, ArgumentValidation) {
  const UpaConfig cfg{2, 2, 0.5};
  const Dictionary dict =
      build_dictionary(cfg, matched_precoder(cfg),
                       make_uniform_grid_deg(0, 10, 5, 0, 10, 5));
  EXPECT_THROW(omp_full(Eigen::VectorXcd::Zero(4), dict, 0), ConfigError);
  EXPECT_THROW(omp_full(Eigen::VectorXcd::Zero(4), dict, 5), ConfigError);
  EXPECT_THROW(omp_full(Eigen::VectorXcd::Zero(3), dict, 1), DimensionError);
}

TEST(ZoomOmp, RecoversFineLatticeAngle) {
  const UpaConfig cfg{4, 4, 0.5};
  const Eigen::VectorXcd w = matched_precoder(cfg);
  const AngularGrid coarse = make_uniform_grid_deg(-60, 60, 5, 5, 30, 5);
  const ZoomOmpSolver solver(cfg, w, coarse, ZoomOmpParams{});
  const Angle truth{deg2rad(12.5), deg2rad(7.0)};
  const cdouble c{1.2, 0.8};
  const Eigen::VectorXcd h = c * effective_steering(cfg, truth, w);
  const SparseSolution sol = solver.solve(h, 1);
  ASSERT_EQ(sol.support.size(), 1u);
  EXPECT_NEAR(sol.support[0].theta_rad, truth.theta_rad, 1e-9);
  EXPECT_NEAR(sol.support[0].phi_rad, truth.phi_rad, 1e-9);
  EXPECT_NEAR(std::abs(sol.coefficients(0) - c), 0.0, 1e-9);
  EXPECT_LT(sol.residual_norm, 1e-9 * h.norm());
}

TEST(ZoomOmp, AgreesWithBruteForceFineSearch) {
  const UpaConfig cfg{4, 4, 0.5};
  const Eigen::VectorXcd w = matched_precoder(cfg);
  const AngularGrid coarse = make_uniform_grid_deg(-60, 60, 5, 5, 30, 5);
  const ZoomOmpSolver solver(cfg, w, coarse, ZoomOmpParams{});
  const AngularGrid fine = make_uniform_grid_deg(-60, 60, 0.5, 5, 30, 0.5);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ut(deg2rad(-55.0), deg2rad(55.0));
  std::uniform_real_distribution<double> up(deg2rad(7.0), deg2rad(28.0));
  for (int it = 0; it < 5; ++it) {
    const Angle truth{ut(rng), up(rng)};
    const Eigen::VectorXcd h = effective_steering(cfg, truth, w);
    const SparseSolution sol = solver.solve(h, 1);
    const Angle ref = brute_force_best(cfg, w, h, fine);
    ASSERT_EQ(sol.support.size(), 1u);
    EXPECT_NEAR(sol.support[0].theta_rad, ref.theta_rad, 1e-12);
    EXPECT_NEAR(sol.support[0].phi_rad, ref.phi_rad, 1e-12);
  }
}

TEST(ZoomOmp, CorrelationCountInteriorAndClipped) {
  const UpaConfig cfg{4, 4, 0.5};
  const Eigen::VectorXcd w = matched_precoder(cfg);
  const AngularGrid coarse = make_uniform_grid_deg(-50, 50, 5, 5, 30, 5);
  const ZoomOmpSolver solver(cfg, w, coarse, ZoomOmpParams{});
  // Interior pick: 21 x 6 coarse + 21 x 21 fine.
  const Eigen::VectorXcd hi =
      effective_steering(cfg, {0.0, deg2rad(15.0)}, w);
  EXPECT_EQ(solver.solve(hi, 1).correlation_count, 126 + 441);
  // Corner pick at theta = -50: the theta window clips to 11 values.
  const Eigen::VectorXcd hc =
      effective_steering(cfg, {deg2rad(-50.0), deg2rad(15.0)}, w);
  EXPECT_EQ(solver.solve(hc, 1).correlation_count, 126 + 11 * 21);
}

TEST(ZoomOmp, ParameterValidation) {
  const UpaConfig cfg{2, 2, 0.5};
  const Eigen::VectorXcd w = matched_precoder(cfg);
  const AngularGrid coarse = make_uniform_grid_deg(-60, 60, 5, -30, 30, 5);
  ZoomOmpParams bad_step;
  bad_step.fine_step_theta = deg2rad(5.0);
  EXPECT_THROW(ZoomOmpSolver(cfg, w, coarse, bad_step), ConfigError);
  ZoomOmpParams bad_window;
  bad_window.halfwidth_phi = deg2rad(1.0);
  EXPECT_THROW(ZoomOmpSolver(cfg, w, coarse, bad_window), ConfigError);
}

TEST(EstimateAngles, EmptyPeaksGiveEmptyResult) {
  RangeDopplerMap map;
  AngleEstimationParams params;
  long count = 0;
  const auto out = estimate_angles(map, {}, {2, 2, 0.5},
                                   matched_precoder({2, 2, 0.5}), params,
                                   &count);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(count, 0);
}

TEST(EstimateAngles, PerPeakDetectionsAndCounts) {
  const UpaConfig cfg{4, 4, 0.5};
  const Eigen::VectorXcd w = matched_precoder(cfg);
  const Angle ang{deg2rad(10.0), deg2rad(5.0)};
  const Eigen::VectorXcd b = effective_steering(cfg, ang, w);

  RangeDopplerMap map;
  map.n_r = 4;
  map.n_d = 4;
  map.per_antenna.resize(16);
  for (int a = 0; a < 16; ++a) {
    map.per_antenna[a] = Eigen::MatrixXcd::Zero(4, 4);
    map.per_antenna[a](1, 2) = 2.0 * b(a);
    map.per_antenna[a](3, 0) = cdouble(0, -1) * b(a);
  }
  std::vector<RdPeak> peaks(2);
  peaks[0].m = 1;
  peaks[0].n = 2;
  peaks[1].m = 3;
  peaks[1].n = 0;

  AngleEstimationParams params;
  params.method = AngleSolver::omp_full;
  params.full_grid = make_uniform_grid_deg(-60, 60, 5, 5, 30, 5);
  params.n_target = 1;
  long count = 0;
  const auto out = estimate_angles(map, peaks, cfg, w, params, &count);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(count, 2 * 150);
  EXPECT_NEAR(out[0].angle.theta_rad, ang.theta_rad, 1e-12);
  EXPECT_NEAR(out[0].angle.phi_rad, ang.phi_rad, 1e-12);
  EXPECT_NEAR(out[0].power, 4.0, 1e-9);
  EXPECT_NEAR(out[1].power, 1.0, 1e-9);
  EXPECT_EQ(out[0].peak.m, 1);
  EXPECT_EQ(out[1].peak.m, 3);
}
