#include <gtest/gtest.h>

#include <random>

#include "isac4d/fusion.hpp"
#include "isac4d/metrics.hpp"
#include "support/oracles.hpp"

using namespace isac4d;

namespace {

std::vector<Eigen::Vector3d> random_cloud(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Eigen::Vector3d> out;
  for (int i = 0; i < n; ++i) out.push_back({g(rng), g(rng), g(rng)});
  return out;
}

}  // namespace

TEST(Chamfer, HandValues) {
  // ({0},{1}): 1 + 1 = 2 with the distance (not squared) form.
  EXPECT_DOUBLE_EQ(chamfer({{0, 0, 0}}, {{1, 0, 0}}), 2.0);
  // gt {0, 2}, pred {1}: fwd (1+1)/2 = 1, bwd 1/1 = 1.
  EXPECT_DOUBLE_EQ(chamfer({{0, 0, 0}, {2, 0, 0}}, {{1, 0, 0}}), 2.0);
  EXPECT_DOUBLE_EQ(chamfer({{0, 0, 0}}, {{0, 0, 0}}), 0.0);
}

TEST(Chamfer, Symmetric) {
  const auto a = random_cloud(7, 1);
  const auto b = random_cloud(5, 2);
  EXPECT_DOUBLE_EQ(chamfer(a, b), chamfer(b, a));
}

TEST(Chamfer, MatchesBruteForceOracle) {
  const auto a = random_cloud(20, 3);
  const auto b = random_cloud(15, 4);
  EXPECT_NEAR(chamfer(a, b), oracles::brute_chamfer(a, b), 1e-12);
}

TEST(Chamfer, RigidTransformInvariant) {
  const auto a = random_cloud(10, 5);
  const auto b = random_cloud(12, 6);
  const BsPose pose = make_pose(33, -21, 17, {4, -2, 9}, 0);
  std::vector<Eigen::Vector3d> ta, tb;
  for (const auto& p : a) ta.push_back(to_global(p, pose));
  for (const auto& p : b) tb.push_back(to_global(p, pose));
  EXPECT_NEAR(chamfer(ta, tb), chamfer(a, b), 1e-10);
}

TEST(Chamfer, EmptySetThrows) {
  EXPECT_THROW(chamfer({}, {{1, 0, 0}}), MetricError);
  EXPECT_THROW(chamfer({{1, 0, 0}}, {}), MetricError);
}

TEST(PrecisionRecall, HandValues) {
  // gt {0, 10}, pred {0.4}: pred point matches -> P = 1; only one gt
  // matched -> R = 0.5; F = 2 * 1 * 0.5 / 1.5 = 2/3.
  const MetricReport r =
      precision_recall_f({{0, 0, 0}, {10, 0, 0}}, {{0.4, 0, 0}}, 1.0);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_NEAR(r.f_score, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.n_gt, 2u);
  EXPECT_EQ(r.n_pred, 1u);
  EXPECT_DOUBLE_EQ(r.match_radius_m, 1.0);
}

TEST(PrecisionRecall, PerfectAndDisjoint) {
  const std::vector<Eigen::Vector3d> gt{{0, 0, 0}, {5, 0, 0}};
  const MetricReport perfect = precision_recall_f(gt, gt, 0.5);
  EXPECT_DOUBLE_EQ(perfect.precision, 1.0);
  EXPECT_DOUBLE_EQ(perfect.recall, 1.0);
  EXPECT_DOUBLE_EQ(perfect.f_score, 1.0);
  EXPECT_DOUBLE_EQ(perfect.chamfer_m, 0.0);

  const MetricReport none =
      precision_recall_f(gt, {{100, 100, 100}}, 0.5);
  EXPECT_DOUBLE_EQ(none.precision, 0.0);
  EXPECT_DOUBLE_EQ(none.recall, 0.0);
  EXPECT_DOUBLE_EQ(none.f_score, 0.0);  // 0/0 convention
}

TEST(PrecisionRecall, MatchAtExactRadiusCounts) {
  const MetricReport r =
      precision_recall_f({{0, 0, 0}}, {{1.0, 0, 0}}, 1.0);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
}

TEST(PrecisionRecall, MonotoneInRadius) {
  const auto gt = random_cloud(15, 7);
  const auto pred = random_cloud(15, 8);
  double prev_p = 0, prev_r = 0;
  for (double radius : {0.2, 0.5, 1.0, 2.0, 5.0}) {
    const MetricReport rep = precision_recall_f(gt, pred, radius);
    EXPECT_GE(rep.precision, prev_p);
    EXPECT_GE(rep.recall, prev_r);
    prev_p = rep.precision;
    prev_r = rep.recall;
  }
  EXPECT_DOUBLE_EQ(prev_p, 1.0);
  EXPECT_DOUBLE_EQ(prev_r, 1.0);
}

TEST(PrecisionRecall, InvalidArguments) {
  const std::vector<Eigen::Vector3d> one{{0, 0, 0}};
  EXPECT_THROW(precision_recall_f({}, one, 1.0), MetricError);
  EXPECT_THROW(precision_recall_f(one, {}, 1.0), MetricError);
  EXPECT_THROW(precision_recall_f(one, one, 0.0), MetricError);
  EXPECT_THROW(precision_recall_f(one, one, -1.0), MetricError);
}
