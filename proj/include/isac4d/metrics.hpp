#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "isac4d/errors.hpp"

namespace isac4d {

struct MetricReport {
  double chamfer_m = 0;
  double precision = 0;
  double recall = 0;
  double f_score = 0;
  double match_radius_m = 0;
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
};

namespace detail {

inline double nearest_distance(const Eigen::Vector3d& x,
                               const std::vector<Eigen::Vector3d>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : set) {
    best = std::min(best, (x - y).norm());
  }
  return best;
}

}  // namespace detail

/// Symmetric average nearest-neighbor distance (distance form, not squared).
inline double chamfer(const std::vector<Eigen::Vector3d>& gt,
                      const std::vector<Eigen::Vector3d>& pred) {
  if (gt.empty() || pred.empty()) {
    throw MetricError("chamfer: both point sets must be non-empty");
  }
  double fwd = 0, bwd = 0;
  for (const auto& x : gt) fwd += detail::nearest_distance(x, pred);
  for (const auto& y : pred) bwd += detail::nearest_distance(y, gt);
  return fwd / gt.size() + bwd / pred.size();
}

/// Distance-thresholded precision/recall and their harmonic mean, with the
/// 0/0 -> 0 convention for the F-score.
inline MetricReport precision_recall_f(const std::vector<Eigen::Vector3d>& gt,
                                       const std::vector<Eigen::Vector3d>& pred,
                                       double match_radius) {
  if (gt.empty() || pred.empty()) {
    throw MetricError("precision_recall_f: both point sets must be non-empty");
  }
  if (!(match_radius > 0)) {
    throw MetricError("precision_recall_f: match_radius must be > 0");
  }
  MetricReport r;
  r.match_radius_m = match_radius;
  r.n_gt = gt.size();
  r.n_pred = pred.size();
  std::size_t matched_pred = 0, matched_gt = 0;
  for (const auto& y : pred) {
    if (detail::nearest_distance(y, gt) <= match_radius) ++matched_pred;
  }
  for (const auto& x : gt) {
    if (detail::nearest_distance(x, pred) <= match_radius) ++matched_gt;
  }
  r.precision = static_cast<double>(matched_pred) / pred.size();
  r.recall = static_cast<double>(matched_gt) / gt.size();
  r.f_score = (r.precision + r.recall) > 0
                  ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                  : 0.0;
  r.chamfer_m = chamfer(gt, pred);
  return r;
}

}  // namespace isac4d
