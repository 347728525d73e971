#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/core/types.h"

namespace mvm {

struct PointPair {
  Eigen::Vector2d src;
  Eigen::Vector2d dst;
};

class DegenerateConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scales so that H(2,2) = 1 when that entry is not (near) zero.
Eigen::Matrix3d NormalizeHomography(const Eigen::Matrix3d& h);

// Hartley-normalized DLT over all pairs. Throws DegenerateConfigurationError
// when the stacked system has rank below 8.
Eigen::Matrix3d DltHomography(std::span<const PointPair> pairs);

// Forward and backward transfer distances of one pair.
void TransferErrors(const Eigen::Matrix3d& h, const Eigen::Matrix3d& h_inv,
                    const PointPair& pair, double* forward, double* backward);

struct RansacOptions {
  double threshold = 3.0;
  int max_iterations = 2000;
  double confidence = 0.999;
  // Stop early once the sample count implied by the inlier ratio is reached.
  bool adaptive = true;
  uint64_t seed = 0;
};

struct RansacResult {
  Eigen::Matrix3d homography;
  std::vector<uint8_t> inliers;  // under the refit model
  int num_inliers = 0;
  int best_hypothesis_inliers = 0;  // consensus before the refit
  int iterations = 0;
};

// 4-point hypotheses; a pair is an inlier when both transfer errors are
// within the threshold. The winner is refit by DLT on its consensus set.
RansacResult RansacHomography(std::span<const PointPair> pairs,
                              const RansacOptions& options);

// Mean distance between the four image corners (0,0), (w-1,0), (0,h-1),
// (w-1,h-1) mapped by both homographies.
double CornerError(const Eigen::Matrix3d& estimated, const Eigen::Matrix3d& gt,
                   int height, int width);

// Per-threshold credit clamp(1 - error / threshold, 0, 1).
std::vector<double> CornerAucContribution(double error,
                                          std::span<const double> thresholds);

// Sorted per-pair errors and the mean clamped credit at each threshold.
struct PoseErrorCurve {
  std::vector<double> errors;
  std::vector<double> thresholds;
  std::vector<double> auc;

  static PoseErrorCurve FromErrors(std::vector<double> errors,
                                   std::vector<double> thresholds);
};

// Up to max_matches confident matches (confidence > min_confidence) drawn by
// confidence-stratified sampling: candidates are split into ten equal-width
// confidence bins, bins receive proportional largest-remainder quotas and
// each bin is sampled uniformly without replacement.
std::vector<PointPair> BalancedMatchSample(const DenseWarpField& warp,
                                           int max_matches,
                                           double min_confidence,
                                           uint64_t seed);

struct WarpHomographyOptions {
  int max_matches = 5000;
  double min_confidence = 0.3;
  RansacOptions ransac;
};

struct WarpHomographyResult {
  Eigen::Matrix3d homography = Eigen::Matrix3d::Identity();
  int num_matches = 0;
  int num_inliers = 0;
  bool degenerate = false;  // too few matches or rank-deficient system
};

// Balanced match sample of a base-resolution warp, then RANSAC with a DLT
// refit on the consensus set.
WarpHomographyResult EstimateWarpHomography(const DenseWarpField& warp,
                                            const WarpHomographyOptions& options);

}  // namespace mvm
