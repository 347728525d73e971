#pragma once

// Explicit-loop reference implementations used as test oracles. They follow
// the operation definitions term by term and avoid the matrix code paths of
// the library.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mvmatch/attention/attention.h"
#include "mvmatch/attention/params.h"
#include "mvmatch/core/rng.h"
#include "mvmatch/core/types.h"
#include "mvmatch/eval/homography.h"
#include "mvmatch/synth/camera.h"
#include "mvmatch/postprocess/postprocess.h"

namespace mvm::testing {

FeatureGrid RandomGrid(int height, int width, int channels, int stride,
                       Rng& rng, double scale = 1.0);
std::vector<GridCoord> RandomCoords(int n, int height, int width, int stride,
                                    Rng& rng);

// T x D features of attentional sampling.
Eigen::MatrixXd LoopSampling(const FeatureGrid& grid,
                             const std::vector<GridCoord>& coords,
                             const AttentionParams& params);

// values[v] (T x D) after the view-axis transformer; visibility[t][v].
std::vector<Eigen::MatrixXd> LoopTransformer(
    const std::vector<Eigen::MatrixXd>& values,
    const std::vector<std::vector<uint8_t>>& visibility,
    const AttentionParams& params);

FeatureGrid LoopSplatting(const FeatureGrid& grid,
                          const Eigen::MatrixXd& track_feats,
                          const std::vector<GridCoord>& coords,
                          const std::vector<uint8_t>& visibility,
                          const AttentionParams& params);

std::vector<FeatureGrid> LoopMVFuse(std::vector<FeatureGrid> hidden,
                                    const MVFuseParams& params,
                                    int iterations);

// Per-pixel argmax of confidence, ties to the first candidate.
SelectedMatches LoopSelect(const PairMatchBank& bank);

// Cycle test with the backward coordinate fields interpolated by hand.
std::vector<uint8_t> LoopReciprocity(const DenseWarpField& forward,
                                     const DenseWarpField& backward,
                                     double eps_p);

// Greedy NMS by repeated full scans for the best remaining candidate.
std::vector<Keypoint> LoopNms(const ScoreMap& score, int radius,
                              std::optional<int> max_keypoints = {});

// Minimum within-cluster sum of squares over every split of the points
// into two nonempty sets. Returns the label (0/1) of each point.
std::vector<int> ExhaustiveTwoMeans(const std::vector<Eigen::VectorXd>& points);

// Mean distance of each point to its nearest other point.
double MeanNearestNeighbor(const std::vector<GridCoord>& points);

// Well-conditioned random homography for a size x size image: similarity
// plus mild perspective.
Eigen::Matrix3d RandomHomography(Rng& rng, double size);

Eigen::Vector2d Apply(const Eigen::Matrix3d& h, const Eigen::Vector2d& p);

// Exact correspondences under h for `inliers` points, then `outliers`
// pairs whose destination is at least 10 px away from h(src).
struct RansacInstance {
  Eigen::Matrix3d h;
  std::vector<PointPair> pairs;
  std::vector<uint8_t> truth;
};
RansacInstance MakeRansacInstance(Rng& rng, int inliers, int outliers,
                                  double size);

// n cameras on an arc around the origin, looking at it.
std::vector<PinholeCamera> ArcCameras(int n, double radius, double focal,
                                      double size);

}  // namespace mvm::testing
