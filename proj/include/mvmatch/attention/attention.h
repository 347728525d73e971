#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/attention/params.h"
#include "mvmatch/core/track_token.h"
#include "mvmatch/core/types.h"

namespace mvm {

// Large negative logit standing in for -infinity.
inline constexpr double kMaskedLogit = -1e9;

// T x HW matrix of -|p_i - center_j|^2 / (2 sigma^2). Token j is texel
// (j / width, j % width) with center stride * (col, row).
Eigen::MatrixXd SpatialBias(std::span<const GridCoord> coords, int height,
                            int width, int stride, double sigma);

// Coordinates divided by the pixel extent of the grid, giving [0, 1].
Eigen::MatrixXd NormalizeCoords(std::span<const GridCoord> coords, int height,
                                int width, int stride);

// relu(P W1 + b1) W2 + b2 for an n x 2 input.
Eigen::MatrixXd QueryEmbedding(const Eigen::MatrixXd& normalized,
                               const AttentionParams& params);

// Row-wise softmax. Columns with mask == 0 get exactly zero weight.
void MaskedRowSoftmax(Eigen::MatrixXd* logits,
                      std::span<const uint8_t> column_mask = {});

// softmax(Q (F Wk)^T / sqrt(D) + B) as a T x HW matrix.
Eigen::MatrixXd AttentionalSamplingWeights(const FeatureGrid& grid,
                                           std::span<const GridCoord> coords,
                                           const AttentionParams& params);
// Track features Z = weights (F Wv), T x D.
Eigen::MatrixXd AttentionalSampling(const FeatureGrid& grid,
                                    std::span<const GridCoord> coords,
                                    const AttentionParams& params);

// Per-view track features. values[v] is T x D; visibility[t][v].
struct TrackFeatures {
  std::vector<Eigen::MatrixXd> values;
  std::vector<std::vector<uint8_t>> visibility;

  int NumViews() const { return static_cast<int>(values.size()); }
  int NumTracks() const { return static_cast<int>(visibility.size()); }
};

// Masked self-attention of each track over its visible view slots with a
// residual connection. Invisible slots come out exactly zero.
TrackFeatures TrackTransformer(const TrackFeatures& feats,
                               const AttentionParams& params);
// V x V attention of one track; rows and columns of invisible views are 0.
Eigen::MatrixXd TrackTransformerWeights(const TrackFeatures& feats,
                                        const AttentionParams& params,
                                        int track);

// HW x T weights softmax(Q' K'^T / sqrt(D) + B^T + M').
Eigen::MatrixXd AttentionalSplattingWeights(
    const FeatureGrid& grid, const Eigen::MatrixXd& track_feats,
    std::span<const GridCoord> coords, std::span<const uint8_t> visibility,
    const AttentionParams& params);
// F + weights (Z Wv) Wout. Returns the grid unchanged when no track is
// visible.
FeatureGrid AttentionalSplatting(const FeatureGrid& grid,
                                 const Eigen::MatrixXd& track_feats,
                                 std::span<const GridCoord> coords,
                                 std::span<const uint8_t> visibility,
                                 const AttentionParams& params);

// Sample -> transform -> splat over the group's view slots. grids[s] is the
// feature map of slot s; tracks index the same slots.
std::vector<FeatureGrid> ExchangeTrackFeatures(
    std::span<const FeatureGrid> grids, std::span<const TrackToken> tracks,
    const TrackAttentionParams& params);

}  // namespace mvm
