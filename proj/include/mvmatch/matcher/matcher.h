#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/attention/params.h"
#include "mvmatch/core/track_token.h"
#include "mvmatch/core/types.h"
#include "mvmatch/matcher/features.h"

namespace mvm {

// Anchor centers in target pixels of the matched level.
struct AnchorGrid {
  int rows = 0;
  int cols = 0;
  std::vector<GridCoord> centers;

  // One anchor per texel of a height x width grid.
  static AnchorGrid ForGrid(int height, int width);
  // rows x cols anchors tiling [0, width-1] x [0, height-1] uniformly.
  static AnchorGrid Uniform(int rows, int cols, int height, int width);
};

struct GlobalMatchOptions {
  double inverse_temperature = 1.0;
};

// Regression by classification: logits beta <f_s, f_t(anchor)> / sqrt(D),
// softmax over anchors, expected anchor center as the target and the peak
// probability as confidence. Anchor features are bilinear samples of the
// target grid.
DenseWarpField GlobalMatch(const FeatureGrid& src, const FeatureGrid& tgt,
                           const AnchorGrid& anchors,
                           const GlobalMatchOptions& options = {});

enum class AlignmentMode { kGather, kInverseWarp, kReversePass };

// 1x1 conv (C_in -> hidden) + ReLU, 3x3 conv (hidden -> hidden) + ReLU.
struct ConvStack {
  Eigen::MatrixXd w1;  // C_in x hidden
  Eigen::RowVectorXd b1;
  Eigen::MatrixXd w2;  // 9 * hidden x hidden, tap-major
  Eigen::RowVectorXd b2;
};

struct LevelParams {
  int stride = 1;
  int window = 3;
  bool mvfuse = false;
  ConvStack f;
  Eigen::MatrixXd head_w;  // hidden x 3 -> (dx, dy, dp)
  Eigen::RowVectorXd head_b;
  MVFuseParams fuse;
};

struct MatcherConfig {
  int fine_channels = 0;
  int coarse_channels = 0;
  int hidden = 16;
  int coarse_stride = 8;
  std::vector<int> strides = {8, 4, 2, 1};
  std::vector<int> windows = {5, 3, 3, 3};
  // Correlation + head passes per level.
  int passes_per_level = 1;
  std::vector<int> mvfuse_strides = {8, 1};
  int mvfuse_iterations = 2;
  int mvfuse_expansion = 2;
  double inverse_temperature = 160.0;
  AlignmentMode alignment = AlignmentMode::kInverseWarp;
  bool correlation_head = true;
  double confidence_sigma_px = 0.25;
  // Coarse texels below this confidence do not steer upsampled warps.
  double upsample_min_confidence = 1e-3;
  // Scale of the learned output head and of the exchange output projection.
  // Zero keeps both inert, which is the right choice without trained weights.
  double learned_head_scale = 0.0;
  double exchange_out_scale = 0.0;
  int output_upsample = 1;
  uint64_t seed = 0;
};

struct MatcherParams {
  MatcherConfig config;
  TrackAttentionParams exchange;
  std::vector<LevelParams> levels;
};

MatcherParams BuildMatcherParams(const MatcherConfig& config);

struct RefinerState {
  int stride = 8;
  // Per target: source-aligned hidden grid and warp (confidence inside).
  std::vector<FeatureGrid> hidden;
  std::vector<DenseWarpField> warps;
  // Target -> source warps, kept only in reverse-pass alignment mode.
  std::vector<DenseWarpField> reverse_warps;
};

// Sub-pixel offset (dx, dy) of the correlation peak of one pixel relative to
// the window center: integer argmax refined by a 2D quadratic fit on the
// surrounding 3x3 scores. Entries at kMaskedLogit are invalid.
Eigen::Vector2d CorrelationPeak(const CorrelationVolume& vol, int row, int col);

// Pushes target features onto the source grid along a target -> source warp
// with bilinear splatting; unfilled texels stay zero.
FeatureGrid SplatFeatures(const FeatureGrid& target,
                          const DenseWarpField& target_to_source,
                          int source_height, int source_width);

// One coarse-to-fine step to `level`'s stride for every target of the group.
RefinerState RefineLevel(const RefinerState& state, const ImageGroup& group,
                         const FeatureProvider& provider,
                         const MatcherParams& params, const LevelParams& level);

struct GroupResult {
  std::vector<DenseWarpField> warps;  // per target, base resolution
  std::vector<DenseWarpField> coarse;
  std::vector<std::vector<DenseWarpField>> level_warps;  // [level][target]
};

// Track exchange on coarse features, global matching per target, then
// refinement through every configured level.
GroupResult RunGroup(const ImageGroup& group, const FeatureProvider& provider,
                     std::span<const TrackToken> tracks,
                     const MatcherParams& params);

}  // namespace mvm
