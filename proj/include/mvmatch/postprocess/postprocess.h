#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvmatch/core/track_token.h"
#include "mvmatch/core/types.h"
#include "mvmatch/tracks/track_io.h"

namespace mvm {

// Candidate warps of one ordered pair, one per group that contains it.
struct PairMatchBank {
  int source_view = 0;
  int target_view = 1;
  std::vector<DenseWarpField> candidates;
};

struct SelectedMatches {
  DenseWarpField warp;
  std::vector<int> group_index;  // winning candidate per pixel
};

// Per-pixel argmax of confidence over candidates, ties to the lowest index.
SelectedMatches SelectMatches(const PairMatchBank& bank);

// keep(u) iff the forward target lies inside the backward image and
// |u - backward(forward(u))| <= eps_p, with the backward coordinate fields
// interpolated bilinearly.
std::vector<uint8_t> ReciprocityFilter(const DenseWarpField& forward,
                                       const DenseWarpField& backward,
                                       double eps_p);

// Confidence with rejected pixels set to 0.
std::vector<double> FilterConfidence(const DenseWarpField& warp,
                                     std::span<const uint8_t> keep);

struct ScoreMap {
  int height = 0;
  int width = 0;
  std::vector<int> length;              // L(u)
  std::vector<double> mean_confidence;  // C(u)
  std::vector<double> score;            // S(u) = L(u) + C(u)
};

// L(u) counts targets with filtered confidence > tau; C(u) averages those.
ScoreMap BuildScoreMap(std::span<const std::vector<double>> confidences,
                       int height, int width, double tau);

struct Keypoint {
  int row = 0;
  int col = 0;
  double score = 0.0;
  bool operator==(const Keypoint&) const = default;
};

// Greedy NMS over positive scores: highest score first (ties in raster
// order); a pixel is rejected if a selected pixel lies within Chebyshev
// distance <= radius.
std::vector<Keypoint> NmsSelect(const ScoreMap& score, int radius,
                                std::optional<int> max_keypoints = {});

// One track per keypoint with the source pixel in slot 0 and every target
// whose match is reciprocal and above tau. Tracks without targets are
// dropped.
std::vector<TrackToken> AssembleTracks(
    std::span<const Keypoint> keypoints,
    std::span<const DenseWarpField> selected,
    std::span<const std::vector<uint8_t>> keep, double tau);

struct PostprocessOptions {
  double eps_p = 3.0;
  double tau = 0.3;
  int nms_radius = 2;
  std::optional<int> max_keypoints;
};

// Base-resolution output of one group: warps[k] maps the source to
// group.targets[k].
struct GroupWarps {
  ImageGroup group;
  std::vector<DenseWarpField> warps;
};

struct PostprocessStats {
  size_t candidate_matches = 0;  // selected confidence > tau
  size_t kept_matches = 0;       // ... and reciprocal
  size_t num_tracks = 0;
  std::vector<size_t> length_histogram;  // index = number of views

  double KeptRate() const {
    return candidate_matches == 0
               ? 0.0
               : static_cast<double>(kept_matches) / candidate_matches;
  }
  std::string ToJson() const;
};

struct PostprocessResult {
  std::vector<SceneTrack> tracks;
  // Tokens per input group, in that group's slot order.
  std::vector<std::vector<TrackToken>> group_tracks;
  PostprocessStats stats;
};

// Full scene post-processing: match selection per ordered pair across
// groups, reciprocity against the selected reverse pair, per-group score
// map, NMS and track assembly.
PostprocessResult PostprocessScene(std::span<const GroupWarps> groups,
                                   const PostprocessOptions& options = {});

}  // namespace mvm
