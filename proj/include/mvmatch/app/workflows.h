#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvmatch/app/config.h"
#include "mvmatch/core/track_token.h"
#include "mvmatch/core/types.h"
#include "mvmatch/eval/homography.h"
#include "mvmatch/eval/triangulation.h"
#include "mvmatch/groups/group_sampler.h"
#include "mvmatch/postprocess/postprocess.h"
#include "mvmatch/synth/scene.h"
#include "mvmatch/tracks/track_io.h"

namespace mvm {

// Stream salts; every stage derives its seed as MixSeed(seed, salt).
enum SeedSalt : uint64_t {
  kSaltScene = 1,
  kSaltTracks = 2,
  kSaltMatcher = 3,
  kSaltGroups = 4,
  kSaltRansac = 5,
  kSaltFeatures = 6,
};

SceneOracle GenerateScene(const AppConfig& config, uint64_t seed);

// Overlap from exact warps between every ordered pair of views.
OverlapMatrix SceneOverlap(const SceneOracle& scene, double tau_conf);

// One group per view with the max_targets most overlapping views as
// targets, ordered by decreasing overlap (ties to the lower view id). Views
// with zero overlap are never picked; views without any get no group.
std::vector<ImageGroup> AllSourceGroups(const OverlapMatrix& overlap,
                                        int max_targets);

SamplerOptions MakeSamplerOptions(const AppConfig& config, uint64_t seed);
GroupPlan PlanGroups(const OverlapMatrix& overlap, const AppConfig& config,
                     uint64_t seed);

// Simulated pairwise matches reduced to num_tracks tokens.
std::vector<TrackToken> BuildGroupTracks(const SceneOracle& scene,
                                         const ImageGroup& group,
                                         const AppConfig& config,
                                         uint64_t seed);

// Inverse of ToSceneTrack for a given group. Observations of views outside
// the group are dropped; the track must observe the group source.
TrackToken TokenFromSceneTrack(const SceneTrack& track,
                               const ImageGroup& group);

// Dense warps of every group at base resolution. `tracks` is empty or holds
// one token list per group.
std::vector<GroupWarps> MatchGroups(
    const SceneOracle& scene, const std::vector<ImageGroup>& groups,
    const std::vector<std::vector<TrackToken>>& tracks,
    const AppConfig& config, uint64_t seed);

PostprocessOptions MakePostprocessOptions(const AppConfig& config);

struct PairHomographyError {
  int source = 0;
  int target = 0;
  int num_matches = 0;
  int num_inliers = 0;
  bool degenerate = false;
  double corner_error = 0.0;
};

struct HomographyReport {
  std::vector<PairHomographyError> pairs;
  PoseErrorCurve curve;
};

// One estimate per ordered pair, using the most confident candidate of every
// pixel across groups. Degenerate pairs score an infinite error.
HomographyReport EvaluateHomographies(const SceneOracle& scene,
                                      const std::vector<GroupWarps>& groups,
                                      const AppConfig& config, uint64_t seed);

struct TriangulationReport {
  TriangulationResult triangulation;
  AccuracyCompleteness metrics;
  std::vector<double> thresholds_cm;
};

TriangulationReport EvaluateTriangulation(
    const SceneOracle& scene, const std::vector<SceneTrack>& tracks,
    const AppConfig& config);

// CSV reports: a commented header line with the formula, a column header,
// then one row per threshold and metric.
std::string HomographyCsv(const HomographyReport& report);
std::string HomographyPairsCsv(const HomographyReport& report);
std::string TriangulationCsv(const TriangulationReport& report);
std::string OverlapCsv(const OverlapMatrix& overlap);

}  // namespace mvm
