#include "mvmatch/app/workflows.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"
#include "mvmatch/matcher/features.h"
#include "mvmatch/matcher/matcher.h"
#include "mvmatch/synth/matcher_sim.h"
#include "mvmatch/tracks/track_builder.h"

namespace mvm {
namespace {

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

AlignmentMode ParseAlignment(const std::string& s) {
  if (s == "reverse_pass") return AlignmentMode::kReversePass;
  if (s == "gather") return AlignmentMode::kGather;
  return AlignmentMode::kInverseWarp;
}

}  // namespace

SceneOracle GenerateScene(const AppConfig& config, uint64_t seed) {
  config.Validate();
  const int size = config.ImageSize();
  const uint64_t s = MixSeed(seed, kSaltScene);
  if (config.scene.kind == "planar") {
    PlanarSceneOptions o;
    o.num_views = config.scene.num_views;
    o.height = size;
    o.width = size;
    o.seed = s;
    return MakePlanarScene(o);
  }
  PointCloudSceneOptions o;
  o.num_views = config.scene.num_views;
  o.height = size;
  o.width = size;
  o.num_points = config.scene.num_points;
  o.baseline = config.scene.baseline;
  o.seed = s;
  return MakePointCloudScene(o);
}

OverlapMatrix SceneOverlap(const SceneOracle& scene, double tau_conf) {
  const int m = scene.NumViews();
  std::vector<DenseWarpField> warps;
  warps.reserve(static_cast<size_t>(m) * (m - 1));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j) warps.push_back(GtWarp(scene, i, j));
    }
  }
  return OverlapFromMatches(m, warps, tau_conf);
}

std::vector<ImageGroup> AllSourceGroups(const OverlapMatrix& overlap,
                                        int max_targets) {
  MVM_CHECK(max_targets >= 1, "max_targets must be >= 1");
  std::vector<ImageGroup> groups;
  for (int i = 0; i < overlap.size; ++i) {
    std::vector<int> order;
    for (int j = 0; j < overlap.size; ++j) {
      if (j != i && overlap.At(i, j) > 0.0) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return overlap.At(i, a) > overlap.At(i, b);
    });
    if (order.empty()) continue;
    if (static_cast<int>(order.size()) > max_targets) order.resize(max_targets);
    groups.push_back({i, order});
  }
  return groups;
}

SamplerOptions MakeSamplerOptions(const AppConfig& config, uint64_t seed) {
  SamplerOptions o;
  o.tau = config.groups.tau;
  o.beta = config.groups.beta;
  o.half_budget = config.groups.budget == "half";
  o.group.alpha_src = config.groups.alpha_src;
  o.group.alpha_tgt = config.groups.alpha_tgt;
  o.group.lambda = config.groups.lambda;
  o.group.max_targets = config.groups.max_targets;
  o.stochastic = config.groups.stochastic;
  o.seed = MixSeed(seed, kSaltGroups);
  return o;
}

GroupPlan PlanGroups(const OverlapMatrix& overlap, const AppConfig& config,
                     uint64_t seed) {
  return SampleGroups(overlap, MakeSamplerOptions(config, seed));
}

std::vector<TrackToken> BuildGroupTracks(const SceneOracle& scene,
                                         const ImageGroup& group,
                                         const AppConfig& config,
                                         uint64_t seed) {
  const uint64_t s = MixSeed(seed, kSaltTracks);
  const std::vector<MatchSample> raw = SimulateMatcher(
      scene, group, config.tracks.raw_matches, config.tracks.noise_sigma,
      config.tracks.outlier_rate, MixSeed(s, 2 * group.source));
  TrackSamplingOptions o;
  o.normalize = config.tracks.normalize;
  o.image_height = scene.height();
  o.image_width = scene.width();
  return SampleTracks(raw, config.tracks.num_tracks,
                      MixSeed(s, 2 * group.source + 1), o);
}

TrackToken TokenFromSceneTrack(const SceneTrack& track,
                               const ImageGroup& group) {
  const std::vector<int> views = group.Views();
  TrackToken t;
  t.coords.assign(views.size(), kMissing);
  t.visibility.assign(views.size(), 0);
  for (const TrackObservation& obs : track) {
    const auto it = std::find(views.begin(), views.end(), obs.view_id);
    if (it == views.end()) continue;
    const size_t slot = static_cast<size_t>(it - views.begin());
    t.coords[slot] = obs.coord;
    t.visibility[slot] = 1;
  }
  MVM_CHECK(t.visibility[0] == 1, "track does not observe the group source");
  return t;
}

std::vector<GroupWarps> MatchGroups(
    const SceneOracle& scene, const std::vector<ImageGroup>& groups,
    const std::vector<std::vector<TrackToken>>& tracks,
    const AppConfig& config, uint64_t seed) {
  MVM_CHECK(tracks.empty() || tracks.size() == groups.size(),
            "need one track list per group");
  std::vector<GroupWarps> out;
  out.reserve(groups.size());
  if (config.matcher.kind == "ground_truth") {
    for (const ImageGroup& g : groups) {
      GroupWarps gw{g, {}};
      for (int t : g.targets) gw.warps.push_back(GtWarp(scene, g.source, t));
      out.push_back(std::move(gw));
    }
    return out;
  }
  OracleFeatureOptions fo;
  fo.coarse_stride = config.matcher.coarse_stride;
  fo.fine_strides = config.matcher.strides;
  fo.seed = MixSeed(seed, kSaltFeatures);
  OracleFeatureProvider provider(scene, fo);

  MatcherConfig mc;
  mc.fine_channels = provider.Channels(FeatureKind::kFine);
  mc.coarse_channels = provider.Channels(FeatureKind::kCoarse);
  mc.hidden = config.matcher.hidden;
  mc.coarse_stride = config.matcher.coarse_stride;
  mc.strides = config.matcher.strides;
  mc.windows = config.matcher.windows;
  mc.mvfuse_strides = config.matcher.mvfuse_strides;
  mc.mvfuse_iterations = config.matcher.mvfuse_iterations;
  mc.inverse_temperature = config.matcher.inverse_temperature;
  mc.alignment = ParseAlignment(config.matcher.alignment);
  mc.confidence_sigma_px = config.matcher.confidence_sigma_px;
  mc.seed = MixSeed(seed, kSaltMatcher);
  const MatcherParams params = BuildMatcherParams(mc);

  for (size_t i = 0; i < groups.size(); ++i) {
    std::span<const TrackToken> group_tracks;
    if (config.matcher.use_tracks && !tracks.empty()) group_tracks = tracks[i];
    GroupResult r = RunGroup(groups[i], provider, group_tracks, params);
    out.push_back({groups[i], std::move(r.warps)});
  }
  return out;
}

PostprocessOptions MakePostprocessOptions(const AppConfig& config) {
  PostprocessOptions o;
  o.eps_p = config.postprocess.eps_p;
  o.tau = config.postprocess.tau;
  o.nms_radius = config.postprocess.nms_radius;
  return o;
}

HomographyReport EvaluateHomographies(const SceneOracle& scene,
                                      const std::vector<GroupWarps>& groups,
                                      const AppConfig& config, uint64_t seed) {
  MVM_CHECK(scene.kind() == SceneKind::kPlanar,
            "homography evaluation needs a planar scene");
  std::map<std::pair<int, int>, PairMatchBank> banks;
  for (const GroupWarps& g : groups) {
    MVM_CHECK(g.warps.size() == g.group.targets.size(),
              "one warp per target required");
    for (size_t k = 0; k < g.warps.size(); ++k) {
      PairMatchBank& bank = banks[{g.group.source, g.group.targets[k]}];
      bank.source_view = g.group.source;
      bank.target_view = g.group.targets[k];
      bank.candidates.push_back(g.warps[k]);
    }
  }
  HomographyReport report;
  std::vector<double> errors;
  const uint64_t ransac_seed = MixSeed(seed, kSaltRansac);
  uint64_t pair_index = 0;
  for (const auto& [key, bank] : banks) {
    const DenseWarpField warp = SelectMatches(bank).warp;
    WarpHomographyOptions o;
    o.max_matches = config.eval.max_matches;
    o.min_confidence = config.postprocess.tau;
    o.ransac.threshold = config.eval.ransac_threshold;
    o.ransac.max_iterations = config.eval.ransac_max_iterations;
    o.ransac.seed = MixSeed(ransac_seed, pair_index++);
    const WarpHomographyResult r = EstimateWarpHomography(warp, o);
    PairHomographyError e;
    e.source = key.first;
    e.target = key.second;
    e.num_matches = r.num_matches;
    e.num_inliers = r.num_inliers;
    e.degenerate = r.degenerate;
    e.corner_error =
        r.degenerate
            ? std::numeric_limits<double>::infinity()
            : CornerError(r.homography, PairHomography(scene, key.first, key.second),
                          scene.height(), scene.width());
    errors.push_back(e.corner_error);
    report.pairs.push_back(e);
  }
  report.curve = PoseErrorCurve::FromErrors(std::move(errors),
                                            config.eval.homography_thresholds);
  return report;
}

TriangulationReport EvaluateTriangulation(
    const SceneOracle& scene, const std::vector<SceneTrack>& tracks,
    const AppConfig& config) {
  MVM_CHECK(scene.kind() == SceneKind::kPointCloud,
            "triangulation evaluation needs a point-cloud scene");
  TriangulationReport report;
  report.thresholds_cm = config.eval.triangulation_thresholds_cm;
  report.triangulation = TriangulateTracks(tracks, scene.cameras());
  std::vector<Eigen::Vector3d> points;
  points.reserve(report.triangulation.points.size());
  for (const TriangulatedPoint& p : report.triangulation.points) {
    points.push_back(p.position);
  }
  std::vector<double> thresholds;
  for (double cm : report.thresholds_cm) {
    thresholds.push_back(cm * config.eval.units_per_cm);
  }
  report.metrics =
      ComputeAccuracyCompleteness(points, scene.points(), thresholds);
  return report;
}

std::string HomographyCsv(const HomographyReport& report) {
  std::string s =
      "# auc(t) = mean over pairs of clamp(1 - corner_error / t, 0, 1)\n"
      "metric,threshold_px,value\n";
  for (size_t i = 0; i < report.curve.thresholds.size(); ++i) {
    s += "auc," + Num(report.curve.thresholds[i]) + "," +
         Num(report.curve.auc[i]) + "\n";
  }
  return s;
}

std::string HomographyPairsCsv(const HomographyReport& report) {
  std::string s =
      "source,target,num_matches,num_inliers,degenerate,corner_error_px\n";
  for (const PairHomographyError& e : report.pairs) {
    s += std::to_string(e.source) + "," + std::to_string(e.target) + "," +
         std::to_string(e.num_matches) + "," + std::to_string(e.num_inliers) +
         "," + (e.degenerate ? "1" : "0") + "," + Num(e.corner_error) + "\n";
  }
  return s;
}

std::string TriangulationCsv(const TriangulationReport& report) {
  std::string s =
      "# accuracy(d) = share of triangulated points within d of a gt point; "
      "completeness(d) = share of gt points within d of a triangulated "
      "point\n"
      "metric,threshold_cm,value\n";
  for (size_t i = 0; i < report.metrics.rows.size(); ++i) {
    const AccuracyCompletenessRow& row = report.metrics.rows[i];
    const std::string t = Num(report.thresholds_cm[i]);
    s += "accuracy," + t + "," + Num(row.accuracy) + "\n";
    s += "completeness," + t + "," + Num(row.completeness) + "\n";
  }
  const TriangulationResult& tr = report.triangulation;
  s += "num_points,," + std::to_string(tr.points.size()) + "\n";
  s += "skipped_short,," + std::to_string(tr.skipped_short) + "\n";
  s += "cheirality_rejected,," + std::to_string(tr.cheirality_rejected) + "\n";
  s += "degenerate,," + std::to_string(tr.degenerate) + "\n";
  s += "empty_reconstruction,," +
       std::string(report.metrics.empty_reconstruction ? "1" : "0") + "\n";
  return s;
}

std::string OverlapCsv(const OverlapMatrix& overlap) {
  std::string s = "source,target,overlap\n";
  for (int i = 0; i < overlap.size; ++i) {
    for (int j = 0; j < overlap.size; ++j) {
      if (i == j) continue;
      s += std::to_string(i) + "," + std::to_string(j) + "," +
           Num(overlap.At(i, j)) + "\n";
    }
  }
  return s;
}

}  // namespace mvm
