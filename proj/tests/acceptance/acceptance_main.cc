// Acceptance suite. Each criterion prints one PASS/FAIL line with its
// runtime and the measured quantities; the exit status is nonzero if any
// criterion fails. Tolerances and time budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "mvmatch/app/config.h"
#include "mvmatch/app/workflows.h"
#include "mvmatch/attention/attention.h"
#include "mvmatch/attention/mvfuse.h"
#include "mvmatch/core/rng.h"
#include "mvmatch/core/sampling.h"
#include "mvmatch/eval/homography.h"
#include "mvmatch/eval/triangulation.h"
#include "mvmatch/groups/group_sampler.h"
#include "mvmatch/matcher/matcher.h"
#include "mvmatch/postprocess/postprocess.h"
#include "mvmatch/synth/matcher_sim.h"
#include "mvmatch/synth/scene.h"
#include "mvmatch/tracks/track_builder.h"
#include "support/oracles.h"

namespace mvm {
namespace {

namespace fs = std::filesystem;
using testing::LoopMVFuse;
using testing::LoopSampling;
using testing::LoopSplatting;
using testing::LoopTransformer;
using testing::RandomCoords;
using testing::RandomGrid;

constexpr double kOracleTolerance = 1e-6;
constexpr double kEquivarianceTolerance = 1e-6;
constexpr double kRowSumTolerance = 1e-6;
constexpr double kDltRelativeTolerance = 1e-8;
constexpr double kReprojectionTolerance = 1e-6;
constexpr double kRansacExactRate = 0.95;
constexpr double kEndToEndAucTolerance = 1e-3;
constexpr double kGroundTruthAucTolerance = 1e-9;
constexpr double kMonotoneFraction = 0.90;
constexpr double kCompletenessDrop = 0.10;
constexpr double kSpreadWinRate = 0.80;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void Note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

double MaxAbsDiff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

double MaxAbsDiff(const FeatureGrid& a, const FeatureGrid& b) {
  if (a.data().size() != b.data().size()) return INFINITY;
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

Eigen::MatrixXd RandomMatrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.Normal();
  }
  return m;
}

TrackFeatures RandomTrackFeatures(int views, int tracks, int dim, Rng& rng) {
  TrackFeatures f;
  for (int v = 0; v < views; ++v) f.values.push_back(RandomMatrix(tracks, dim, rng));
  f.visibility.assign(tracks, std::vector<uint8_t>(views, 0));
  for (int t = 0; t < tracks; ++t) {
    for (int v = 0; v < views; ++v) f.visibility[t][v] = rng.Uniform() < 0.7;
    f.visibility[t][rng.UniformInt(views)] = 1;
    for (int v = 0; v < views; ++v) {
      if (!f.visibility[t][v]) f.values[v].row(t).setZero();
    }
  }
  return f;
}

// 1. Kernel outputs against explicit-loop oracles.
Outcome AttentionOracles() {
  Outcome o;
  double worst[4] = {0, 0, 0, 0};
  const int instances = 25;
  for (int seed = 0; seed < instances; ++seed) {
    Rng rng(1000 + seed);
    const int h = 2 + rng.UniformInt(7), w = 2 + rng.UniformInt(7);
    const int d = 2 + rng.UniformInt(7), t = 1 + rng.UniformInt(16);
    const int v = 1 + rng.UniformInt(5);
    const int stride = 1 << rng.UniformInt(4);
    const FeatureGrid g = RandomGrid(h, w, d, stride, rng);
    const auto coords = RandomCoords(t, h, w, stride, rng);
    const AttentionParams ps = AttentionParams::Random(d, 1.5 * stride, seed);
    worst[0] = std::max(worst[0], MaxAbsDiff(AttentionalSampling(g, coords, ps),
                                             LoopSampling(g, coords, ps)));

    const TrackFeatures f = RandomTrackFeatures(v, t, d, rng);
    const AttentionParams pt = AttentionParams::Random(d, 1.0, seed + 100);
    const TrackFeatures out = TrackTransformer(f, pt);
    const auto ref = LoopTransformer(f.values, f.visibility, pt);
    for (int i = 0; i < v; ++i) {
      worst[1] = std::max(worst[1], MaxAbsDiff(out.values[i], ref[i]));
    }

    std::vector<uint8_t> vis(t);
    for (auto& x : vis) x = rng.Uniform() < 0.7;
    const Eigen::MatrixXd z = RandomMatrix(t, d, rng);
    const AttentionParams pp = AttentionParams::Random(d, 2.0 * stride, seed + 200);
    worst[2] = std::max(worst[2], MaxAbsDiff(AttentionalSplatting(g, z, coords, vis, pp),
                                             LoopSplatting(g, z, coords, vis, pp)));

    std::vector<FeatureGrid> hidden;
    for (int i = 0; i < v; ++i) hidden.push_back(RandomGrid(h, w, d, 1, rng));
    const MVFuseParams pm = MVFuseParams::Random(d, 2 * d, seed + 300);
    const auto a = MVFuse(hidden, pm, 2);
    const auto b = LoopMVFuse(hidden, pm, 2);
    for (int i = 0; i < v; ++i) worst[3] = std::max(worst[3], MaxAbsDiff(a[i], b[i]));
  }
  const char* names[4] = {"sampling", "transformer", "splatting", "mvfuse"};
  for (int k = 0; k < 4; ++k) {
    o.Require(worst[k] <= kOracleTolerance, fmt::format("{} max diff", names[k]));
    o.Note(fmt::format("{} {:.1e}", names[k], worst[k]));
  }
  o.Note(fmt::format("{} instances", instances));
  return o;
}

// 2. Equivariance, masking, normalization and the zero-output identity.
Outcome MaskingEquivariance() {
  Outcome o;
  double perm_err = 0.0, row_err = 0.0;
  int vis_changes = 0, identity_changes = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(5000 + trial);
    const int v = 2 + rng.UniformInt(4), t = 1 + rng.UniformInt(16);
    const int d = 2 + rng.UniformInt(6), h = 2 + rng.UniformInt(7);
    const int w = 2 + rng.UniformInt(7);
    std::vector<int> perm(v);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = v; i > 1; --i) std::swap(perm[i - 1], perm[rng.UniformInt(i)]);

    // View permutation: transformer and MVFuse.
    const TrackFeatures f = RandomTrackFeatures(v, t, d, rng);
    const AttentionParams pt = AttentionParams::Random(d, 1.0, trial);
    TrackFeatures fp;
    fp.visibility = f.visibility;
    for (int i = 0; i < v; ++i) fp.values.push_back(f.values[perm[i]]);
    for (auto& vis : fp.visibility) {
      const auto old = vis;
      for (int i = 0; i < v; ++i) vis[i] = old[perm[i]];
    }
    const TrackFeatures a = TrackTransformer(f, pt);
    const TrackFeatures b = TrackTransformer(fp, pt);
    for (int i = 0; i < v; ++i) {
      perm_err = std::max(perm_err, MaxAbsDiff(b.values[i], a.values[perm[i]]));
    }
    std::vector<FeatureGrid> hidden, hidden_p;
    for (int i = 0; i < v; ++i) hidden.push_back(RandomGrid(h, w, d, 1, rng));
    for (int i = 0; i < v; ++i) hidden_p.push_back(hidden[perm[i]]);
    const MVFuseParams pm = MVFuseParams::Random(d, 2 * d, trial);
    const auto ma = MVFuse(hidden, pm, 2);
    const auto mb = MVFuse(hidden_p, pm, 2);
    for (int i = 0; i < v; ++i) perm_err = std::max(perm_err, MaxAbsDiff(mb[i], ma[perm[i]]));

    // Invisible entries: garbage values must not change any output.
    TrackFeatures garbage = f;
    for (int k = 0; k < t; ++k) {
      for (int i = 0; i < v; ++i) {
        if (!f.visibility[k][i]) {
          for (int c = 0; c < d; ++c) garbage.values[i](k, c) = 1e6 * rng.Normal();
        }
      }
    }
    const TrackFeatures ga = TrackTransformer(garbage, pt);
    for (int i = 0; i < v; ++i) vis_changes += !(ga.values[i] == a.values[i]);

    const FeatureGrid g = RandomGrid(h, w, d, 2, rng);
    auto coords = RandomCoords(t, h, w, 2, rng);
    std::vector<uint8_t> svis(t);
    for (auto& x : svis) x = rng.Uniform() < 0.6;
    Eigen::MatrixXd z = RandomMatrix(t, d, rng);
    const AttentionParams pp = AttentionParams::Random(d, 3.0, trial + 7);
    const FeatureGrid sa = AttentionalSplatting(g, z, coords, svis, pp);
    for (int k = 0; k < t; ++k) {
      if (svis[k]) continue;
      coords[k] = {1e5 * rng.Normal(), -1e5};
      for (int c = 0; c < d; ++c) z(k, c) = 1e6 * rng.Normal();
    }
    vis_changes += !(AttentionalSplatting(g, z, coords, svis, pp).data() == sa.data());

    // Row sums of every attention kernel.
    const Eigen::MatrixXd ws = AttentionalSamplingWeights(g, coords, pp);
    row_err = std::max(row_err, (ws.rowwise().sum().array() - 1.0).abs().maxCoeff());
    for (int k = 0; k < t; ++k) {
      const Eigen::MatrixXd wt = TrackTransformerWeights(f, pt, k);
      for (int i = 0; i < v; ++i) {
        if (f.visibility[k][i]) row_err = std::max(row_err, std::abs(wt.row(i).sum() - 1.0));
      }
    }
    if (std::count(svis.begin(), svis.end(), 1) > 0) {
      const Eigen::MatrixXd wp = AttentionalSplattingWeights(g, z, coords, svis, pp);
      row_err = std::max(row_err, (wp.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    const Eigen::MatrixXd wm = MVFusePixelWeights(hidden, pm, h / 2, w / 2);
    row_err = std::max(row_err, (wm.rowwise().sum().array() - 1.0).abs().maxCoeff());

    // Zero output projection.
    AttentionParams zero = pp;
    zero.w_out.setZero();
    identity_changes += !(AttentionalSplatting(g, z, coords, svis, zero).data() == g.data());
  }
  o.Require(perm_err <= kEquivarianceTolerance, "permutation equivariance");
  o.Require(vis_changes == 0, "visibility independence");
  o.Require(row_err <= kRowSumTolerance, "softmax row sums");
  o.Require(identity_changes == 0, "zero W_out identity");
  o.Note(fmt::format("{} trials, perm {:.1e}, rowsum {:.1e}, masked changes {}, "
                     "identity changes {}",
                     trials, perm_err, row_err, vis_changes, identity_changes));
  return o;
}

MatchSample SampleWith(GridCoord src, std::vector<std::optional<GridCoord>> tgts) {
  MatchSample m;
  m.source_pixel = src;
  m.target_pixels = std::move(tgts);
  m.visibility.push_back(1);
  for (const auto& t : m.target_pixels) m.visibility.push_back(t.has_value());
  return m;
}

// 3. Track builder contract.
Outcome TrackBuilder() {
  Outcome o;
  int bad_reps = 0, bad_counts = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Rng rng(trial);
    std::vector<MatchSample> raw;
    const int n = 20 + rng.UniformInt(400);
    for (int i = 0; i < n; ++i) {
      const GridCoord s{rng.Uniform(0, 167), rng.Uniform(0, 167)};
      std::vector<std::optional<GridCoord>> t(4);
      for (auto& x : t) {
        if (rng.Uniform() < 0.6) x = GridCoord{rng.Uniform(0, 167), rng.Uniform(0, 167)};
      }
      if (std::none_of(t.begin(), t.end(), [](const auto& x) { return x.has_value(); })) {
        t[rng.UniformInt(4)] = GridCoord{s.x, s.y};
      }
      raw.push_back(SampleWith(s, t));
    }
    const int tokens_wanted = 1 + rng.UniformInt(600);
    const auto tokens = SampleTracks(raw, tokens_wanted, trial);
    bad_counts += static_cast<int>(tokens.size()) != std::min(tokens_wanted, n);
    std::set<std::vector<double>> in;
    for (const auto& m : raw) in.insert(ToTrackToken(m).Stacked());
    for (const auto& t : tokens) bad_reps += !in.count(t.Stacked());
  }
  o.Require(bad_reps == 0, "representatives are inputs");
  o.Require(bad_counts == 0, "token count = min(T, |raw|)");

  // Two separated blobs against the exhaustive 2-means split.
  int toy_mismatch = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(40 + trial);
    std::vector<MatchSample> raw;
    std::vector<Eigen::VectorXd> points;
    for (int i = 0; i < 12; ++i) {
      const double cx = i % 2 == 0 ? 25.0 : 140.0;
      const GridCoord s{cx + rng.Normal(0, 4), 80 + rng.Normal(0, 4)};
      raw.push_back(SampleWith(s, {GridCoord{s.x + 2, s.y + 1}}));
      Eigen::VectorXd p(4);
      p << s.x, s.y, s.x + 2, s.y + 1;
      points.push_back(p);
    }
    const std::vector<int> labels = testing::ExhaustiveTwoMeans(points);
    std::set<int> hit;
    for (const TrackToken& t : SampleTracks(raw, 2, trial)) {
      for (int i = 0; i < 12; ++i) {
        if (ToTrackToken(raw[i]) == t) hit.insert(labels[i]);
      }
    }
    toy_mismatch += hit.size() != 2;
  }
  o.Require(toy_mismatch == 0, "2-means toy case");

  int wins = 0;
  const int spread_trials = 20;
  for (int trial = 0; trial < spread_trials; ++trial) {
    Rng rng(100 + trial);
    std::vector<MatchSample> raw;
    for (int i = 0; i < 500; ++i) {
      const GridCoord s{rng.Uniform(0, 167), rng.Uniform(0, 167)};
      raw.push_back(SampleWith(s, {GridCoord{s.x + 2, s.y - 1}}));
    }
    std::vector<GridCoord> clustered, random;
    for (const auto& t : SampleTracks(raw, 64, trial)) clustered.push_back(t.coords[0]);
    std::vector<int> idx(raw.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < 64; ++i) {
      std::swap(idx[i], idx[i + rng.UniformInt(idx.size() - i)]);
      random.push_back(raw[idx[i]].source_pixel);
    }
    wins += testing::MeanNearestNeighbor(clustered) >
            testing::MeanNearestNeighbor(random);
  }
  o.Require(wins >= kSpreadWinRate * spread_trials, "spread vs random");
  o.Note(fmt::format("spread wins {}/{}, bad representatives {}, bad counts {}",
                     wins, spread_trials, bad_reps, bad_counts));
  return o;
}

DenseWarpField RandomWarp(int h, int w, Rng& rng, double spread) {
  DenseWarpField f(h, w, 1, 0, 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      f.targets[f.Index(r, c)] = {c + rng.Uniform(-spread, spread),
                                  r + rng.Uniform(-spread, spread)};
      // Coarse levels so that ties occur.
      f.confidence[f.Index(r, c)] = std::floor(rng.Uniform(0, 8)) / 8.0;
    }
  }
  return f;
}

// 4. Post-processing exactness.
Outcome Postprocess() {
  Outcome o;
  int select_bad = 0, recip_bad = 0, nms_bad = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Rng rng(trial);
    const int h = 1 + rng.UniformInt(16), w = 1 + rng.UniformInt(16);
    PairMatchBank bank{0, 1, {}};
    const int groups = 1 + rng.UniformInt(4);
    for (int g = 0; g < groups; ++g) bank.candidates.push_back(RandomWarp(h, w, rng, 3.0));
    const SelectedMatches a = SelectMatches(bank);
    const SelectedMatches b = testing::LoopSelect(bank);
    select_bad += !(a.warp.targets == b.warp.targets &&
                    a.warp.confidence == b.warp.confidence &&
                    a.group_index == b.group_index);

    const DenseWarpField f = RandomWarp(h, w, rng, 4.0);
    const DenseWarpField back = RandomWarp(h, w, rng, 4.0);
    for (double eps : {0.5, 1.0, 3.0, 6.0}) {
      recip_bad += ReciprocityFilter(f, back, eps) != testing::LoopReciprocity(f, back, eps);
    }

    ScoreMap s;
    s.height = h;
    s.width = w;
    for (int i = 0; i < h * w; ++i) {
      s.score.push_back(std::max(0.0, std::floor(rng.Uniform(-1, 5)) + (trial % 2) * rng.Uniform()));
    }
    for (int radius : {1, 2, 3}) {
      nms_bad += NmsSelect(s, radius) != testing::LoopNms(s, radius);
      nms_bad += NmsSelect(s, radius, 4) != testing::LoopNms(s, radius, 4);
    }
  }
  o.Require(select_bad == 0, "select vs oracle");
  o.Require(recip_bad == 0, "reciprocity vs oracle");
  o.Require(nms_bad == 0, "nms vs oracle");

  const DenseWarpField fwd = DenseWarpField::Identity(16, 16);
  DenseWarpField shifted = DenseWarpField::Identity(16, 16);
  for (GridCoord& t : shifted.targets) t.x += 5.0;
  const auto at3 = ReciprocityFilter(fwd, shifted, 3.0);
  const auto at6 = ReciprocityFilter(fwd, shifted, 6.0);
  o.Require(std::count(at3.begin(), at3.end(), 1) == 0, "5 px shift rejected at 3");
  o.Require(std::count(at6.begin(), at6.end(), 0) == 0, "5 px shift kept at 6");

  const AppConfig shipped = LoadConfig(MVM_DEFAULT_CONFIG);
  const PostprocessOptions opts = MakePostprocessOptions(shipped);
  o.Require(opts.eps_p == 3.0 && opts.tau == 0.3 && opts.nms_radius == 2,
            "shipped defaults");
  o.Note(fmt::format("shipped eps_p {} tau {} radius {}", opts.eps_p, opts.tau,
                     opts.nms_radius));
  return o;
}

bool Symmetric(const std::vector<uint8_t>& adj, int m) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (adj[i * m + j] != adj[j * m + i]) return false;
    }
  }
  return true;
}

// 5. Group sampler contract on point-cloud scenes.
Outcome GroupSampler() {
  Outcome o;
  const std::vector<int> sizes = {8, 10, 12, 14, 16, 19, 22, 25, 28, 32};
  int asym = 0, uncovered = 0, bad_sum = 0, over_budget = 0;
  for (size_t k = 0; k < sizes.size(); ++k) {
    PointCloudSceneOptions so;
    so.num_views = sizes[k];
    so.height = so.width = 32;
    so.num_points = 200;
    so.seed = 700 + k;
    const SceneOracle scene = MakePointCloudScene(so);
    const OverlapMatrix overlap = SceneOverlap(scene, 0.3);
    SamplerOptions opts;
    const GroupPlan plan = SampleGroups(overlap, opts);
    const int m = sizes[k];
    asym += !Symmetric(PairAdjacency(m, plan.All()), m);
    std::set<int> sources;
    for (const ImageGroup& g : plan.All()) sources.insert(g.source);
    uncovered += m - static_cast<int>(sources.size());
    bad_sum += std::accumulate(plan.quotas.begin(), plan.quotas.end(), 0) != plan.budget ||
               *std::min_element(plan.quotas.begin(), plan.quotas.end()) < 1 ||
               plan.budget != DefaultBudget(m, false);
    over_budget += static_cast<int>(plan.stage1.size()) > plan.budget;
  }
  const std::vector<int> n = {15, 3, 0};
  const std::vector<int> q = QuotasFromCounts(n, 0.75, 12);
  o.Require(asym == 0, "symmetric adjacency");
  o.Require(uncovered == 0, "every image a source");
  o.Require(bad_sum == 0, "quota sum and floor");
  o.Require(over_budget == 0, "stage-1 within budget");
  o.Require(q == std::vector<int>{8, 3, 1}, "quota example");
  o.Note(fmt::format("10 scenes M=8..32, quota example ({},{},{})", q[0], q[1], q[2]));
  return o;
}

// 6. Geometry round trips.
Outcome Geometry() {
  Outcome o;
  double dlt_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(trial);
    const Eigen::Matrix3d h = testing::RandomHomography(rng, 672.0);
    std::vector<PointPair> pairs;
    for (const auto& [x0, y0] : {std::pair{0.0, 0.0}, {472.0, 0.0}, {472.0, 472.0}, {0.0, 472.0}}) {
      const Eigen::Vector2d p(x0 + rng.Uniform(0, 200), y0 + rng.Uniform(0, 200));
      pairs.push_back({p, testing::Apply(h, p)});
    }
    const Eigen::Matrix3d est = NormalizeHomography(DltHomography(pairs));
    const Eigen::Matrix3d ref = NormalizeHomography(h);
    dlt_worst = std::max(dlt_worst, (est - ref).norm() / ref.norm());
  }
  int exact = 0;
  const int ransac_trials = 100;
  for (int trial = 0; trial < ransac_trials; ++trial) {
    Rng rng(10000 + trial);
    const testing::RansacInstance inst = testing::MakeRansacInstance(rng, 70, 30, 672.0);
    RansacOptions opts;
    opts.threshold = 3.0;
    opts.seed = trial;
    exact += RansacHomography(inst.pairs, opts).inliers == inst.truth;
  }
  const auto cams = testing::ArcCameras(5, 4.0, 168.0, 168.0);
  Rng rng(77);
  std::vector<SceneTrack> tracks;
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d x(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1));
    SceneTrack t;
    for (int v = 0; v < 5; ++v) {
      if (v > 1 && rng.Uniform() < 0.3) continue;
      const Eigen::Vector2d q = *cams[v].Project(x);
      t.push_back({v, {q.x(), q.y()}});
    }
    tracks.push_back(t);
  }
  const TriangulationResult tri = TriangulateTracks(tracks, cams);
  double residual = 0.0;
  for (const auto& p : tri.points) residual = std::max(residual, p.max_reprojection_error);
  o.Require(dlt_worst <= kDltRelativeTolerance, "DLT round trip");
  o.Require(exact >= kRansacExactRate * ransac_trials, "RANSAC exact inlier set");
  o.Require(tri.points.size() == tracks.size(), "all tracks triangulated");
  o.Require(residual < kReprojectionTolerance, "triangulation residual");
  o.Note(fmt::format("DLT rel {:.1e}, RANSAC exact {}/{}, residual {:.1e} px",
                     dlt_worst, exact, ransac_trials, residual));
  return o;
}

std::vector<std::vector<TrackToken>> GroupTracks(const SceneOracle& scene,
                                                 const std::vector<ImageGroup>& groups,
                                                 const AppConfig& cfg, uint64_t seed) {
  std::vector<std::vector<TrackToken>> tracks;
  for (const ImageGroup& g : groups) tracks.push_back(BuildGroupTracks(scene, g, cfg, seed));
  return tracks;
}

double MaxTrackError(const SceneOracle& scene, const std::vector<GroupWarps>& groups,
                     const PostprocessResult& post) {
  double worst = 0.0;
  for (size_t g = 0; g < groups.size(); ++g) {
    for (const TrackToken& t : post.group_tracks[g]) {
      for (const auto& e : GtTrackError(scene, groups[g].group, t)) {
        if (e) worst = std::max(worst, *e);
      }
    }
  }
  return worst;
}

// 7. Noiseless planar pipeline end to end.
Outcome EndToEnd() {
  Outcome o;
  AppConfig cfg;
  const uint64_t seed = 3;
  const SceneOracle scene = GenerateScene(cfg, seed);
  const auto groups = AllSourceGroups(SceneOverlap(scene, cfg.groups.tau_conf),
                                      cfg.matcher.targets_per_group);
  const auto warps = MatchGroups(scene, groups, GroupTracks(scene, groups, cfg, seed), cfg, seed);
  const PostprocessResult post = PostprocessScene(warps, MakePostprocessOptions(cfg));
  const HomographyReport report = EvaluateHomographies(scene, warps, cfg, seed);
  const double track_err = MaxTrackError(scene, warps, post);
  o.Require(std::abs(report.curve.auc[0] - 1.0) <= kEndToEndAucTolerance, "AUC@1px");
  o.Require(!post.tracks.empty(), "tracks emitted");
  o.Require(track_err < cfg.postprocess.eps_p, "track gt error < eps_p");

  AppConfig gt = cfg;
  gt.matcher.kind = "ground_truth";
  const auto gt_warps = MatchGroups(scene, groups, {}, gt, seed);
  const HomographyReport gt_report = EvaluateHomographies(scene, gt_warps, gt, seed);
  const PostprocessResult gt_post = PostprocessScene(gt_warps, MakePostprocessOptions(gt));
  const double gt_track_err = MaxTrackError(scene, gt_warps, gt_post);
  o.Require(std::abs(gt_report.curve.auc[0] - 1.0) <= kGroundTruthAucTolerance,
            "exact-warp AUC@1px");
  o.Require(gt_track_err < gt.postprocess.eps_p, "exact-warp track error");
  o.Note(fmt::format("oracle matcher AUC@1/3/5 {:.6f}/{:.6f}/{:.6f}, max corner err "
                     "{:.2e} px, {} tracks, max track err {:.3f} px; exact warps "
                     "AUC@1 {:.9f}",
                     report.curve.auc[0], report.curve.auc[1], report.curve.auc[2],
                     report.curve.errors.back(), post.tracks.size(), track_err,
                     gt_report.curve.auc[0]));
  return o;
}

// 8. Per-pixel error never grows from one level to the next.
Outcome CoarseToFine() {
  Outcome o;
  AppConfig cfg;
  std::string fractions;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const SceneOracle scene = GenerateScene(cfg, seed);
    OracleFeatureProvider provider(scene);
    MatcherConfig mc;
    mc.fine_channels = provider.Channels(FeatureKind::kFine);
    mc.coarse_channels = provider.Channels(FeatureKind::kCoarse);
    const ImageGroup group{0, {1, 2, 3, 4}};
    const GroupResult r = RunGroup(group, provider, {}, BuildMatcherParams(mc));
    size_t total = 0, monotone = 0;
    for (size_t k = 0; k < group.targets.size(); ++k) {
      std::vector<DenseWarpField> levels;
      for (const auto& lv : r.level_warps) {
        levels.push_back(lv[k].stride > 1 ? UpsampleWarp(lv[k], lv[k].stride) : lv[k]);
      }
      for (int y = 0; y < scene.height(); ++y) {
        for (int x = 0; x < scene.width(); ++x) {
          const GridCoord p{double(x), double(y)};
          if (!scene.Covisible(0, group.targets[k], p)) continue;
          const GridCoord t = *scene.Transfer(0, group.targets[k], p);
          bool ok = true;
          double prev = INFINITY;
          for (const DenseWarpField& w : levels) {
            const GridCoord q = w.targets[w.Index(y, x)];
            const double e = std::hypot(q.x - t.x, q.y - t.y);
            ok = ok && e <= prev;
            prev = e;
          }
          ++total;
          monotone += ok;
        }
      }
    }
    const double frac = double(monotone) / double(total);
    o.Require(frac >= kMonotoneFraction, fmt::format("scene {} monotone fraction", seed));
    fractions += fmt::format("{}{:.3f}", fractions.empty() ? "" : "/", frac);
  }
  o.Note("monotone fraction per scene " + fractions);
  return o;
}

// 9. Half budget versus full budget on point-cloud scenes.
Outcome BudgetTradeoff() {
  Outcome o;
  AppConfig cfg;
  cfg.scene.kind = "point_cloud";
  cfg.scene.num_views = 6;
  std::string rows;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    const SceneOracle scene = GenerateScene(cfg, seed);
    const OverlapMatrix overlap = SceneOverlap(scene, cfg.groups.tau_conf);
    std::vector<double> completeness[2];
    int stage1[2] = {0, 0};
    for (int half = 0; half < 2; ++half) {
      AppConfig c = cfg;
      c.groups.budget = half ? "half" : "full";
      const GroupPlan plan = PlanGroups(overlap, c, seed);
      const int m = scene.NumViews();
      const auto all = plan.All();
      o.Require(Symmetric(PairAdjacency(m, all), m), "symmetric adjacency");
      std::set<int> sources;
      for (const ImageGroup& g : all) sources.insert(g.source);
      o.Require(static_cast<int>(sources.size()) == m, "source coverage");
      stage1[half] = static_cast<int>(plan.stage1.size());
      const auto warps = MatchGroups(scene, all, GroupTracks(scene, all, c, seed), c, seed);
      const PostprocessResult post = PostprocessScene(warps, MakePostprocessOptions(c));
      const TriangulationReport tri = EvaluateTriangulation(scene, post.tracks, c);
      for (const auto& row : tri.metrics.rows) completeness[half].push_back(row.completeness);
    }
    o.Require(std::abs(stage1[1] - stage1[0] / 2.0) <= 1.0, "half-budget group count");
    for (size_t t = 0; t < completeness[0].size(); ++t) {
      const double drop = (completeness[0][t] - completeness[1][t]) / completeness[0][t];
      o.Require(completeness[0][t] > 0.0 && drop < kCompletenessDrop,
                fmt::format("scene {} completeness drop at {} cm", seed,
                            cfg.eval.triangulation_thresholds_cm[t]));
    }
    rows += fmt::format("{}scene {}: groups {}->{}, completeness {:.3f}/{:.3f}/{:.3f} -> "
                        "{:.3f}/{:.3f}/{:.3f}",
                        rows.empty() ? "" : "; ", seed, stage1[0], stage1[1],
                        completeness[0][0], completeness[0][1], completeness[0][2],
                        completeness[1][0], completeness[1][1], completeness[1][2]);
  }
  o.Note(rows);
  return o;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> DirContents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().filename().string()] = ReadFile(e.path());
  }
  return out;
}

// 10. Every CLI subcommand reproduces its outputs byte for byte.
Outcome CliDeterminism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() /
                        fmt::format("mvmatch_acceptance_{}", static_cast<long>(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  AppConfig small;
  small.scene.base_resolution = 256;  // 64 px working size
  small.scene.num_points = 800;
  const std::string cli = MVM_CLI_PATH;
  int files = 0, commands = 0;
  for (const std::string kind : {"planar", "point_cloud"}) {
    AppConfig c = small;
    c.scene.kind = kind;
    const fs::path cfg_path = root / (kind + ".json");
    std::ofstream(cfg_path) << ConfigToJson(c);
    struct Step {
      std::string name;
      std::string args;
    };
    const std::vector<Step> steps = {
        {"gen-scene", ""},
        {"sample-groups", "--scene {0}/gen-scene/scene.json"},
        {"build-tracks", "--scene {0}/gen-scene/scene.json --groups {0}/sample-groups/groups.json"},
        {"match", "--scene {0}/gen-scene/scene.json --input {0}/build-tracks"},
        {"postprocess", "--scene {0}/gen-scene/scene.json --input {0}/match"},
        {kind == "planar" ? "eval-homography" : "eval-triangulation",
         kind == "planar" ? "--scene {0}/gen-scene/scene.json --input {0}/match"
                          : "--scene {0}/gen-scene/scene.json --input {0}/postprocess/tracks.tsv"},
    };
    for (const Step& step : steps) {
      std::string first;
      for (int run = 0; run < 2; ++run) {
        const fs::path base = root / kind / fmt::format("run{}", run);
        const fs::path out = base / step.name;
        // Both runs read the first run's inputs.
        const std::string args = fmt::format(fmt::runtime(step.args),
                                             (root / kind / "run0").string());
        const std::string cmd =
            fmt::format("\"{}\" {} --config \"{}\" --seed 7 --out \"{}\" {} 2>/dev/null",
                        cli, step.name, cfg_path.string(), out.string(), args);
        const int rc = std::system(cmd.c_str());
        o.Require(rc == 0, fmt::format("{} {} exit status", kind, step.name));
        if (rc != 0) return o;
        ++commands;
      }
      const auto a = DirContents(root / kind / "run0" / step.name);
      const auto b = DirContents(root / kind / "run1" / step.name);
      o.Require(!a.empty() && a == b, fmt::format("{} {} byte identical", kind, step.name));
      files += static_cast<int>(a.size());
    }
  }
  fs::remove_all(root);
  o.Note(fmt::format("{} CLI runs, {} output files compared", commands, files));
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace mvm

int main() {
  using namespace mvm;
  const std::vector<Criterion> criteria = {
      {1, "attention kernels match loop oracles", 10, AttentionOracles},
      {2, "masking, equivariance and normalization", 10, MaskingEquivariance},
      {3, "track builder contract", 30, TrackBuilder},
      {4, "post-processing exactness and defaults", 10, Postprocess},
      {5, "group sampler contract", 10, GroupSampler},
      {6, "geometry round trips", 30, Geometry},
      {7, "noiseless planar pipeline end to end", 120, EndToEnd},
      {8, "coarse-to-fine monotonicity", 120, CoarseToFine},
      {9, "half-budget trade-off", 180, BudgetTradeoff},
      {10, "CLI determinism", 600, CliDeterminism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.Require(false, std::string("exception: ") + e.what());
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.Require(dt < c.budget_s, fmt::format("runtime over {} s", c.budget_s));
    failed += !out.pass;
    std::printf("%s  C%-2d %s [%.2f s] %s\n", out.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), dt, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
