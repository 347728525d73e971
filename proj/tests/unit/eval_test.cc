#include <cmath>

#include <gtest/gtest.h>

#include "mvmatch/core/rng.h"
#include "mvmatch/eval/homography.h"
#include "mvmatch/eval/triangulation.h"
#include "support/oracles.h"

namespace mvm {
namespace {

using testing::Apply;

double RelativeError(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (NormalizeHomography(a) - NormalizeHomography(b)).norm() /
         NormalizeHomography(b).norm();
}

std::vector<PointPair> ExactPairs(const Eigen::Matrix3d& h,
                                  const std::vector<Eigen::Vector2d>& src) {
  std::vector<PointPair> pairs;
  for (const auto& p : src) pairs.push_back({p, Apply(h, p)});
  return pairs;
}

TEST(Dlt, FourExactPointsRecoverHomography) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Eigen::Matrix3d h = testing::RandomHomography(rng, 672.0);
    const std::vector<Eigen::Vector2d> src = {
        {rng.Uniform(0, 200), rng.Uniform(0, 200)},
        {rng.Uniform(472, 672), rng.Uniform(0, 200)},
        {rng.Uniform(472, 672), rng.Uniform(472, 672)},
        {rng.Uniform(0, 200), rng.Uniform(472, 672)}};
    EXPECT_LT(RelativeError(DltHomography(ExactPairs(h, src)), h), 1e-8);
  }
}

TEST(Dlt, IdentityCorrespondences) {
  const std::vector<Eigen::Vector2d> src = {{0, 0}, {10, 0}, {10, 10}, {0, 10}, {3, 7}};
  const Eigen::Matrix3d h = DltHomography(ExactPairs(Eigen::Matrix3d::Identity(), src));
  EXPECT_LT((NormalizeHomography(h) - Eigen::Matrix3d::Identity()).norm(), 1e-12);
}

TEST(Dlt, CollinearPointsAreDegenerate) {
  const std::vector<Eigen::Vector2d> src = {{0, 0}, {1, 1}, {2, 2}, {5, 0}};
  EXPECT_THROW(DltHomography(ExactPairs(Eigen::Matrix3d::Identity(), src)),
               DegenerateConfigurationError);
}

TEST(Dlt, SimilarityOnSourcePointsComposes) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix3d h = testing::RandomHomography(rng, 500.0);
    const double a = rng.Uniform(-1, 1), s = rng.Uniform(0.5, 2.0);
    Eigen::Matrix3d sim;
    sim << s * std::cos(a), -s * std::sin(a), rng.Uniform(-50, 50),
        s * std::sin(a), s * std::cos(a), rng.Uniform(-50, 50), 0, 0, 1;
    std::vector<PointPair> pairs, moved;
    for (int i = 0; i < 12; ++i) {
      const Eigen::Vector2d p(rng.Uniform(0, 500), rng.Uniform(0, 500));
      pairs.push_back({p, Apply(h, p)});
      moved.push_back({Apply(sim, p), Apply(h, p)});
    }
    const Eigen::Matrix3d h0 = DltHomography(pairs);
    const Eigen::Matrix3d h1 = DltHomography(moved);
    EXPECT_LT(RelativeError(h1 * sim, h0), 1e-8);
  }
}

TEST(Ransac, OutlierFreeMatchesDlt) {
  Rng rng(4);
  const testing::RansacInstance inst = testing::MakeRansacInstance(rng, 100, 0, 400);
  const RansacResult r = RansacHomography(inst.pairs, {});
  EXPECT_EQ(r.num_inliers, 100);
  EXPECT_LT(RelativeError(r.homography, DltHomography(inst.pairs)), 1e-6);
}

TEST(Ransac, RecoversExactInlierSet) {
  int exact = 0;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(1000 + seed);
    const testing::RansacInstance inst = testing::MakeRansacInstance(rng, 70, 30, 400);
    RansacOptions o;
    o.seed = seed;
    if (RansacHomography(inst.pairs, o).inliers == inst.truth) ++exact;
  }
  EXPECT_GE(exact, 29);
}

TEST(Ransac, DeterministicUnderSeed) {
  Rng rng(5);
  const testing::RansacInstance inst = testing::MakeRansacInstance(rng, 50, 50, 300);
  RansacOptions o;
  o.seed = 12;
  const RansacResult a = RansacHomography(inst.pairs, o);
  const RansacResult b = RansacHomography(inst.pairs, o);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.homography, b.homography);
}

TEST(Ransac, TooFewPairsIsAnError) {
  const std::vector<PointPair> pairs(3, PointPair{{0, 0}, {0, 0}});
  EXPECT_THROW(RansacHomography(pairs, {}), std::invalid_argument);
}

TEST(Ransac, InlierCountGrowsWithThreshold) {
  Rng rng(6);
  testing::RansacInstance inst = testing::MakeRansacInstance(rng, 80, 20, 300);
  for (auto& p : inst.pairs) p.dst += Eigen::Vector2d(rng.Normal(0, 1.5), rng.Normal(0, 1.5));
  int prev = 0;
  for (double t : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0}) {
    RansacOptions o;
    o.threshold = t;
    o.adaptive = false;
    o.max_iterations = 500;
    const int n = RansacHomography(inst.pairs, o).best_hypothesis_inliers;
    EXPECT_GE(n, prev) << t;
    prev = n;
  }
}

TEST(Corner, ExactAndTranslated) {
  Rng rng(2);
  const Eigen::Matrix3d h = testing::RandomHomography(rng, 100);
  EXPECT_NEAR(CornerError(h, h, 100, 100), 0.0, 1e-12);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 2) = 3.0;
  EXPECT_NEAR(CornerError(Eigen::Matrix3d::Identity(), t, 50, 80), 3.0, 1e-12);
  const std::vector<double> th = {1, 3, 5};
  const std::vector<double> c = CornerAucContribution(3.0, th);
  EXPECT_DOUBLE_EQ(c[0], 0.0);
  EXPECT_DOUBLE_EQ(c[1], 0.0);
  EXPECT_NEAR(c[2], 0.4, 1e-15);
  EXPECT_EQ(CornerAucContribution(0.0, th), (std::vector<double>{1, 1, 1}));
}

TEST(Auc, MonotoneAndOrderInvariant) {
  Rng rng(8);
  std::vector<double> errors;
  for (int i = 0; i < 40; ++i) errors.push_back(rng.Uniform(0, 8));
  const std::vector<double> th = {0.5, 1, 2, 3, 5, 10};
  const PoseErrorCurve a = PoseErrorCurve::FromErrors(errors, th);
  std::reverse(errors.begin(), errors.end());
  const PoseErrorCurve b = PoseErrorCurve::FromErrors(errors, th);
  EXPECT_EQ(a.auc, b.auc);
  for (size_t i = 1; i < th.size(); ++i) EXPECT_GE(a.auc[i], a.auc[i - 1]);
  EXPECT_TRUE(std::is_sorted(a.errors.begin(), a.errors.end()));
  double manual = 0.0;
  for (double e : errors) manual += std::clamp(1.0 - e / 3.0, 0.0, 1.0);
  EXPECT_NEAR(a.auc[3], manual / errors.size(), 1e-12);
}

TEST(BalancedSample, RespectsLimitAndConfidence) {
  DenseWarpField w = DenseWarpField::Identity(40, 40);
  Rng rng(1);
  for (double& c : w.confidence) c = rng.Uniform();
  const auto a = BalancedMatchSample(w, 300, 0.3, 4);
  EXPECT_EQ(a.size(), 300u);
  for (const PointPair& p : a) {
    const double c = w.confidence[w.Index(int(p.src.y()), int(p.src.x()))];
    EXPECT_GT(c, 0.3);
    EXPECT_EQ(p.src, p.dst);
  }
  const auto b = BalancedMatchSample(w, 300, 0.3, 4);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].src, b[i].src);
  EXPECT_LT(BalancedMatchSample(w, 5000, 0.3, 4).size(), 1600u);
}

TEST(EstimateWarpHomography, ExactWarp) {
  Rng rng(13);
  const Eigen::Matrix3d h = testing::RandomHomography(rng, 64);
  DenseWarpField w(64, 64, 1, 0, 1);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      const Eigen::Vector2d q = Apply(h, {double(c), double(r)});
      w.targets[w.Index(r, c)] = {q.x(), q.y()};
      w.confidence[w.Index(r, c)] = 1.0;
    }
  }
  const WarpHomographyResult r = EstimateWarpHomography(w, {});
  ASSERT_FALSE(r.degenerate);
  EXPECT_LT(CornerError(r.homography, h, 64, 64), 1e-6);
  for (double& c : w.confidence) c = 0.0;
  EXPECT_TRUE(EstimateWarpHomography(w, {}).degenerate);
}

TEST(Triangulation, TwoViewRoundTrip) {
  const auto cams = testing::ArcCameras(2, 4.0, 150, 168);
  const Eigen::Vector3d x(0.3, -0.2, 0.5);
  std::vector<Eigen::Matrix<double, 3, 4>> p;
  std::vector<Eigen::Vector2d> px;
  for (const auto& c : cams) {
    p.push_back(c.ProjectionMatrix());
    px.push_back(*c.Project(x));
  }
  Eigen::Vector3d out;
  ASSERT_EQ(TriangulateDlt(p, px, &out), TriangulationStatus::kOk);
  EXPECT_LT((out - x).norm(), 1e-6);
}

TEST(Triangulation, ZeroBaselineIsDegenerate) {
  const auto cams = testing::ArcCameras(1, 4.0, 150, 168);
  const Eigen::Vector3d x(0.3, -0.2, 0.5);
  const std::vector<Eigen::Matrix<double, 3, 4>> p(2, cams[0].ProjectionMatrix());
  const std::vector<Eigen::Vector2d> px(2, *cams[0].Project(x));
  Eigen::Vector3d out;
  EXPECT_EQ(TriangulateDlt(p, px, &out), TriangulationStatus::kDegenerate);
}

TEST(Triangulation, FiveViewResidualVanishes) {
  const auto cams = testing::ArcCameras(5, 4.0, 150, 168);
  Rng rng(21);
  std::vector<SceneTrack> tracks;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d x(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1));
    SceneTrack t;
    for (int v = 0; v < 5; ++v) {
      const Eigen::Vector2d q = *cams[v].Project(x);
      t.push_back({v, {q.x(), q.y()}});
    }
    tracks.push_back(t);
  }
  tracks.push_back({{0, {10, 10}}});
  const TriangulationResult r = TriangulateTracks(tracks, cams);
  EXPECT_EQ(r.points.size(), 50u);
  EXPECT_EQ(r.skipped_short, 1);
  for (const TriangulatedPoint& p : r.points) EXPECT_LT(p.max_reprojection_error, 1e-6);
}

TEST(Triangulation, PointsBehindCamerasAreRejected) {
  const auto cams = testing::ArcCameras(2, 4.0, 150, 168);
  // Pixels consistent with a point behind both cameras.
  const Eigen::Vector3d x = 2.0 * cams[0].Center() + 2.0 * cams[1].Center();
  SceneTrack t;
  for (int v = 0; v < 2; ++v) {
    const Eigen::Vector3d h = cams[v].intrinsics * cams[v].ToCamera(x);
    t.push_back({v, {h.x() / h.z(), h.y() / h.z()}});
  }
  const TriangulationResult r = TriangulateTracks(std::vector<SceneTrack>{t}, cams);
  EXPECT_TRUE(r.points.empty());
  EXPECT_EQ(r.cheirality_rejected, 1);
}

TEST(AccuracyCompleteness, IdenticalAndSubset) {
  Rng rng(30);
  std::vector<Eigen::Vector3d> gt;
  for (int i = 0; i < 100; ++i) gt.emplace_back(i * 0.1, rng.Uniform(), 0.0);
  const std::vector<double> th = {0.01, 0.02, 0.05};
  const AccuracyCompleteness same = ComputeAccuracyCompleteness(gt, gt, th);
  for (const auto& row : same.rows) {
    EXPECT_EQ(row.accuracy, 1.0);
    EXPECT_EQ(row.completeness, 1.0);
  }
  const std::vector<Eigen::Vector3d> half(gt.begin(), gt.begin() + 50);
  for (const auto& row : ComputeAccuracyCompleteness(half, gt, th).rows) {
    EXPECT_EQ(row.accuracy, 1.0);
    EXPECT_EQ(row.completeness, 0.5);
  }
  const AccuracyCompleteness empty = ComputeAccuracyCompleteness({}, gt, th);
  EXPECT_TRUE(empty.empty_reconstruction);
  EXPECT_EQ(empty.rows[0].accuracy, 0.0);
}

}  // namespace
}  // namespace mvm
