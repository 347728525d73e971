#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "mvmatch/core/rng.h"
#include "mvmatch/groups/group_sampler.h"
#include "mvmatch/synth/scene.h"

namespace mvm {
namespace {

OverlapMatrix RandomOverlap(int m, Rng& rng) {
  OverlapMatrix o(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j) o.At(i, j) = rng.Uniform() < 0.3 ? 0.0 : rng.Uniform(0.01, 1.0);
    }
  }
  return o;
}

// N_i values realized by a 16-image matrix with rows of given degrees.
OverlapMatrix WithDegrees(const std::vector<int>& degrees) {
  const int m = 16;
  OverlapMatrix o(m);
  for (size_t i = 0; i < degrees.size(); ++i) {
    int placed = 0;
    for (int j = 0; j < m && placed < degrees[i]; ++j) {
      if (j == static_cast<int>(i)) continue;
      o.At(i, j) = 0.9;
      ++placed;
    }
  }
  return o;
}

// Independent greedy: explicit score evaluation over every candidate.
std::vector<int> GreedyOracle(int source, const OverlapMatrix& o,
                              const std::vector<int>& counts, int m,
                              const GroupParams& p) {
  std::vector<int> chosen;
  while (static_cast<int>(chosen.size()) < p.max_targets) {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == source || std::count(chosen.begin(), chosen.end(), j)) continue;
      double coh = 0.0;
      for (int k : chosen) coh += o.At(k, j);
      const double s = (p.alpha_src * o.At(source, j) + p.alpha_tgt * coh) /
                       (1.0 + p.lambda * counts[source * m + j]);
      if (s > best_score) {
        best = j;
        best_score = s;
      }
    }
    if (best < 0) break;
    chosen.push_back(best);
  }
  return chosen;
}

bool Symmetric(const std::vector<uint8_t>& adj, int m) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (adj[i * m + j] != adj[j * m + i]) return false;
    }
  }
  return true;
}

TEST(Overlap, IdenticalAndDisjointViews) {
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  const SceneOracle s = SceneOracle::Planar(32, 32, {id, id}, 1);
  const std::vector<DenseWarpField> w = {GtWarp(s, 0, 1)};
  EXPECT_DOUBLE_EQ(OverlapFromMatches(2, w, 0.3).At(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(OverlapFromMatches(2, w, 0.3).At(1, 0), 0.0);
  DenseWarpField none = DenseWarpField::Identity(32, 32, 1, 1, 0);
  for (double& c : none.confidence) c = 0.0;
  EXPECT_DOUBLE_EQ(OverlapFromMatches(2, std::vector{none}, 0.3).At(1, 0), 0.0);
}

TEST(Overlap, HalfShiftGivesHalf) {
  Eigen::Matrix3d shift = Eigen::Matrix3d::Identity();
  shift(0, 2) = -32.0;
  const SceneOracle s =
      SceneOracle::Planar(64, 64, {Eigen::Matrix3d::Identity(), shift}, 1);
  const std::vector<DenseWarpField> w = {GtWarp(s, 0, 1)};
  EXPECT_NEAR(OverlapFromMatches(2, w, 0.3).At(0, 1), 0.5, 0.02);
}

TEST(Overlap, DescriptorCosine) {
  Eigen::MatrixXd d(4, 2);
  d << 1, 0, 2, 0, 0, 1, 0.5, std::sqrt(3.0) / 2;
  const OverlapMatrix o = OverlapFromDescriptors(d);
  EXPECT_NEAR(o.At(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(o.At(0, 2), 0.0, 1e-15);
  EXPECT_NEAR(o.At(0, 3), 0.5, 1e-15);
  d.row(2) << -1, 0;
  EXPECT_EQ(OverlapFromDescriptors(d).At(0, 2), 0.0);
}

TEST(Quotas, HandComputedExample) {
  EXPECT_NEAR(std::pow(16.0, 0.75), 8.0, 1e-12);
  EXPECT_NEAR(std::pow(4.0, 0.75), 2.828427, 1e-6);
  const std::vector<int> n = {15, 3, 0};
  EXPECT_EQ(QuotasFromCounts(n, 0.75, 12), (std::vector<int>{8, 3, 1}));
}

TEST(Quotas, FromOverlapCountsRows) {
  const OverlapMatrix o = WithDegrees({15, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  const std::vector<int> q = SourceQuotas(o, 0.3, 0.75, 30);
  std::vector<int> n(16, 0);
  n[0] = 15;
  n[1] = 3;
  EXPECT_EQ(q, QuotasFromCounts(n, 0.75, 30));
}

TEST(Quotas, EqualCountsGiveEqualQuotas) {
  const std::vector<int> n(7, 2);
  const std::vector<int> q = QuotasFromCounts(n, 0.75, 19);
  EXPECT_LE(*std::max_element(q.begin(), q.end()) -
                *std::min_element(q.begin(), q.end()),
            1);
}

TEST(Quotas, Invariants) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng.UniformInt(30));
    std::vector<int> n(m);
    for (int& v : n) v = static_cast<int>(rng.UniformInt(m));
    const int budget = m + static_cast<int>(rng.UniformInt(3 * m));
    const std::vector<int> q = QuotasFromCounts(n, 0.75, budget);
    EXPECT_EQ(std::accumulate(q.begin(), q.end(), 0), budget);
    for (int i = 0; i < m; ++i) {
      EXPECT_GE(q[i], 1);
      for (int j = 0; j < m; ++j) {
        if (n[i] < n[j]) EXPECT_LE(q[i], q[j]);
      }
    }
  }
}

TEST(Quotas, Errors) {
  const std::vector<int> n = {1, 2, 3};
  EXPECT_THROW(QuotasFromCounts(n, 0.75, 2), std::invalid_argument);
  EXPECT_THROW(QuotasFromCounts(n, 1.0, 6), std::invalid_argument);
}

TEST(Budget, Defaults) {
  EXPECT_EQ(DefaultBudget(4, false), 8);
  EXPECT_EQ(DefaultBudget(8, false), 23);
  EXPECT_EQ(DefaultBudget(8, true), 12);
  EXPECT_EQ(DefaultBudget(2, true), 2);
  EXPECT_EQ(SamplerOptions{}.beta, 0.75);
}

TEST(BuildGroup, FirstPickIsBestSourceOverlap) {
  OverlapMatrix o(4);
  o.At(0, 1) = 0.2;
  o.At(0, 2) = 0.7;
  o.At(0, 3) = 0.5;
  PairUsage usage(4);
  GroupParams p;
  p.lambda = 0.0;
  p.max_targets = 1;
  EXPECT_EQ(BuildGroup(0, o, &usage, p).group.targets, std::vector<int>{2});
  EXPECT_EQ(usage.Count(0, 2), 1);
  EXPECT_TRUE(usage.pending.count({2, 0}));
}

TEST(BuildGroup, RepeatPenaltyFlipsPick) {
  OverlapMatrix o(3);
  o.At(0, 1) = o.At(0, 2) = 0.8;
  PairUsage usage(3);
  for (int k = 0; k < 3; ++k) usage.Record(0, 1, false);
  GroupParams p;
  p.max_targets = 1;
  EXPECT_NEAR(GroupScore(0, 1, {}, o, usage, p), 0.2, 1e-15);
  EXPECT_NEAR(GroupScore(0, 2, {}, o, usage, p), 0.8, 1e-15);
  EXPECT_EQ(BuildGroup(0, o, &usage, p).group.targets, std::vector<int>{2});
}

TEST(BuildGroup, CoherenceFlipsSecondPick) {
  OverlapMatrix o(5);
  o.At(0, 1) = 0.9;
  o.At(0, 2) = 0.5;
  o.At(0, 3) = 0.45;
  o.At(1, 3) = 0.8;
  GroupParams p;
  p.max_targets = 2;
  PairUsage a(5);
  EXPECT_EQ(BuildGroup(0, o, &a, p).group.targets, (std::vector<int>{1, 3}));
  p.alpha_tgt = 0.0;
  PairUsage b(5);
  EXPECT_EQ(BuildGroup(0, o, &b, p).group.targets, (std::vector<int>{1, 2}));
}

TEST(BuildGroup, MatchesEnumerationOracle) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const int m = 5;
    const OverlapMatrix o = RandomOverlap(m, rng);
    PairUsage usage(m);
    for (int k = 0; k < 6; ++k) {
      const int i = static_cast<int>(rng.UniformInt(m));
      const int j = static_cast<int>(rng.UniformInt(m));
      if (i != j) usage.Record(i, j, false);
    }
    GroupParams p;
    p.max_targets = 1 + static_cast<int>(rng.UniformInt(4));
    p.alpha_tgt = rng.Uniform(0.0, 1.0);
    const int source = static_cast<int>(rng.UniformInt(m));
    const std::vector<int> want = GreedyOracle(source, o, usage.counts, m, p);
    EXPECT_EQ(BuildGroup(source, o, &usage, p).group.targets, want);
  }
}

TEST(BuildGroup, NoPositiveCandidateGivesEmptyGroup) {
  OverlapMatrix o(3);
  PairUsage usage(3);
  const BuiltGroup g = BuildGroup(1, o, &usage, GroupParams{});
  EXPECT_TRUE(g.group.targets.empty());
  EXPECT_TRUE(g.empty_warning);
}

TEST(Augment, SinglePendingPair) {
  OverlapMatrix o(3);
  o.At(0, 1) = 0.9;
  o.At(1, 0) = 0.9;
  PairUsage usage(3);
  GroupParams p;
  const std::vector<ImageGroup> stage1 = {{0, {1}}};
  usage.Record(0, 1, true);
  const auto extra = AugmentReciprocity(stage1, o, &usage, p);
  ASSERT_EQ(extra.size(), 1u);
  EXPECT_EQ(extra[0].source, 1);
  EXPECT_EQ(extra[0].targets, std::vector<int>{0});
}

TEST(Augment, SymmetricInputIsFixedPoint) {
  OverlapMatrix o(2);
  o.At(0, 1) = o.At(1, 0) = 0.5;
  PairUsage usage(2);
  usage.Record(0, 1, true);
  usage.Record(1, 0, true);
  const std::vector<ImageGroup> stage1 = {{0, {1}}, {1, {0}}};
  EXPECT_TRUE(AugmentReciprocity(stage1, o, &usage, GroupParams{}).empty());
}

TEST(SampleGroups, Invariants) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int m = 8 + static_cast<int>(rng.UniformInt(25));
    const OverlapMatrix o = RandomOverlap(m, rng);
    for (bool half : {false, true}) {
      SamplerOptions opt;
      opt.half_budget = half;
      const GroupPlan plan = SampleGroups(o, opt);
      EXPECT_EQ(plan.budget, DefaultBudget(m, half));
      EXPECT_EQ(std::accumulate(plan.quotas.begin(), plan.quotas.end(), 0), plan.budget);
      EXPECT_LE(static_cast<int>(plan.stage1.size()), plan.budget);
      const auto all = plan.All();
      EXPECT_TRUE(Symmetric(PairAdjacency(m, all), m)) << seed;
      std::set<int> sources;
      for (const ImageGroup& g : all) {
        sources.insert(g.source);
        EXPECT_LE(static_cast<int>(g.targets.size()), opt.group.max_targets);
        EXPECT_NO_THROW(g.Validate());
      }
      EXPECT_EQ(static_cast<int>(sources.size()), m);
      // Stage 2 adds no pair unrelated to stage 1 in both directions.
      const auto adj1 = PairAdjacency(m, plan.stage1);
      for (const ImageGroup& g : plan.stage2) {
        for (int t : g.targets) {
          EXPECT_TRUE(adj1[g.source * m + t] || adj1[t * m + g.source]);
        }
      }
      const GroupPlan again = SampleGroups(o, opt);
      EXPECT_EQ(again.All(), all);
    }
  }
}

TEST(SampleGroups, StochasticModeIsSeeded) {
  Rng rng(3);
  const OverlapMatrix o = RandomOverlap(12, rng);
  SamplerOptions opt;
  opt.stochastic = true;
  opt.seed = 9;
  EXPECT_EQ(SampleGroups(o, opt).All(), SampleGroups(o, opt).All());
  EXPECT_TRUE(Symmetric(PairAdjacency(12, SampleGroups(o, opt).All()), 12));
}

TEST(Manifest, Roundtrip) {
  Rng rng(8);
  const OverlapMatrix o = RandomOverlap(9, rng);
  const SamplerOptions opt;
  const GroupPlan plan = SampleGroups(o, opt);
  const std::string text = GroupManifestJson(plan, opt);
  EXPECT_EQ(GroupsFromManifestJson(text), plan.All());
  EXPECT_NE(text.find("\"beta\""), std::string::npos);
}

}  // namespace
}  // namespace mvm
