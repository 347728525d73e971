#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/core/types.h"

namespace mvm {

enum class OverlapMode { kVisibility, kDescriptor };

// M x M overlap scores in [0, 1]; the diagonal is ignored.
struct OverlapMatrix {
  int size = 0;
  OverlapMode mode = OverlapMode::kVisibility;
  std::vector<double> values;

  explicit OverlapMatrix(int size = 0, OverlapMode mode = OverlapMode::kVisibility)
      : size(size), mode(mode), values(static_cast<size_t>(size) * size, 0.0) {}
  double At(int i, int j) const { return values[static_cast<size_t>(i) * size + j]; }
  double& At(int i, int j) { return values[static_cast<size_t>(i) * size + j]; }
};

// o_ij = fraction of source pixels of warp i -> j with confidence > tau_conf.
// Pairs without a warp score 0.
OverlapMatrix OverlapFromMatches(int num_images,
                                 std::span<const DenseWarpField> warps,
                                 double tau_conf);

// Cosine similarity of descriptor rows, clamped to [0, 1].
OverlapMatrix OverlapFromDescriptors(const Eigen::MatrixXd& descriptors);

// Quotas g_i proportional to (N_i + 1)^beta, summing to budget, each at
// least 1. Rounding is largest remainder with ties to the larger N_i, then
// the lower index.
std::vector<int> QuotasFromCounts(std::span<const int> n, double beta,
                                  int budget);

// QuotasFromCounts with N_i = #{j : o_ij > tau}.
std::vector<int> SourceQuotas(const OverlapMatrix& overlap, double tau,
                              double beta, int budget);

// ceil(M sqrt(M)) or half of it, never below M.
int DefaultBudget(int num_images, bool half);

// Directed pair counts plus the pairs still waiting for their reverse.
struct PairUsage {
  int size = 0;
  std::vector<int> counts;
  std::set<std::pair<int, int>> pending;

  explicit PairUsage(int size = 0)
      : size(size), counts(static_cast<size_t>(size) * size, 0) {}
  int Count(int i, int j) const { return counts[static_cast<size_t>(i) * size + j]; }
  // Records that pair i -> j entered a group. When track_pending is set the
  // reverse pair becomes pending unless it already exists.
  void Record(int i, int j, bool track_pending);
};

struct GroupParams {
  double alpha_src = 1.0;
  double alpha_tgt = 0.25;
  double lambda = 1.0;
  int max_targets = 4;
};

struct BuiltGroup {
  ImageGroup group;
  bool empty_warning = false;
};

// Selection score of candidate j for the current partial group.
double GroupScore(int source, int candidate, std::span<const int> current,
                  const OverlapMatrix& overlap, const PairUsage& usage,
                  const GroupParams& params);

// Greedy target selection. `forced` targets are placed first; `allowed`
// (when non-empty) restricts greedy picks. Updates usage for every pair.
BuiltGroup BuildGroup(int source, const OverlapMatrix& overlap,
                      PairUsage* usage, const GroupParams& params,
                      bool track_pending = true,
                      std::span<const int> forced = {},
                      std::span<const uint8_t> allowed = {});

// Second stage: a group per pending image, pending partners first, fillers
// restricted to images already paired with the source in either direction.
std::vector<ImageGroup> AugmentReciprocity(std::span<const ImageGroup> groups,
                                           const OverlapMatrix& overlap,
                                           PairUsage* usage,
                                           const GroupParams& params);

struct SamplerOptions {
  double tau = 0.3;
  double beta = 0.75;
  int budget = 0;  // 0 selects DefaultBudget
  bool half_budget = false;
  GroupParams group;
  bool stochastic = false;
  uint64_t seed = 0;
};

struct GroupPlan {
  int budget = 0;
  std::vector<int> quotas;
  std::vector<ImageGroup> stage1;
  std::vector<ImageGroup> stage2;
  int dropped_empty = 0;

  std::vector<ImageGroup> All() const;
};

GroupPlan SampleGroups(const OverlapMatrix& overlap,
                       const SamplerOptions& options);

// Row-major M x M matrix with 1 where directed pair i -> j occurs.
std::vector<uint8_t> PairAdjacency(int num_images,
                                   std::span<const ImageGroup> groups);

// JSON manifest with budget, quotas, options and groups (stage-tagged).
std::string GroupManifestJson(const GroupPlan& plan,
                              const SamplerOptions& options);
std::vector<ImageGroup> GroupsFromManifestJson(const std::string& text);

}  // namespace mvm
