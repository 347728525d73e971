#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/core/rng.h"
#include "mvmatch/core/track_token.h"
#include "mvmatch/synth/matcher_sim.h"

namespace mvm {

// Raw samples sharing one visibility mask.
struct VisibilityPartition {
  std::vector<uint8_t> mask;
  std::vector<int> members;
};

// Groups samples by identical visibility masks, ordered lexicographically by
// mask. Members keep input order.
std::vector<VisibilityPartition> PartitionByVisibility(
    std::span<const MatchSample> raw);

struct ClusterAllocation {
  std::vector<int> counts;
  // Set when fewer than the requested clusters could be allocated.
  bool capped = false;
};

// Proportional allocation of num_tokens clusters over partitions using
// largest-remainder rounding. Counts never exceed a partition's size; the
// surplus is redistributed. Ties go to the larger partition, then to the
// earlier (lexicographically smaller) mask.
ClusterAllocation AllocateClusters(
    std::span<const VisibilityPartition> partitions, int num_tokens);

struct TrackSamplingOptions {
  int max_iterations = 50;
  double tolerance = 1e-4;
  // Divide x by image_width and y by image_height before clustering.
  bool normalize = false;
  int image_height = 0;
  int image_width = 0;
};

// Converts a raw sample into a token (sentinels for invisible slots).
TrackToken ToTrackToken(const MatchSample& sample);

// Clustering-based track selection. Samples with no visible target are
// ignored. Each output token is the member closest to its cluster centroid;
// output order is partition order, then cluster index.
std::vector<TrackToken> SampleTracks(std::span<const MatchSample> raw,
                                     int num_tokens, uint64_t seed,
                                     const TrackSamplingOptions& options = {});

struct KMeansResult {
  Eigen::MatrixXd centroids;    // k x d
  std::vector<int> assignment;  // per point
  int iterations = 0;
};

// Lloyd iterations from a k-means++ seeding. Points are rows of `points`.
// Empty clusters keep their previous centroid.
KMeansResult KMeans(const Eigen::MatrixXd& points, int k, Rng& rng,
                    int max_iterations, double tolerance);

}  // namespace mvm
