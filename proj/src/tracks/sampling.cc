#include <algorithm>
#include <limits>

#include "mvmatch/core/check.h"
#include "mvmatch/tracks/track_builder.h"

namespace mvm {
namespace {

int NearestCentroid(const Eigen::MatrixXd& centroids,
                    const Eigen::RowVectorXd& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < centroids.rows(); ++j) {
    const double d = (centroids.row(j) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace

KMeansResult KMeans(const Eigen::MatrixXd& points, int k, Rng& rng,
                    int max_iterations, double tolerance) {
  const int n = static_cast<int>(points.rows());
  MVM_CHECK(n >= 1, "no points");
  MVM_CHECK(k >= 1 && k <= n, "k out of range");
  KMeansResult result;
  result.centroids.resize(k, points.cols());

  // k-means++ seeding.
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  int first = static_cast<int>(rng.UniformInt(n));
  result.centroids.row(0) = points.row(first);
  chosen[first] = 1;
  for (int j = 1; j < k; ++j) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i],
                       (points.row(i) - result.centroids.row(j - 1)).squaredNorm());
      sum += d2[i];
    }
    int pick = -1;
    if (sum > 0.0) {
      double u = rng.Uniform() * sum;
      for (int i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        u -= d2[i];
        if (u < 0.0) break;
      }
    }
    if (pick < 0) {
      for (int i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = 1;
    result.centroids.row(j) = points.row(pick);
  }

  result.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    for (int i = 0; i < n; ++i) {
      result.assignment[i] = NearestCentroid(result.centroids, points.row(i));
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(result.assignment[i]) += points.row(i);
      ++counts[result.assignment[i]];
    }
    double movement = 0.0;
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      const Eigen::RowVectorXd c = sums.row(j) / counts[j];
      movement = std::max(movement, (c - result.centroids.row(j)).norm());
      result.centroids.row(j) = c;
    }
    result.iterations = iter + 1;
    if (movement < tolerance) break;
  }
  for (int i = 0; i < n; ++i) {
    result.assignment[i] = NearestCentroid(result.centroids, points.row(i));
  }
  return result;
}

std::vector<TrackToken> SampleTracks(std::span<const MatchSample> raw,
                                     int num_tokens, uint64_t seed,
                                     const TrackSamplingOptions& options) {
  MVM_CHECK(!raw.empty(), "empty input");
  MVM_CHECK(num_tokens >= 1, "num_tokens must be positive");
  if (options.normalize) {
    MVM_CHECK(options.image_height > 0 && options.image_width > 0,
              "normalization needs the image size");
  }

  std::vector<VisibilityPartition> partitions;
  for (auto& p : PartitionByVisibility(raw)) {
    if (std::count(p.mask.begin() + 1, p.mask.end(), 1) > 0) {
      partitions.push_back(std::move(p));
    }
  }
  MVM_CHECK(!partitions.empty(), "no sample sees any target");
  const ClusterAllocation alloc = AllocateClusters(partitions, num_tokens);

  const double sx = options.normalize ? 1.0 / options.image_width : 1.0;
  const double sy = options.normalize ? 1.0 / options.image_height : 1.0;
  std::vector<TrackToken> out;
  for (size_t p = 0; p < partitions.size(); ++p) {
    const int k = alloc.counts[p];
    if (k == 0) continue;
    const auto& members = partitions[p].members;
    const auto& mask = partitions[p].mask;
    std::vector<int> slots;
    for (size_t v = 0; v < mask.size(); ++v) {
      if (mask[v]) slots.push_back(static_cast<int>(v));
    }
    std::vector<TrackToken> tokens;
    Eigen::MatrixXd points(members.size(), 2 * slots.size());
    for (size_t i = 0; i < members.size(); ++i) {
      tokens.push_back(ToTrackToken(raw[members[i]]));
      for (size_t s = 0; s < slots.size(); ++s) {
        points(i, 2 * s) = tokens.back().coords[slots[s]].x * sx;
        points(i, 2 * s + 1) = tokens.back().coords[slots[s]].y * sy;
      }
    }
    Rng rng(MixSeed(seed, p));
    const KMeansResult km =
        KMeans(points, k, rng, options.max_iterations, options.tolerance);

    std::vector<char> used(members.size(), 0);
    for (int j = 0; j < k; ++j) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int pass = 0; pass < 2 && best < 0; ++pass) {
        for (size_t i = 0; i < members.size(); ++i) {
          if (used[i] || (pass == 0 && km.assignment[i] != j)) continue;
          const double d = (points.row(i) - km.centroids.row(j)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
          }
        }
      }
      used[best] = 1;
      out.push_back(tokens[best]);
    }
  }
  return out;
}

}  // namespace mvm
