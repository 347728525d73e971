#include "mvmatch/eval/homography.h"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"

namespace mvm {
namespace {

// Similarity moving the centroid to 0 and the mean distance to sqrt(2).
Eigen::Matrix3d NormalizingTransform(std::span<const PointPair> pairs,
                                     bool use_src) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const PointPair& p : pairs) mean += use_src ? p.src : p.dst;
  mean /= static_cast<double>(pairs.size());
  double dist = 0.0;
  for (const PointPair& p : pairs) dist += ((use_src ? p.src : p.dst) - mean).norm();
  dist /= static_cast<double>(pairs.size());
  if (!(dist > 0.0)) {
    throw DegenerateConfigurationError("DLT: coincident points");
  }
  const double s = std::sqrt(2.0) / dist;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * mean.x();
  t(1, 2) = -s * mean.y();
  return t;
}

Eigen::Vector2d Apply(const Eigen::Matrix3d& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  return q.hnormalized();
}

double TriangleArea(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a;
  const Eigen::Vector2d v = c - a;
  return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
}

bool SampleIsDegenerate(std::span<const PointPair> pairs,
                        const std::array<size_t, 4>& idx) {
  for (int skip = 0; skip < 4; ++skip) {
    std::array<size_t, 3> t;
    int n = 0;
    for (int k = 0; k < 4; ++k) {
      if (k != skip) t[n++] = idx[k];
    }
    if (TriangleArea(pairs[t[0]].src, pairs[t[1]].src, pairs[t[2]].src) < 1e-6 ||
        TriangleArea(pairs[t[0]].dst, pairs[t[1]].dst, pairs[t[2]].dst) < 1e-6) {
      return true;
    }
  }
  return false;
}

}  // namespace

Eigen::Matrix3d NormalizeHomography(const Eigen::Matrix3d& h) {
  if (std::abs(h(2, 2)) > 1e-12 * h.norm()) return h / h(2, 2);
  return h / h.norm();
}

Eigen::Matrix3d DltHomography(std::span<const PointPair> pairs) {
  MVM_CHECK(pairs.size() >= 4, "DLT needs at least 4 pairs");
  const Eigen::Matrix3d ts = NormalizingTransform(pairs, true);
  const Eigen::Matrix3d td = NormalizingTransform(pairs, false);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * pairs.size(), 9);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::Vector2d s = Apply(ts, pairs[i].src);
    const Eigen::Vector2d d = Apply(td, pairs[i].dst);
    const double x = s.x(), y = s.y(), u = d.x(), v = d.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() < 8 || sv(7) < 1e-9 * sv(0)) {
    throw DegenerateConfigurationError("DLT: rank below 8");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return NormalizeHomography(td.inverse() * hn * ts);
}

void TransferErrors(const Eigen::Matrix3d& h, const Eigen::Matrix3d& h_inv,
                    const PointPair& pair, double* forward, double* backward) {
  *forward = (Apply(h, pair.src) - pair.dst).norm();
  *backward = (Apply(h_inv, pair.dst) - pair.src).norm();
  if (!std::isfinite(*forward)) *forward = INFINITY;
  if (!std::isfinite(*backward)) *backward = INFINITY;
}

RansacResult RansacHomography(std::span<const PointPair> pairs,
                              const RansacOptions& options) {
  MVM_CHECK(pairs.size() >= 4, "RANSAC needs at least 4 pairs");
  MVM_CHECK(options.threshold > 0.0, "threshold");
  const size_t n = pairs.size();
  Rng rng(options.seed);

  auto consensus = [&](const Eigen::Matrix3d& h, std::vector<uint8_t>* mask) {
    const Eigen::Matrix3d h_inv = h.inverse();
    int count = 0;
    mask->assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
      double f, b;
      TransferErrors(h, h_inv, pairs[i], &f, &b);
      if (f <= options.threshold && b <= options.threshold) {
        (*mask)[i] = 1;
        ++count;
      }
    }
    return count;
  };

  RansacResult best;
  std::vector<uint8_t> mask;
  int needed = options.max_iterations;
  int iter = 0;
  for (; iter < options.max_iterations && iter < needed; ++iter) {
    std::array<size_t, 4> idx;
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = rng.UniformInt(n);
        fresh = true;
        for (int j = 0; j < k; ++j) fresh = fresh && idx[j] != idx[k];
      } while (!fresh);
    }
    if (SampleIsDegenerate(pairs, idx)) continue;
    const PointPair sample[4] = {pairs[idx[0]], pairs[idx[1]], pairs[idx[2]],
                                 pairs[idx[3]]};
    Eigen::Matrix3d h;
    try {
      h = DltHomography(sample);
    } catch (const DegenerateConfigurationError&) {
      continue;
    }
    if (!h.allFinite() || std::abs(h.determinant()) < 1e-12) continue;
    const int count = consensus(h, &mask);
    if (count > best.best_hypothesis_inliers) {
      best.best_hypothesis_inliers = count;
      best.homography = h;
      best.inliers = mask;
      if (options.adaptive) {
        const double w = static_cast<double>(count) / n;
        const double denom = std::log(1.0 - std::pow(w, 4));
        if (denom < 0.0) {
          const double k = std::log(1.0 - options.confidence) / denom;
          needed = static_cast<int>(std::min<double>(options.max_iterations,
                                                     std::ceil(k)));
        } else {
          needed = 0;
        }
      }
    }
  }
  best.iterations = iter;
  if (best.best_hypothesis_inliers < 4) {
    throw DegenerateConfigurationError("RANSAC: no model with 4 inliers");
  }
  std::vector<PointPair> support;
  for (size_t i = 0; i < n; ++i) {
    if (best.inliers[i]) support.push_back(pairs[i]);
  }
  try {
    const Eigen::Matrix3d refit = DltHomography(support);
    std::vector<uint8_t> refit_mask;
    const int refit_count = consensus(refit, &refit_mask);
    if (refit_count >= best.best_hypothesis_inliers) {
      best.homography = refit;
      best.inliers = std::move(refit_mask);
    }
  } catch (const DegenerateConfigurationError&) {
  }
  best.num_inliers = static_cast<int>(
      std::count(best.inliers.begin(), best.inliers.end(), 1));
  return best;
}

double CornerError(const Eigen::Matrix3d& estimated, const Eigen::Matrix3d& gt,
                   int height, int width) {
  const Eigen::Vector2d corners[4] = {{0.0, 0.0},
                                      {width - 1.0, 0.0},
                                      {0.0, height - 1.0},
                                      {width - 1.0, height - 1.0}};
  double sum = 0.0;
  for (const auto& c : corners) sum += (Apply(estimated, c) - Apply(gt, c)).norm();
  return sum / 4.0;
}

std::vector<double> CornerAucContribution(double error,
                                          std::span<const double> thresholds) {
  std::vector<double> out;
  for (double t : thresholds) {
    MVM_CHECK(t > 0.0, "threshold must be positive");
    out.push_back(std::isfinite(error) ? std::clamp(1.0 - error / t, 0.0, 1.0)
                                       : 0.0);
  }
  return out;
}

PoseErrorCurve PoseErrorCurve::FromErrors(std::vector<double> errors,
                                          std::vector<double> thresholds) {
  PoseErrorCurve curve;
  std::sort(errors.begin(), errors.end());
  curve.errors = std::move(errors);
  curve.thresholds = std::move(thresholds);
  curve.auc.assign(curve.thresholds.size(), 0.0);
  if (curve.errors.empty()) return curve;
  for (double e : curve.errors) {
    const auto c = CornerAucContribution(e, curve.thresholds);
    for (size_t k = 0; k < c.size(); ++k) curve.auc[k] += c[k];
  }
  for (double& a : curve.auc) a /= static_cast<double>(curve.errors.size());
  return curve;
}

std::vector<PointPair> BalancedMatchSample(const DenseWarpField& warp,
                                           int max_matches,
                                           double min_confidence,
                                           uint64_t seed) {
  MVM_CHECK(max_matches >= 1, "max_matches");
  constexpr int kBins = 10;
  std::vector<std::vector<size_t>> bins(kBins);
  const double span = std::max(1.0 - min_confidence, 1e-12);
  size_t total = 0;
  for (size_t i = 0; i < warp.NumPixels(); ++i) {
    const double c = warp.confidence[i];
    if (!(c > min_confidence)) continue;
    const int b = std::clamp(static_cast<int>((c - min_confidence) / span * kBins),
                             0, kBins - 1);
    bins[b].push_back(i);
    ++total;
  }
  std::vector<size_t> quota(kBins, 0);
  if (total <= static_cast<size_t>(max_matches)) {
    for (int b = 0; b < kBins; ++b) quota[b] = bins[b].size();
  } else {
    std::vector<double> rem(kBins, 0.0);
    size_t assigned = 0;
    for (int b = 0; b < kBins; ++b) {
      const double ideal = static_cast<double>(max_matches) * bins[b].size() / total;
      quota[b] = static_cast<size_t>(std::floor(ideal));
      rem[b] = ideal - quota[b];
      assigned += quota[b];
    }
    std::vector<int> order(kBins);
    for (int b = 0; b < kBins; ++b) order[b] = b;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return rem[a] > rem[b]; });
    for (int k = 0; assigned < static_cast<size_t>(max_matches) && k < kBins; ++k) {
      if (quota[order[k]] < bins[order[k]].size()) {
        ++quota[order[k]];
        ++assigned;
      }
    }
  }
  Rng rng(seed);
  std::vector<PointPair> out;
  for (int b = 0; b < kBins; ++b) {
    std::vector<size_t>& pool = bins[b];
    for (size_t k = 0; k < quota[b]; ++k) {
      const size_t j = k + rng.UniformInt(pool.size() - k);
      std::swap(pool[k], pool[j]);
      const size_t i = pool[k];
      const int r = static_cast<int>(i / warp.width);
      const int c = static_cast<int>(i % warp.width);
      out.push_back({Eigen::Vector2d(c, r),
                     Eigen::Vector2d(warp.targets[i].x, warp.targets[i].y)});
    }
  }
  return out;
}

WarpHomographyResult EstimateWarpHomography(
    const DenseWarpField& warp, const WarpHomographyOptions& options) {
  MVM_CHECK(warp.stride == 1, "homography evaluation needs a base warp");
  WarpHomographyResult out;
  const std::vector<PointPair> pairs =
      BalancedMatchSample(warp, options.max_matches, options.min_confidence,
                          options.ransac.seed);
  out.num_matches = static_cast<int>(pairs.size());
  if (pairs.size() < 4) {
    out.degenerate = true;
    return out;
  }
  try {
    const RansacResult r = RansacHomography(pairs, options.ransac);
    out.homography = r.homography;
    out.num_inliers = r.num_inliers;
  } catch (const DegenerateConfigurationError&) {
    out.degenerate = true;
  }
  return out;
}

}  // namespace mvm
