#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "mvmatch/core/check.h"
#include "mvmatch/core/sampling.h"
#include "mvmatch/matcher/matcher.h"

namespace mvm {

AnchorGrid AnchorGrid::ForGrid(int height, int width) {
  MVM_CHECK(height > 0 && width > 0, "anchor grid dims");
  AnchorGrid g;
  g.rows = height;
  g.cols = width;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      g.centers.push_back({static_cast<double>(c), static_cast<double>(r)});
    }
  }
  return g;
}

AnchorGrid AnchorGrid::Uniform(int rows, int cols, int height, int width) {
  MVM_CHECK(rows > 0 && cols > 0 && height > 0 && width > 0,
            "anchor grid dims");
  AnchorGrid g;
  g.rows = rows;
  g.cols = cols;
  const double sy = rows > 1 ? (height - 1.0) / (rows - 1) : 0.0;
  const double sx = cols > 1 ? (width - 1.0) / (cols - 1) : 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) g.centers.push_back({c * sx, r * sy});
  }
  return g;
}

DenseWarpField GlobalMatch(const FeatureGrid& src, const FeatureGrid& tgt,
                           const AnchorGrid& anchors,
                           const GlobalMatchOptions& options) {
  MVM_CHECK(src.channels() == tgt.channels(), "channel mismatch");
  MVM_CHECK(src.stride() == tgt.stride(), "stride mismatch");
  MVM_CHECK(!anchors.centers.empty(), "no anchors");
  const int d = src.channels();
  const int n = static_cast<int>(src.NumTexels());
  const int a = static_cast<int>(anchors.centers.size());

  Eigen::MatrixXd fs = Eigen::Map<const Eigen::Matrix<
      double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      src.data().data(), n, d);
  Eigen::MatrixXd fa(a, d);
  std::vector<double> sample(d);
  for (int j = 0; j < a; ++j) {
    BilinearSampleInto(tgt, anchors.centers[j], sample);
    for (int k = 0; k < d; ++k) fa(j, k) = sample[k];
  }
  Eigen::MatrixXd logits =
      (fs * fa.transpose()) * (options.inverse_temperature / std::sqrt(d));

  DenseWarpField warp(src.height(), src.width(), src.stride(), 0, 1);
  for (int i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (int j = 0; j < a; ++j) {
      logits(i, j) = std::exp(logits(i, j) - mx);
      sum += logits(i, j);
    }
    double x = 0.0, y = 0.0, peak = 0.0;
    for (int j = 0; j < a; ++j) {
      const double p = logits(i, j) / sum;
      x += p * anchors.centers[j].x;
      y += p * anchors.centers[j].y;
      peak = std::max(peak, p);
    }
    warp.targets[i] = {x, y};
    warp.confidence[i] = peak;
  }
  return warp;
}

}  // namespace mvm
