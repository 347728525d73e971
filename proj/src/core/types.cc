#include "mvmatch/core/types.h"

#include <cmath>
#include <set>

#include "mvmatch/core/check.h"

namespace mvm {

FeatureGrid::FeatureGrid(int height, int width, int channels, int stride)
    : height_(height), width_(width), channels_(channels), stride_(stride) {
  MVM_CHECK(height > 0 && width > 0 && channels > 0, "grid dims");
  MVM_CHECK(stride > 0 && (stride & (stride - 1)) == 0,
            "stride must be a power of two");
  data_.assign(static_cast<size_t>(height) * width * channels, 0.0);
}

FeatureGrid::FeatureGrid(int height, int width, int channels, int stride,
                         std::vector<double> data)
    : FeatureGrid(height, width, channels, stride) {
  MVM_CHECK(data.size() == data_.size(), "data length");
  data_ = std::move(data);
}

void FeatureGrid::Validate() const {
  MVM_CHECK(data_.size() == NumTexels() * channels_, "data length");
  for (double v : data_) MVM_CHECK(std::isfinite(v), "non-finite feature");
}

DenseWarpField::DenseWarpField(int height, int width, int stride,
                               int source_view, int target_view)
    : height(height),
      width(width),
      stride(stride),
      source_view(source_view),
      target_view(target_view),
      targets(static_cast<size_t>(height) * width),
      confidence(static_cast<size_t>(height) * width, 0.0) {
  MVM_CHECK(height > 0 && width > 0, "warp dims");
  MVM_CHECK(stride > 0, "stride");
}

DenseWarpField DenseWarpField::Identity(int height, int width, int stride,
                                        int source_view, int target_view) {
  DenseWarpField warp(height, width, stride, source_view, target_view);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      warp.targets[warp.Index(r, c)] = {static_cast<double>(c),
                                        static_cast<double>(r)};
      warp.confidence[warp.Index(r, c)] = 1.0;
    }
  }
  return warp;
}

void DenseWarpField::Validate() const {
  MVM_CHECK(height > 0 && width > 0, "warp dims");
  MVM_CHECK(targets.size() == NumPixels() && confidence.size() == NumPixels(),
            "warp array length");
  MVM_CHECK(source_view != target_view, "source_view == target_view");
  for (size_t i = 0; i < NumPixels(); ++i) {
    MVM_CHECK(std::isfinite(targets[i].x) && std::isfinite(targets[i].y),
              "non-finite target");
    MVM_CHECK(confidence[i] >= 0.0 && confidence[i] <= 1.0,
              "confidence outside [0,1]");
  }
}

std::vector<int> ImageGroup::Views() const {
  std::vector<int> views;
  views.reserve(targets.size() + 1);
  views.push_back(source);
  views.insert(views.end(), targets.begin(), targets.end());
  return views;
}

void ImageGroup::Validate() const {
  std::set<int> seen;
  for (int t : targets) {
    MVM_CHECK(t != source, "source listed as target");
    MVM_CHECK(seen.insert(t).second, "duplicate target");
  }
}

}  // namespace mvm
