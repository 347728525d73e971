#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvm {

// Continuous pixel coordinate. Pixel centers sit at integer values and the
// origin is the center of the top-left pixel.
struct GridCoord {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const GridCoord&) const = default;
};

// Marker for a missing observation. Never passed to interpolation.
inline constexpr double kMissingCoord = -1.0;
inline constexpr GridCoord kMissing{kMissingCoord, kMissingCoord};

// Dense H x W x C feature map of one view at one pyramid stride. Texel
// (row, col) lies at base-resolution pixel (stride * col, stride * row).
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(int height, int width, int channels, int stride = 1);
  FeatureGrid(int height, int width, int channels, int stride,
              std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  int stride() const { return stride_; }
  bool empty() const { return data_.empty(); }
  size_t NumTexels() const { return static_cast<size_t>(height_) * width_; }

  double& At(int row, int col, int ch) {
    return data_[(static_cast<size_t>(row) * width_ + col) * channels_ + ch];
  }
  double At(int row, int col, int ch) const {
    return data_[(static_cast<size_t>(row) * width_ + col) * channels_ + ch];
  }
  std::span<double> Texel(int row, int col) {
    return {data_.data() + (static_cast<size_t>(row) * width_ + col) * channels_,
            static_cast<size_t>(channels_)};
  }
  std::span<const double> Texel(int row, int col) const {
    return {data_.data() + (static_cast<size_t>(row) * width_ + col) * channels_,
            static_cast<size_t>(channels_)};
  }

  // Base-resolution position of a texel.
  GridCoord TexelCenter(int row, int col) const {
    return {static_cast<double>(stride_) * col,
            static_cast<double>(stride_) * row};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // Throws if the data length is inconsistent or any value is non-finite.
  void Validate() const;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  int stride_ = 1;
  std::vector<double> data_;
};

// Per-pixel source -> target coordinates plus confidence. The grid has the
// resolution of its pyramid level and targets are expressed in target-image
// pixels of the same level.
struct DenseWarpField {
  int height = 0;
  int width = 0;
  int stride = 1;
  int source_view = 0;
  int target_view = 1;
  std::vector<GridCoord> targets;
  std::vector<double> confidence;

  DenseWarpField() = default;
  DenseWarpField(int height, int width, int stride, int source_view,
                 int target_view);

  static DenseWarpField Identity(int height, int width, int stride = 1,
                                 int source_view = 0, int target_view = 1);

  size_t Index(int row, int col) const {
    return static_cast<size_t>(row) * width + col;
  }
  size_t NumPixels() const { return static_cast<size_t>(height) * width; }

  void Validate() const;
};

// window x window similarity scores per source pixel. Offsets run over
// dy, dx in [-r, r] with r = window / 2, dy major.
struct CorrelationVolume {
  int height = 0;
  int width = 0;
  int window = 1;
  std::vector<double> scores;

  double At(int row, int col, int dy, int dx) const {
    const int r = window / 2;
    return scores[(static_cast<size_t>(row) * width + col) * window * window +
                  static_cast<size_t>(dy + r) * window + (dx + r)];
  }
};

// One source image jointly matched against an ordered list of targets.
struct ImageGroup {
  int source = 0;
  std::vector<int> targets;

  // Source first, then targets. Slot s of a track refers to Views()[s].
  std::vector<int> Views() const;
  int NumViews() const { return 1 + static_cast<int>(targets.size()); }

  void Validate() const;
  bool operator==(const ImageGroup&) const = default;
};

}  // namespace mvm
