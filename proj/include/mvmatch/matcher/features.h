#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/core/types.h"
#include "mvmatch/synth/scene.h"

namespace mvm {

enum class FeatureKind { kCoarse, kFine };

// Source of per-view feature grids. Repeated requests for the same view,
// stride and kind must return identical grids.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual FeatureGrid Features(int view, int stride, FeatureKind kind) const = 0;
  virtual bool HasStride(int stride, FeatureKind kind) const = 0;
  virtual int Channels(FeatureKind kind) const = 0;
  virtual int ImageHeight() const = 0;
  virtual int ImageWidth() const = 0;
};

struct OracleFeatureOptions {
  // Coarse: cos/sin pairs of random projections of the scene point with a
  // Gaussian kernel of the given width (pixels), peaky enough for global
  // matching.
  int coarse_frequencies = 32;
  double coarse_length_px = 8.0;
  int coarse_stride = 8;
  // Fine: cos/sin encodings along fixed directions at the given wavelengths
  // (base pixels, shared by every level) plus an optional texture patch.
  std::vector<double> fine_wavelengths = {96.0, 256.0};
  int patch_radius = 1;
  double patch_weight = 0.0;
  std::vector<int> fine_strides = {8, 4, 2, 1};
  uint64_t seed = 0;
};

// Hand-crafted features computed from the scene oracle: every channel is a
// function of the 3D surface point seen at a pixel, so corresponding pixels
// carry matching features. Pixels that see no surface get zero features.
class OracleFeatureProvider : public FeatureProvider {
 public:
  OracleFeatureProvider(const SceneOracle& scene,
                        const OracleFeatureOptions& options = {});

  FeatureGrid Features(int view, int stride, FeatureKind kind) const override;
  bool HasStride(int stride, FeatureKind kind) const override;
  int Channels(FeatureKind kind) const override;
  int ImageHeight() const override { return scene_.height(); }
  int ImageWidth() const override { return scene_.width(); }

 private:
  FeatureGrid Compute(int view, int stride, FeatureKind kind) const;

  const SceneOracle& scene_;
  OracleFeatureOptions options_;
  std::vector<Eigen::Vector3d> coarse_freqs_;
  std::vector<Eigen::Vector3d> fine_dirs_;
  mutable std::map<std::tuple<int, int, int>, FeatureGrid> cache_;
};

}  // namespace mvm
