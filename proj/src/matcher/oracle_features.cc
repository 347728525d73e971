#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"
#include "mvmatch/matcher/features.h"

namespace mvm {
namespace {

// Enough texels to cover the last pixel; the final texel may sit past it.
int GridSize(int pixels, int stride) {
  return (pixels - 1 + stride - 1) / stride + 1;
}

}  // namespace

OracleFeatureProvider::OracleFeatureProvider(const SceneOracle& scene,
                                             const OracleFeatureOptions& options)
    : scene_(scene), options_(options) {
  MVM_CHECK(options_.coarse_frequencies > 0, "coarse_frequencies must be > 0");
  MVM_CHECK(options_.coarse_length_px > 0.0, "coarse_length_px must be > 0");
  MVM_CHECK(options_.coarse_stride >= 1, "coarse_stride must be >= 1");
  MVM_CHECK(!options_.fine_wavelengths.empty(), "no fine wavelengths");
  MVM_CHECK(options_.patch_radius >= 0, "patch_radius must be >= 0");
  for (int s : options_.fine_strides) MVM_CHECK(s >= 1, "fine stride >= 1");

  const bool planar = scene_.kind() == SceneKind::kPlanar;
  const double length = options_.coarse_length_px * scene_.UnitsPerPixel();
  Rng rng(MixSeed(options_.seed, 101));
  for (int k = 0; k < options_.coarse_frequencies; ++k) {
    Eigen::Vector3d w(rng.Normal(), rng.Normal(), planar ? 0.0 : rng.Normal());
    coarse_freqs_.push_back(w / length);
  }
  if (planar) {
    for (int k = 0; k < 4; ++k) {
      const double a = k * std::numbers::pi / 4.0;
      fine_dirs_.emplace_back(std::cos(a), std::sin(a), 0.0);
    }
  } else {
    const double h = 1.0 / std::sqrt(2.0);
    fine_dirs_ = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                  {h, h, 0}, {h, 0, h}, {0, h, h}};
  }
}

bool OracleFeatureProvider::HasStride(int stride, FeatureKind kind) const {
  if (kind == FeatureKind::kCoarse) return stride == options_.coarse_stride;
  return std::find(options_.fine_strides.begin(), options_.fine_strides.end(),
                   stride) != options_.fine_strides.end();
}

int OracleFeatureProvider::Channels(FeatureKind kind) const {
  if (kind == FeatureKind::kCoarse) return 2 * options_.coarse_frequencies;
  const int side = 2 * options_.patch_radius + 1;
  return 2 * static_cast<int>(fine_dirs_.size() *
                              options_.fine_wavelengths.size()) +
         side * side;
}

FeatureGrid OracleFeatureProvider::Features(int view, int stride,
                                            FeatureKind kind) const {
  MVM_CHECK(view >= 0 && view < scene_.NumViews(), "view out of range");
  MVM_CHECK(HasStride(stride, kind), "stride not provided");
  const auto key = std::make_tuple(view, stride, static_cast<int>(kind));
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, Compute(view, stride, kind)).first;
  }
  return it->second;
}

FeatureGrid OracleFeatureProvider::Compute(int view, int stride,
                                           FeatureKind kind) const {
  const int h = GridSize(scene_.height(), stride);
  const int w = GridSize(scene_.width(), stride);
  const int channels = Channels(kind);
  FeatureGrid grid(h, w, channels, stride);
  const double upp = scene_.UnitsPerPixel();

  if (kind == FeatureKind::kCoarse) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(coarse_freqs_.size()));
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const auto x = scene_.SurfacePoint(view, grid.TexelCenter(r, c));
        if (!x) continue;
        auto out = grid.Texel(r, c);
        for (size_t k = 0; k < coarse_freqs_.size(); ++k) {
          const double phase = coarse_freqs_[k].dot(*x);
          out[2 * k] = scale * std::cos(phase);
          out[2 * k + 1] = scale * std::sin(phase);
        }
      }
    }
    return grid;
  }

  std::vector<Eigen::Vector3d> freqs;
  for (double wl : options_.fine_wavelengths) {
    for (const auto& d : fine_dirs_) {
      freqs.push_back(d * (2.0 * std::numbers::pi / (wl * upp)));
    }
  }
  const double enc_scale = 1.0 / std::sqrt(static_cast<double>(freqs.size()));
  const int radius = options_.patch_radius;
  const int side = 2 * radius + 1;
  const double patch_scale = options_.patch_weight / side;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const GridCoord p = grid.TexelCenter(r, c);
      const auto x = scene_.SurfacePoint(view, p);
      if (!x) continue;
      auto out = grid.Texel(r, c);
      for (size_t k = 0; k < freqs.size(); ++k) {
        const double phase = freqs[k].dot(*x);
        out[2 * k] = enc_scale * std::cos(phase);
        out[2 * k + 1] = enc_scale * std::sin(phase);
      }
      int ch = 2 * static_cast<int>(freqs.size());
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx, ++ch) {
          const auto xp = scene_.SurfacePoint(
              view, {p.x + stride * dx, p.y + stride * dy});
          out[ch] = xp ? patch_scale * scene_.Texture(*xp) : 0.0;
        }
      }
    }
  }
  return grid;
}

}  // namespace mvm
