#include "mvmatch/core/sampling.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "mvmatch/core/check.h"

namespace mvm {
namespace {

bool IsPowerOfTwo(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Left sample index and fractional weight along one axis. With clamp the
// coordinate is limited to [0, n-1]; otherwise the last interval is extended
// linearly.
void AxisWeights(double v, int n, bool clamp, int* i0, int* i1, double* t) {
  if (n == 1) {
    *i0 = *i1 = 0;
    *t = 0.0;
    return;
  }
  if (clamp) {
    v = std::clamp(v, 0.0, static_cast<double>(n - 1));
    *i0 = std::min(static_cast<int>(std::floor(v)), n - 1);
    *i1 = std::min(*i0 + 1, n - 1);
  } else {
    *i0 = std::clamp(static_cast<int>(std::floor(v)), 0, n - 2);
    *i1 = *i0 + 1;
  }
  *t = v - *i0;
}

}  // namespace

void BilinearSampleInto(const FeatureGrid& grid, GridCoord at,
                        std::span<double> out) {
  MVM_CHECK(!grid.empty(), "empty grid");
  MVM_CHECK(out.size() == static_cast<size_t>(grid.channels()),
            "output size");
  int x0, x1, y0, y1;
  double tx, ty;
  AxisWeights(at.x, grid.width(), true, &x0, &x1, &tx);
  AxisWeights(at.y, grid.height(), true, &y0, &y1, &ty);
  const auto v00 = grid.Texel(y0, x0);
  const auto v01 = grid.Texel(y0, x1);
  const auto v10 = grid.Texel(y1, x0);
  const auto v11 = grid.Texel(y1, x1);
  const double w00 = (1.0 - tx) * (1.0 - ty);
  const double w01 = tx * (1.0 - ty);
  const double w10 = (1.0 - tx) * ty;
  const double w11 = tx * ty;
  for (size_t c = 0; c < out.size(); ++c) {
    if (tx == 0.0 && ty == 0.0) {
      out[c] = v00[c];
    } else {
      out[c] = w00 * v00[c] + w01 * v01[c] + w10 * v10[c] + w11 * v11[c];
    }
  }
}

std::vector<double> BilinearSample(const FeatureGrid& grid, GridCoord at) {
  MVM_CHECK(!grid.empty(), "empty grid");
  std::vector<double> out(grid.channels());
  BilinearSampleInto(grid, at, out);
  return out;
}

FeatureGrid WarpFeatures(const FeatureGrid& target,
                         const DenseWarpField& warp) {
  MVM_CHECK(warp.stride == target.stride(),
            "warp stride does not match target stride");
  MVM_CHECK(warp.targets.size() == warp.NumPixels(), "warp array length");
  FeatureGrid out(warp.height, warp.width, target.channels(), warp.stride);
  for (int r = 0; r < warp.height; ++r) {
    for (int c = 0; c < warp.width; ++c) {
      BilinearSampleInto(target, warp.targets[warp.Index(r, c)],
                         out.Texel(r, c));
    }
  }
  return out;
}

CorrelationVolume LocalCorrelation(const FeatureGrid& source,
                                   const FeatureGrid& target,
                                   const DenseWarpField& warp, int window) {
  MVM_CHECK(source.channels() == target.channels(), "channel mismatch");
  MVM_CHECK(window >= 1 && window % 2 == 1, "window must be odd");
  MVM_CHECK(source.height() == warp.height && source.width() == warp.width,
            "source and warp sizes differ");
  const int radius = window / 2;
  const int channels = source.channels();
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels));
  CorrelationVolume vol;
  vol.height = warp.height;
  vol.width = warp.width;
  vol.window = window;
  vol.scores.assign(warp.NumPixels() * window * window, 0.0);
  std::vector<double> sample(channels);
  for (int r = 0; r < warp.height; ++r) {
    for (int c = 0; c < warp.width; ++c) {
      const auto f = source.Texel(r, c);
      const GridCoord center = warp.targets[warp.Index(r, c)];
      double* dst = &vol.scores[warp.Index(r, c) * window * window];
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          BilinearSampleInto(target, {center.x + dx, center.y + dy}, sample);
          double dot = 0.0;
          for (int k = 0; k < channels; ++k) dot += f[k] * sample[k];
          *dst++ = dot * scale;
        }
      }
    }
  }
  return vol;
}

DenseWarpField UpsampleWarp(const DenseWarpField& warp, int factor) {
  MVM_CHECK(factor >= 2 && IsPowerOfTwo(factor),
            "factor must be a power of two >= 2");
  const int stride =
      warp.stride % factor == 0 ? warp.stride / factor : 1;
  DenseWarpField out(warp.height * factor, warp.width * factor, stride,
                     warp.source_view, warp.target_view);
  const double inv = 1.0 / factor;
  for (int r = 0; r < out.height; ++r) {
    const double cy = r * inv;
    int ey0, ey1, cy0, cy1;
    double ety, cty;
    AxisWeights(cy, warp.height, false, &ey0, &ey1, &ety);
    AxisWeights(cy, warp.height, true, &cy0, &cy1, &cty);
    for (int c = 0; c < out.width; ++c) {
      const double cx = c * inv;
      int ex0, ex1, cx0, cx1;
      double etx, ctx;
      AxisWeights(cx, warp.width, false, &ex0, &ex1, &etx);
      AxisWeights(cx, warp.width, true, &cx0, &cx1, &ctx);

      const GridCoord& a = warp.targets[warp.Index(ey0, ex0)];
      const GridCoord& b = warp.targets[warp.Index(ey0, ex1)];
      const GridCoord& d = warp.targets[warp.Index(ey1, ex0)];
      const GridCoord& e = warp.targets[warp.Index(ey1, ex1)];
      const double w00 = (1.0 - etx) * (1.0 - ety);
      const double w01 = etx * (1.0 - ety);
      const double w10 = (1.0 - etx) * ety;
      const double w11 = etx * ety;
      GridCoord t{w00 * a.x + w01 * b.x + w10 * d.x + w11 * e.x,
                  w00 * a.y + w01 * b.y + w10 * d.y + w11 * e.y};
      out.targets[out.Index(r, c)] = {t.x * factor, t.y * factor};

      const double p =
          (1.0 - ctx) * (1.0 - cty) * warp.confidence[warp.Index(cy0, cx0)] +
          ctx * (1.0 - cty) * warp.confidence[warp.Index(cy0, cx1)] +
          (1.0 - ctx) * cty * warp.confidence[warp.Index(cy1, cx0)] +
          ctx * cty * warp.confidence[warp.Index(cy1, cx1)];
      out.confidence[out.Index(r, c)] = std::clamp(p, 0.0, 1.0);
    }
  }
  return out;
}

DenseWarpField InvertWarp(const DenseWarpField& warp, int target_height,
                          int target_width, double min_confidence) {
  MVM_CHECK(target_height > 0 && target_width > 0, "target dims");
  DenseWarpField inv(target_height, target_width, warp.stride,
                     warp.target_view, warp.source_view);
  std::vector<double> best(inv.NumPixels(),
                           std::numeric_limits<double>::infinity());
  for (int r = 0; r < warp.height; ++r) {
    for (int c = 0; c < warp.width; ++c) {
      const size_t i = warp.Index(r, c);
      if (warp.confidence[i] <= min_confidence) continue;
      const GridCoord t = warp.targets[i];
      const int qx = static_cast<int>(std::lround(t.x));
      const int qy = static_cast<int>(std::lround(t.y));
      if (qx < 0 || qy < 0 || qx >= target_width || qy >= target_height) {
        continue;
      }
      const double dx = qx - t.x;
      const double dy = qy - t.y;
      const double d2 = dx * dx + dy * dy;
      const size_t j = inv.Index(qy, qx);
      if (d2 < best[j]) {
        best[j] = d2;
        inv.targets[j] = {c + dx, r + dy};
        inv.confidence[j] = warp.confidence[i];
      }
    }
  }

  // Breadth-first fill from splatted pixels, 4-neighborhood, raster seeding.
  std::vector<char> filled(inv.NumPixels(), 0);
  std::deque<size_t> queue;
  for (size_t j = 0; j < inv.NumPixels(); ++j) {
    if (std::isfinite(best[j])) {
      filled[j] = 1;
      queue.push_back(j);
    }
  }
  if (queue.empty()) {
    // Nothing maps into the target; fall back to identity with zero trust.
    for (int r = 0; r < target_height; ++r) {
      for (int c = 0; c < target_width; ++c) {
        inv.targets[inv.Index(r, c)] = {static_cast<double>(c),
                                        static_cast<double>(r)};
      }
    }
    return inv;
  }
  const int dr[4] = {-1, 0, 0, 1};
  const int dc[4] = {0, -1, 1, 0};
  while (!queue.empty()) {
    const size_t j = queue.front();
    queue.pop_front();
    const int r = static_cast<int>(j / target_width);
    const int c = static_cast<int>(j % target_width);
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k];
      const int nc = c + dc[k];
      if (nr < 0 || nc < 0 || nr >= target_height || nc >= target_width) {
        continue;
      }
      const size_t n = inv.Index(nr, nc);
      if (filled[n]) continue;
      filled[n] = 1;
      inv.targets[n] = inv.targets[j];
      inv.confidence[n] = 0.0;
      queue.push_back(n);
    }
  }
  return inv;
}

}  // namespace mvm
