#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "mvmatch/attention/attention.h"
#include "mvmatch/attention/mvfuse.h"
#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"
#include "mvmatch/core/sampling.h"
#include "mvmatch/matcher/matcher.h"

namespace mvm {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd Gaussian(int rows, int cols, double stddev, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = stddev * rng.Normal();
  }
  return m;
}

// Concatenates source features, aligned target features and correlation
// scores into an HW x C_in matrix.
RowMatrix StackInputs(const FeatureGrid& source, const FeatureGrid& aligned,
                      const CorrelationVolume& corr) {
  const int n = static_cast<int>(source.NumTexels());
  const int ws = corr.window * corr.window;
  const int cin = source.channels() + aligned.channels() + ws;
  RowMatrix x(n, cin);
  for (int i = 0; i < n; ++i) {
    int k = 0;
    for (int c = 0; c < source.channels(); ++c) {
      x(i, k++) = source.data()[static_cast<size_t>(i) * source.channels() + c];
    }
    for (int c = 0; c < aligned.channels(); ++c) {
      x(i, k++) =
          aligned.data()[static_cast<size_t>(i) * aligned.channels() + c];
    }
    for (int c = 0; c < ws; ++c) {
      x(i, k++) = corr.scores[static_cast<size_t>(i) * ws + c];
    }
  }
  return x;
}

FeatureGrid ApplyConvStack(const RowMatrix& x, const ConvStack& f, int height,
                           int width, int stride) {
  const int hidden = static_cast<int>(f.w1.cols());
  MVM_CHECK(x.cols() == f.w1.rows(), "conv stack input channels");
  RowMatrix a = ((x * f.w1).rowwise() + f.b1).cwiseMax(0.0);
  RowMatrix cols = RowMatrix::Zero(x.rows(), 9 * hidden);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int i = r * width + c;
      int tap = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx, ++tap) {
          const int rr = r + dy;
          const int cc = c + dx;
          if (rr < 0 || cc < 0 || rr >= height || cc >= width) continue;
          cols.block(i, tap * hidden, 1, hidden) = a.row(rr * width + cc);
        }
      }
    }
  }
  RowMatrix h = ((cols * f.w2).rowwise() + f.b2).cwiseMax(0.0);
  FeatureGrid out(height, width, hidden, stride);
  Eigen::Map<RowMatrix>(out.data().data(), height * width, hidden) = h;
  return out;
}

// Residual confidence: feature mismatch at the warp target divided by the
// local target feature gradient gives an error estimate in level pixels.
double ResidualConfidence(const FeatureGrid& source, const FeatureGrid& target,
                          int row, int col, GridCoord at, int stride,
                          double sigma_px) {
  const auto f0 = source.Texel(row, col);
  double norm0 = 0.0;
  for (double v : f0) norm0 += v * v;
  if (norm0 == 0.0) return 0.0;
  if (at.x < 0.0 || at.y < 0.0 || at.x > target.width() - 1.0 ||
      at.y > target.height() - 1.0) {
    return 0.0;
  }
  const int ch = target.channels();
  std::vector<double> fc(ch), xp(ch), xm(ch), yp(ch), ym(ch);
  BilinearSampleInto(target, at, fc);
  BilinearSampleInto(target, {at.x + 1.0, at.y}, xp);
  BilinearSampleInto(target, {at.x - 1.0, at.y}, xm);
  BilinearSampleInto(target, {at.x, at.y + 1.0}, yp);
  BilinearSampleInto(target, {at.x, at.y - 1.0}, ym);
  double res = 0.0, gx = 0.0, gy = 0.0;
  for (int k = 0; k < ch; ++k) {
    res += (f0[k] - fc[k]) * (f0[k] - fc[k]);
    gx += 0.25 * (xp[k] - xm[k]) * (xp[k] - xm[k]);
    gy += 0.25 * (yp[k] - ym[k]) * (yp[k] - ym[k]);
  }
  const double grad = std::sqrt(0.5 * (gx + gy));
  if (grad <= 1e-12) return 0.0;
  const double err_px = std::sqrt(res) / grad * stride;
  return std::exp(-err_px * err_px / (2.0 * sigma_px * sigma_px));
}

// Peak-search window sampled at exact target texels around the nearest
// texel to each warp target; the window is shifted to stay inside the grid.
struct TexelWindow {
  CorrelationVolume vol;
  std::vector<GridCoord> centers;  // integer window centers per pixel
};

TexelWindow TexelCorrelation(const FeatureGrid& source,
                             const FeatureGrid& target,
                             const DenseWarpField& warp, int window) {
  const int radius = window / 2;
  const int channels = source.channels();
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels));
  TexelWindow out;
  out.vol.height = warp.height;
  out.vol.width = warp.width;
  out.vol.window = window;
  out.vol.scores.assign(warp.NumPixels() * window * window, kMaskedLogit);
  out.centers.resize(warp.NumPixels());
  auto center = [&](double v, int n) {
    const int c = static_cast<int>(std::lround(std::clamp(v, 0.0, n - 1.0)));
    return n > window - 1 ? std::clamp(c, radius, n - 1 - radius) : c;
  };
  for (int r = 0; r < warp.height; ++r) {
    for (int c = 0; c < warp.width; ++c) {
      const size_t i = warp.Index(r, c);
      const int cx = center(warp.targets[i].x, target.width());
      const int cy = center(warp.targets[i].y, target.height());
      out.centers[i] = {static_cast<double>(cx), static_cast<double>(cy)};
      const auto f = source.Texel(r, c);
      double* dst = &out.vol.scores[i * window * window];
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx, ++dst) {
          const int x = cx + dx;
          const int y = cy + dy;
          if (x < 0 || y < 0 || x >= target.width() || y >= target.height()) {
            continue;
          }
          const auto g = target.Texel(y, x);
          double dot = 0.0;
          for (int k = 0; k < channels; ++k) dot += f[k] * g[k];
          *dst = dot * scale;
        }
      }
    }
  }
  return out;
}

struct PairOutput {
  FeatureGrid hidden;
  CorrelationVolume corr;
  TexelWindow peak;
};

PairOutput EncodePair(const FeatureGrid& source, const FeatureGrid& target,
                      const FeatureGrid& aligned, const DenseWarpField& warp,
                      const LevelParams& level) {
  PairOutput out;
  out.corr = LocalCorrelation(source, target, warp, level.window);
  out.hidden = ApplyConvStack(StackInputs(source, aligned, out.corr), level.f,
                              source.height(), source.width(), level.stride);
  out.peak = TexelCorrelation(source, target, warp, level.window);
  return out;
}

DenseWarpField ApplyHead(const FeatureGrid& source, const FeatureGrid& target,
                         const DenseWarpField& warp, const PairOutput& pair,
                         const FeatureGrid& hidden, const LevelParams& level,
                         const MatcherConfig& config) {
  DenseWarpField out = warp;
  const int n = static_cast<int>(hidden.NumTexels());
  Eigen::Map<const RowMatrix> h(hidden.data().data(), n, hidden.channels());
  const RowMatrix learned = (h * level.head_w).rowwise() + level.head_b;
  for (int r = 0; r < warp.height; ++r) {
    for (int c = 0; c < warp.width; ++c) {
      const size_t i = warp.Index(r, c);
      GridCoord t = warp.targets[i];
      if (config.correlation_head) {
        const Eigen::Vector2d peak = CorrelationPeak(pair.peak.vol, r, c);
        t = {pair.peak.centers[i].x + peak.x(),
             pair.peak.centers[i].y + peak.y()};
      }
      t.x += learned(i, 0);
      t.y += learned(i, 1);
      out.targets[i] = t;
      const double p = ResidualConfidence(source, target, r, c, t,
                                          level.stride,
                                          config.confidence_sigma_px);
      out.confidence[i] = std::clamp(p + learned(i, 2), 0.0, 1.0);
    }
  }
  return out;
}

// Bilinear upsampling of a warp to a finer stride, cropped to height x width.
// Neighbor texels with confidence below min_conf are left out and the rest
// predict the target through an identity offset; with every neighbor kept
// this is plain bilinear interpolation.
DenseWarpField ToLevel(const DenseWarpField& warp, int from, int to,
                       int height, int width, double min_conf) {
  if (from == to) return warp;
  const int f = from / to;
  MVM_CHECK((height - 1) <= (warp.height - 1) * f &&
                (width - 1) <= (warp.width - 1) * f,
            "level grid extends past the coarse warp");
  DenseWarpField out(height, width, to, warp.source_view, warp.target_view);
  for (int r = 0; r < height; ++r) {
    const double y = static_cast<double>(r) / f;
    const int y0 = std::min(static_cast<int>(y), std::max(warp.height - 2, 0));
    const int y1 = std::min(y0 + 1, warp.height - 1);
    const double ty = y - y0;
    for (int c = 0; c < width; ++c) {
      const double x = static_cast<double>(c) / f;
      const int x0 = std::min(static_cast<int>(x), std::max(warp.width - 2, 0));
      const int x1 = std::min(x0 + 1, warp.width - 1);
      const double tx = x - x0;
      const int ys[4] = {y0, y0, y1, y1};
      const int xs[4] = {x0, x1, x0, x1};
      const double b[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty,
                           tx * ty};
      double all_x = 0.0, all_y = 0.0, conf = 0.0;
      double kept_x = 0.0, kept_y = 0.0, kept_w = 0.0;
      for (int k = 0; k < 4; ++k) {
        const size_t i = warp.Index(ys[k], xs[k]);
        const GridCoord t = warp.targets[i];
        all_x += b[k] * t.x;
        all_y += b[k] * t.y;
        conf += b[k] * warp.confidence[i];
        if (b[k] > 0.0 && warp.confidence[i] >= min_conf) {
          kept_x += b[k] * (t.x + x - xs[k]);
          kept_y += b[k] * (t.y + y - ys[k]);
          kept_w += b[k];
        }
      }
      GridCoord t{all_x, all_y};
      if (kept_w > 0.0) t = {kept_x / kept_w, kept_y / kept_w};
      out.targets[out.Index(r, c)] = {t.x * f, t.y * f};
      out.confidence[out.Index(r, c)] = std::clamp(conf, 0.0, 1.0);
    }
  }
  return out;
}

void CheckGridMatchesWarp(const FeatureGrid& grid, const DenseWarpField& w) {
  MVM_CHECK(grid.height() == w.height && grid.width() == w.width,
            "feature grid and warp sizes differ");
}

}  // namespace

MatcherParams BuildMatcherParams(const MatcherConfig& config) {
  MVM_CHECK(config.fine_channels > 0, "fine_channels must be > 0");
  MVM_CHECK(config.coarse_channels > 0, "coarse_channels must be > 0");
  MVM_CHECK(config.hidden > 0, "hidden must be > 0");
  MVM_CHECK(!config.strides.empty(), "no refinement strides");
  MVM_CHECK(config.windows.size() == config.strides.size(),
            "one window per stride");
  MVM_CHECK(config.mvfuse_iterations >= 0, "mvfuse_iterations >= 0");
  MVM_CHECK(config.inverse_temperature > 0.0, "inverse_temperature > 0");
  MVM_CHECK(config.confidence_sigma_px > 0.0, "confidence_sigma_px > 0");
  MVM_CHECK(config.output_upsample >= 1, "output_upsample >= 1");
  MVM_CHECK(config.passes_per_level >= 1, "passes_per_level >= 1");
  int prev = config.coarse_stride;
  for (size_t i = 0; i < config.strides.size(); ++i) {
    const int s = config.strides[i];
    MVM_CHECK(s >= 1 && prev % s == 0 && (prev / s & (prev / s - 1)) == 0,
              "strides must descend by powers of two from the coarse stride");
    MVM_CHECK(config.windows[i] >= 1 && config.windows[i] % 2 == 1,
              "windows must be odd");
    prev = s;
  }

  MatcherParams params;
  params.config = config;
  params.exchange = TrackAttentionParams::Random(
      config.coarse_channels, config.coarse_stride, MixSeed(config.seed, 1));
  params.exchange.splatting.w_out *= config.exchange_out_scale;

  const int hdim = config.hidden;
  for (size_t i = 0; i < config.strides.size(); ++i) {
    Rng rng(MixSeed(config.seed, 100 + i));
    LevelParams level;
    level.stride = config.strides[i];
    level.window = config.windows[i];
    level.mvfuse =
        std::find(config.mvfuse_strides.begin(), config.mvfuse_strides.end(),
                  level.stride) != config.mvfuse_strides.end();
    const int cin = 2 * config.fine_channels + level.window * level.window;
    level.f.w1 = Gaussian(cin, hdim, 1.0 / std::sqrt(cin), rng);
    level.f.b1 = Eigen::RowVectorXd::Zero(hdim);
    level.f.w2 = Gaussian(9 * hdim, hdim, 1.0 / std::sqrt(9.0 * hdim), rng);
    level.f.b2 = Eigen::RowVectorXd::Zero(hdim);
    level.head_w = Gaussian(hdim, 3, config.learned_head_scale / std::sqrt(hdim),
                            rng);
    level.head_b = Eigen::RowVectorXd::Zero(3);
    level.fuse = MVFuseParams::Random(hdim, hdim * config.mvfuse_expansion,
                                      MixSeed(config.seed, 200 + i));
    params.levels.push_back(std::move(level));
  }
  return params;
}

Eigen::Vector2d CorrelationPeak(const CorrelationVolume& vol, int row,
                                int col) {
  const int r = vol.window / 2;
  int by = 0, bx = 0;
  double best = vol.At(row, col, 0, 0);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double v = vol.At(row, col, dy, dx);
      if (v > best) {
        best = v;
        by = dy;
        bx = dx;
      }
    }
  }
  const Eigen::Vector2d peak(bx, by);
  if (best <= kMaskedLogit || r == 0) return peak;

  // Quadratic fit on the 3x3 block around the peak, moved inward when the
  // peak sits on the window edge.
  const int fx = std::clamp(bx, -r + 1, r - 1);
  const int fy = std::clamp(by, -r + 1, r - 1);
  auto at = [&](int y, int x) { return vol.At(row, col, fy + y, fx + x); };
  for (int y = -1; y <= 1; ++y) {
    for (int x = -1; x <= 1; ++x) {
      if (at(y, x) <= kMaskedLogit) return peak;
    }
  }
  const double c0 = at(0, 0);
  const double gx = 0.5 * (at(0, 1) - at(0, -1));
  const double gy = 0.5 * (at(1, 0) - at(-1, 0));
  const double hxx = at(0, 1) - 2.0 * c0 + at(0, -1);
  const double hyy = at(1, 0) - 2.0 * c0 + at(-1, 0);
  const double hxy = 0.25 * (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1));
  const double det = hxx * hyy - hxy * hxy;
  if (hxx < 0.0 && det > 0.0) {
    const Eigen::Vector2d vertex(fx + (-gx * hyy + gy * hxy) / det,
                                 fy + (-gy * hxx + gx * hxy) / det);
    if ((vertex - peak).cwiseAbs().maxCoeff() <= 1.0) return vertex;
  }
  return peak;
}

FeatureGrid SplatFeatures(const FeatureGrid& target,
                          const DenseWarpField& target_to_source,
                          int source_height, int source_width) {
  const DenseWarpField& w = target_to_source;
  CheckGridMatchesWarp(target, w);
  const int ch = target.channels();
  FeatureGrid out(source_height, source_width, ch, target.stride());
  std::vector<double> weight(out.NumTexels(), 0.0);
  for (int r = 0; r < w.height; ++r) {
    for (int c = 0; c < w.width; ++c) {
      const size_t i = w.Index(r, c);
      if (w.confidence[i] <= 0.0) continue;
      const GridCoord q = w.targets[i];
      const int x0 = static_cast<int>(std::floor(q.x));
      const int y0 = static_cast<int>(std::floor(q.y));
      const double tx = q.x - x0;
      const double ty = q.y - y0;
      const auto f = target.Texel(r, c);
      for (int k = 0; k < 4; ++k) {
        const int x = x0 + (k & 1);
        const int y = y0 + (k >> 1);
        if (x < 0 || y < 0 || x >= source_width || y >= source_height) {
          continue;
        }
        const double a = ((k & 1) ? tx : 1.0 - tx) * ((k >> 1) ? ty : 1.0 - ty);
        if (a <= 0.0) continue;
        auto dst = out.Texel(y, x);
        for (int j = 0; j < ch; ++j) dst[j] += a * f[j];
        weight[static_cast<size_t>(y) * source_width + x] += a;
      }
    }
  }
  for (int y = 0; y < source_height; ++y) {
    for (int x = 0; x < source_width; ++x) {
      const double a = weight[static_cast<size_t>(y) * source_width + x];
      if (a <= 1e-12) continue;
      for (double& v : out.Texel(y, x)) v /= a;
    }
  }
  return out;
}

RefinerState RefineLevel(const RefinerState& state, const ImageGroup& group,
                         const FeatureProvider& provider,
                         const MatcherParams& params,
                         const LevelParams& level) {
  const MatcherConfig& cfg = params.config;
  const int s = level.stride;
  MVM_CHECK(state.stride % s == 0, "level stride must divide state stride");
  MVM_CHECK(state.warps.size() == group.targets.size(),
            "one warp per target");
  const bool reverse = cfg.alignment == AlignmentMode::kReversePass;
  MVM_CHECK(!reverse || state.reverse_warps.size() == group.targets.size(),
            "reverse-pass alignment needs reverse warps");

  const FeatureGrid src = provider.Features(group.source, s, FeatureKind::kFine);
  const size_t k_targets = group.targets.size();
  RefinerState next;
  next.stride = s;
  std::vector<FeatureGrid> targets(k_targets);
  std::vector<DenseWarpField> warps(k_targets);
  std::vector<PairOutput> pairs(k_targets);
  for (size_t k = 0; k < k_targets; ++k) {
    targets[k] = provider.Features(group.targets[k], s, FeatureKind::kFine);
    warps[k] = ToLevel(state.warps[k], state.stride, s, src.height(),
                       src.width(), cfg.upsample_min_confidence);
    CheckGridMatchesWarp(src, warps[k]);

    FeatureGrid aligned;
    if (level.mvfuse && cfg.alignment == AlignmentMode::kInverseWarp) {
      const DenseWarpField back =
          InvertWarp(warps[k], targets[k].height(), targets[k].width(),
                  cfg.upsample_min_confidence);
      aligned = SplatFeatures(targets[k], back, src.height(), src.width());
    } else if (level.mvfuse && reverse) {
      const DenseWarpField back =
          ToLevel(state.reverse_warps[k], state.stride, s,
                  targets[k].height(), targets[k].width(),
                  cfg.upsample_min_confidence);
      aligned = SplatFeatures(targets[k], back, src.height(), src.width());
    } else {
      aligned = WarpFeatures(targets[k], warps[k]);
    }
    pairs[k] = EncodePair(src, targets[k], aligned, warps[k], level);
  }

  std::vector<FeatureGrid> hidden(k_targets);
  for (size_t k = 0; k < k_targets; ++k) hidden[k] = pairs[k].hidden;
  if (level.mvfuse && k_targets > 0) {
    hidden = MVFuse(std::move(hidden), level.fuse, cfg.mvfuse_iterations);
  }

  for (size_t k = 0; k < k_targets; ++k) {
    next.warps.push_back(ApplyHead(src, targets[k], warps[k], pairs[k],
                                   hidden[k], level, cfg));
  }
  next.hidden = std::move(hidden);

  if (reverse) {
    // Pairwise refinement of the target -> source direction, no fusion.
    for (size_t k = 0; k < k_targets; ++k) {
      const DenseWarpField back =
          ToLevel(state.reverse_warps[k], state.stride, s,
                  targets[k].height(), targets[k].width(),
                  cfg.upsample_min_confidence);
      CheckGridMatchesWarp(targets[k], back);
      const FeatureGrid aligned = WarpFeatures(src, back);
      const PairOutput pair =
          EncodePair(targets[k], src, aligned, back, level);
      next.reverse_warps.push_back(
          ApplyHead(targets[k], src, back, pair, pair.hidden, level, cfg));
    }
  }
  return next;
}

}  // namespace mvm
