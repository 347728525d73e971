#include "mvmatch/attention/attention.h"

#include <algorithm>
#include <cmath>

#include "mvmatch/core/check.h"

namespace mvm {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> Flatten(const FeatureGrid& grid) {
  return {grid.data().data(), static_cast<Eigen::Index>(grid.NumTexels()),
          grid.channels()};
}

std::vector<GridCoord> GridCenters(const FeatureGrid& grid) {
  std::vector<GridCoord> centers;
  centers.reserve(grid.NumTexels());
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) centers.push_back(grid.TexelCenter(r, c));
  }
  return centers;
}

}  // namespace

Eigen::MatrixXd SpatialBias(std::span<const GridCoord> coords, int height,
                            int width, int stride, double sigma) {
  MVM_CHECK(sigma > 0.0, "sigma must be positive");
  MVM_CHECK(height > 0 && width > 0 && stride > 0, "grid size");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd bias(coords.size(), static_cast<Eigen::Index>(height) * width);
  for (size_t i = 0; i < coords.size(); ++i) {
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double dx = coords[i].x - static_cast<double>(stride) * c;
        const double dy = coords[i].y - static_cast<double>(stride) * r;
        bias(i, r * width + c) = -(dx * dx + dy * dy) * inv;
      }
    }
  }
  return bias;
}

Eigen::MatrixXd NormalizeCoords(std::span<const GridCoord> coords, int height,
                                int width, int stride) {
  const double sx = 1.0 / (stride * std::max(width - 1, 1));
  const double sy = 1.0 / (stride * std::max(height - 1, 1));
  Eigen::MatrixXd out(coords.size(), 2);
  for (size_t i = 0; i < coords.size(); ++i) {
    out(i, 0) = coords[i].x * sx;
    out(i, 1) = coords[i].y * sy;
  }
  return out;
}

Eigen::MatrixXd QueryEmbedding(const Eigen::MatrixXd& normalized,
                               const AttentionParams& params) {
  MVM_CHECK(normalized.cols() == 2, "query input must be n x 2");
  Eigen::MatrixXd hidden = (normalized * params.mlp_w1).rowwise() + params.mlp_b1;
  hidden = hidden.cwiseMax(0.0);
  return (hidden * params.mlp_w2).rowwise() + params.mlp_b2;
}

void MaskedRowSoftmax(Eigen::MatrixXd* logits,
                      std::span<const uint8_t> column_mask) {
  const bool masked = !column_mask.empty();
  if (masked) {
    MVM_CHECK(column_mask.size() == static_cast<size_t>(logits->cols()),
              "mask length");
  }
  for (Eigen::Index r = 0; r < logits->rows(); ++r) {
    auto row = logits->row(r);
    if (masked) {
      for (Eigen::Index c = 0; c < row.size(); ++c) {
        if (!column_mask[c]) row(c) = kMaskedLogit;
      }
    }
    const double max = row.maxCoeff();
    row = (row.array() - max).exp();
    row /= row.sum();
    if (masked) {
      for (Eigen::Index c = 0; c < row.size(); ++c) {
        if (!column_mask[c]) row(c) = 0.0;
      }
    }
  }
}

Eigen::MatrixXd AttentionalSamplingWeights(const FeatureGrid& grid,
                                           std::span<const GridCoord> coords,
                                           const AttentionParams& params) {
  MVM_CHECK(grid.channels() == params.dim, "feature dim mismatch");
  const Eigen::MatrixXd q = QueryEmbedding(
      NormalizeCoords(coords, grid.height(), grid.width(), grid.stride()),
      params);
  const Eigen::MatrixXd k = Flatten(grid) * params.w_key;
  Eigen::MatrixXd logits = q * k.transpose() / std::sqrt(static_cast<double>(params.dim));
  logits += SpatialBias(coords, grid.height(), grid.width(), grid.stride(),
                        params.sigma);
  MaskedRowSoftmax(&logits);
  return logits;
}

Eigen::MatrixXd AttentionalSampling(const FeatureGrid& grid,
                                    std::span<const GridCoord> coords,
                                    const AttentionParams& params) {
  const Eigen::MatrixXd w = AttentionalSamplingWeights(grid, coords, params);
  return w * (Flatten(grid) * params.w_value);
}

Eigen::MatrixXd TrackTransformerWeights(const TrackFeatures& feats,
                                        const AttentionParams& params,
                                        int track) {
  const int num_views = feats.NumViews();
  const auto& vis = feats.visibility.at(track);
  MVM_CHECK(static_cast<int>(vis.size()) == num_views, "visibility length");
  MVM_CHECK(std::count(vis.begin(), vis.end(), 1) > 0,
            "track has no visible view");
  Eigen::MatrixXd x(num_views, params.dim);
  for (int v = 0; v < num_views; ++v) x.row(v) = feats.values[v].row(track);
  const Eigen::MatrixXd q = x * params.w_query;
  const Eigen::MatrixXd k = x * params.w_key;
  Eigen::MatrixXd logits = q * k.transpose() / std::sqrt(static_cast<double>(params.dim));
  MaskedRowSoftmax(&logits, vis);
  for (int v = 0; v < num_views; ++v) {
    if (!vis[v]) logits.row(v).setZero();
  }
  return logits;
}

TrackFeatures TrackTransformer(const TrackFeatures& feats,
                               const AttentionParams& params) {
  const int num_views = feats.NumViews();
  const int num_tracks = feats.NumTracks();
  MVM_CHECK(num_views >= 1, "need at least one view");
  for (const auto& v : feats.values) {
    MVM_CHECK(v.rows() == num_tracks && v.cols() == params.dim,
              "track feature shape");
  }
  TrackFeatures out;
  out.visibility = feats.visibility;
  out.values.assign(num_views, Eigen::MatrixXd::Zero(num_tracks, params.dim));
  const Eigen::MatrixXd value_out = params.w_value * params.w_out;
  for (int t = 0; t < num_tracks; ++t) {
    const Eigen::MatrixXd w = TrackTransformerWeights(feats, params, t);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(num_views, params.dim);
    for (int v = 0; v < num_views; ++v) {
      if (feats.visibility[t][v]) x.row(v) = feats.values[v].row(t);
    }
    const Eigen::MatrixXd y = x + w * (x * value_out);
    for (int v = 0; v < num_views; ++v) {
      if (feats.visibility[t][v]) out.values[v].row(t) = y.row(v);
    }
  }
  return out;
}

Eigen::MatrixXd AttentionalSplattingWeights(
    const FeatureGrid& grid, const Eigen::MatrixXd& track_feats,
    std::span<const GridCoord> coords, std::span<const uint8_t> visibility,
    const AttentionParams& params) {
  MVM_CHECK(grid.channels() == params.dim, "feature dim mismatch");
  MVM_CHECK(track_feats.rows() == static_cast<Eigen::Index>(coords.size()) &&
                coords.size() == visibility.size(),
            "track count mismatch");
  MVM_CHECK(track_feats.cols() == params.dim, "track feature dim");
  // Invisible tracks may carry sentinel coordinates; bias them from a
  // harmless location since their columns are masked anyway.
  std::vector<GridCoord> safe(coords.begin(), coords.end());
  Eigen::MatrixXd feats = track_feats;
  for (size_t t = 0; t < safe.size(); ++t) {
    if (!visibility[t]) {
      safe[t] = {0.0, 0.0};
      feats.row(t).setZero();
    }
  }
  const std::vector<GridCoord> centers = GridCenters(grid);
  const Eigen::MatrixXd q = QueryEmbedding(
      NormalizeCoords(centers, grid.height(), grid.width(), grid.stride()),
      params);
  const Eigen::MatrixXd k = feats * params.w_key;
  Eigen::MatrixXd logits = q * k.transpose() / std::sqrt(static_cast<double>(params.dim));
  logits += SpatialBias(safe, grid.height(), grid.width(), grid.stride(),
                        params.sigma)
                .transpose();
  MaskedRowSoftmax(&logits, visibility);
  return logits;
}

FeatureGrid AttentionalSplatting(const FeatureGrid& grid,
                                 const Eigen::MatrixXd& track_feats,
                                 std::span<const GridCoord> coords,
                                 std::span<const uint8_t> visibility,
                                 const AttentionParams& params) {
  if (std::count(visibility.begin(), visibility.end(), 1) == 0) return grid;
  const Eigen::MatrixXd w =
      AttentionalSplattingWeights(grid, track_feats, coords, visibility, params);
  Eigen::MatrixXd feats = track_feats;
  for (size_t t = 0; t < visibility.size(); ++t) {
    if (!visibility[t]) feats.row(t).setZero();
  }
  const RowMatrix update = w * (feats * params.w_value) * params.w_out;
  FeatureGrid out = grid;
  Eigen::Map<RowMatrix> dst(out.data().data(),
                            static_cast<Eigen::Index>(out.NumTexels()),
                            out.channels());
  dst += update;
  return out;
}

std::vector<FeatureGrid> ExchangeTrackFeatures(
    std::span<const FeatureGrid> grids, std::span<const TrackToken> tracks,
    const TrackAttentionParams& params) {
  const int num_views = static_cast<int>(grids.size());
  if (tracks.empty()) return {grids.begin(), grids.end()};
  const int num_tracks = static_cast<int>(tracks.size());
  TrackFeatures feats;
  feats.visibility.resize(num_tracks);
  for (int t = 0; t < num_tracks; ++t) {
    MVM_CHECK(tracks[t].NumViews() == num_views, "track/view count mismatch");
    feats.visibility[t] = tracks[t].visibility;
  }
  std::vector<std::vector<GridCoord>> coords(num_views);
  std::vector<std::vector<uint8_t>> vis(num_views);
  for (int v = 0; v < num_views; ++v) {
    for (int t = 0; t < num_tracks; ++t) {
      const bool visible = tracks[t].visibility[v] != 0;
      vis[v].push_back(visible ? 1 : 0);
      coords[v].push_back(visible ? tracks[t].coords[v] : GridCoord{0.0, 0.0});
    }
    Eigen::MatrixXd z = AttentionalSampling(grids[v], coords[v], params.sampling);
    for (int t = 0; t < num_tracks; ++t) {
      if (!vis[v][t]) z.row(t).setZero();
    }
    feats.values.push_back(std::move(z));
  }
  const TrackFeatures mixed = TrackTransformer(feats, params.transformer);
  std::vector<FeatureGrid> out;
  out.reserve(num_views);
  for (int v = 0; v < num_views; ++v) {
    out.push_back(AttentionalSplatting(grids[v], mixed.values[v], coords[v],
                                       vis[v], params.splatting));
  }
  return out;
}

}  // namespace mvm
