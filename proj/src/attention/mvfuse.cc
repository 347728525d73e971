#include "mvmatch/attention/mvfuse.h"

#include <cmath>

#include "mvmatch/attention/attention.h"
#include "mvmatch/core/check.h"

namespace mvm {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void CheckAligned(std::span<const FeatureGrid> hidden, int dim) {
  MVM_CHECK(!hidden.empty(), "no view slots");
  for (const FeatureGrid& g : hidden) {
    MVM_CHECK(g.height() == hidden[0].height() && g.width() == hidden[0].width(),
              "grid-size mismatch");
    MVM_CHECK(g.channels() == dim, "channel mismatch");
  }
}

Eigen::MatrixXd SlotMatrix(std::span<const FeatureGrid> hidden, int row,
                           int col) {
  Eigen::MatrixXd x(hidden.size(), hidden[0].channels());
  for (size_t v = 0; v < hidden.size(); ++v) {
    const auto t = hidden[v].Texel(row, col);
    for (int c = 0; c < x.cols(); ++c) x(v, c) = t[c];
  }
  return x;
}

}  // namespace

Eigen::MatrixXd MVFusePixelWeights(std::span<const FeatureGrid> hidden,
                                   const MVFuseParams& params, int row,
                                   int col) {
  CheckAligned(hidden, params.dim);
  const Eigen::MatrixXd x = SlotMatrix(hidden, row, col);
  Eigen::MatrixXd logits = (x * params.w_query) * (x * params.w_key).transpose() /
                           std::sqrt(static_cast<double>(params.dim));
  MaskedRowSoftmax(&logits);
  return logits;
}

FeatureGrid DepthwiseConv7(const FeatureGrid& grid, const MVFuseParams& params) {
  MVM_CHECK(grid.channels() == params.dim, "channel mismatch");
  constexpr int k = MVFuseParams::kKernel;
  constexpr int r = k / 2;
  FeatureGrid out(grid.height(), grid.width(), grid.channels(), grid.stride());
  const int channels = grid.channels();
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      auto dst = out.Texel(y, x);
      for (int c = 0; c < channels; ++c) dst[c] = params.dw_bias(c);
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= grid.height()) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= grid.width()) continue;
          const auto src = grid.Texel(yy, xx);
          const int tap = (dy + r) * k + (dx + r);
          for (int c = 0; c < channels; ++c) {
            dst[c] += params.dw_kernel(c, tap) * src[c];
          }
        }
      }
    }
  }
  return out;
}

std::vector<FeatureGrid> MVFuse(std::vector<FeatureGrid> hidden,
                                const MVFuseParams& params, int iterations) {
  CheckAligned(hidden, params.dim);
  MVM_CHECK(iterations >= 0, "iterations");
  const int num_views = static_cast<int>(hidden.size());
  const int height = hidden[0].height();
  const int width = hidden[0].width();
  const Eigen::MatrixXd value_out = params.w_value * params.w_out;
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.dim));
  for (int it = 0; it < iterations; ++it) {
    std::vector<FeatureGrid> mixed;
    for (int v = 0; v < num_views; ++v) {
      mixed.emplace_back(height, width, params.dim, hidden[v].stride());
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const Eigen::MatrixXd s = SlotMatrix(hidden, y, x);
        Eigen::MatrixXd logits =
            (s * params.w_query) * (s * params.w_key).transpose() * scale;
        MaskedRowSoftmax(&logits);
        const Eigen::MatrixXd m = logits * (s * value_out);
        for (int v = 0; v < num_views; ++v) {
          auto dst = mixed[v].Texel(y, x);
          for (int c = 0; c < params.dim; ++c) dst[c] = m(v, c);
        }
      }
    }
    for (int v = 0; v < num_views; ++v) {
      const FeatureGrid conv = DepthwiseConv7(mixed[v], params);
      const auto n = static_cast<Eigen::Index>(conv.NumTexels());
      Eigen::Map<const RowMatrix> c(conv.data().data(), n, params.dim);
      Eigen::Map<const RowMatrix> m(mixed[v].data().data(), n, params.dim);
      RowMatrix hid = ((c * params.mlp_w1).rowwise() + params.mlp_b1).cwiseMax(0.0);
      RowMatrix s = m + ((hid * params.mlp_w2).rowwise() + params.mlp_b2);
      Eigen::Map<RowMatrix> h(hidden[v].data().data(), n, params.dim);
      h += s;
    }
  }
  return hidden;
}

}  // namespace mvm
