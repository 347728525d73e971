#pragma once

#include <span>
#include <vector>

#include "mvmatch/attention/params.h"
#include "mvmatch/core/types.h"

namespace mvm {

// Softmax weights over view slots at one pixel, V x V.
Eigen::MatrixXd MVFusePixelWeights(std::span<const FeatureGrid> hidden,
                                   const MVFuseParams& params, int row,
                                   int col);

// Depthwise 7x7 convolution with zero padding, plus bias.
FeatureGrid DepthwiseConv7(const FeatureGrid& grid, const MVFuseParams& params);

// N fusion iterations over source-aligned hidden grids. Each iteration:
// m_v = per-pixel attention across slots, s_v = m_v + MLP(DWConv(m_v)),
// h_v += s_v.
std::vector<FeatureGrid> MVFuse(std::vector<FeatureGrid> hidden,
                                const MVFuseParams& params, int iterations);

}  // namespace mvm
