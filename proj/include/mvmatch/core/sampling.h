#pragma once

#include <span>
#include <vector>

#include "mvmatch/core/types.h"

namespace mvm {

// Bilinear interpolation with coordinates clamped to the grid border.
std::vector<double> BilinearSample(const FeatureGrid& grid, GridCoord at);
void BilinearSampleInto(const FeatureGrid& grid, GridCoord at,
                        std::span<double> out);

// Gathers target features at every warp target. The warp must live at the
// target's stride.
FeatureGrid WarpFeatures(const FeatureGrid& target, const DenseWarpField& warp);

// Window of scaled inner products between each source texel and the target
// sampled around its current warp target.
CorrelationVolume LocalCorrelation(const FeatureGrid& source,
                                   const FeatureGrid& target,
                                   const DenseWarpField& warp, int window);

// Upsamples a warp by a power-of-two factor. Coordinates are interpolated
// linearly (extrapolated past the last sample row/column so affine warps stay
// exact) and rescaled by the factor. Confidence is interpolated with border
// clamping and clamped to [0, 1].
DenseWarpField UpsampleWarp(const DenseWarpField& warp, int factor);

// Numerical inverse of a warp onto a target grid of the given size. Each
// source pixel with confidence above min_confidence is splatted to the
// nearest target pixel (closest splat wins, corrected by the sub-pixel
// offset). Holes copy the nearest filled pixel and get confidence 0.
DenseWarpField InvertWarp(const DenseWarpField& warp, int target_height,
                          int target_width, double min_confidence = 0.0);

}  // namespace mvm
