#pragma once

#include <string>

#include "mvmatch/core/types.h"

namespace mvm {

// MVWF layout: "MVWF", u32 version (1), u32 height, u32 width,
// u32 source_view, u32 target_view, then height * width records of
// f32 (target_x, target_y, confidence) in raster order. All little-endian.
// The stride is not stored; files are read back with stride 1.
std::string EncodeWarpField(const DenseWarpField& warp);
DenseWarpField DecodeWarpField(const std::string& bytes);

void WriteWarpField(const std::string& path, const DenseWarpField& warp);
DenseWarpField ReadWarpField(const std::string& path);

}  // namespace mvm
