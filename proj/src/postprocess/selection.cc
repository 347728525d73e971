#include <cmath>

#include "mvmatch/core/check.h"
#include "mvmatch/core/sampling.h"
#include "mvmatch/postprocess/postprocess.h"

namespace mvm {

SelectedMatches SelectMatches(const PairMatchBank& bank) {
  MVM_CHECK(!bank.candidates.empty(), "empty bank");
  const DenseWarpField& first = bank.candidates[0];
  for (const DenseWarpField& w : bank.candidates) {
    MVM_CHECK(w.height == first.height && w.width == first.width,
              "candidate size mismatch");
  }
  SelectedMatches out;
  out.warp = first;
  out.warp.source_view = bank.source_view;
  out.warp.target_view = bank.target_view;
  out.group_index.assign(first.NumPixels(), 0);
  for (size_t g = 1; g < bank.candidates.size(); ++g) {
    const DenseWarpField& w = bank.candidates[g];
    for (size_t i = 0; i < w.NumPixels(); ++i) {
      if (w.confidence[i] > out.warp.confidence[i]) {
        out.warp.confidence[i] = w.confidence[i];
        out.warp.targets[i] = w.targets[i];
        out.group_index[i] = static_cast<int>(g);
      }
    }
  }
  return out;
}

std::vector<uint8_t> ReciprocityFilter(const DenseWarpField& forward,
                                       const DenseWarpField& backward,
                                       double eps_p) {
  MVM_CHECK(eps_p >= 0.0, "eps_p");
  FeatureGrid coords(backward.height, backward.width, 2, 1);
  for (size_t i = 0; i < backward.NumPixels(); ++i) {
    coords.data()[2 * i] = backward.targets[i].x;
    coords.data()[2 * i + 1] = backward.targets[i].y;
  }
  std::vector<uint8_t> keep(forward.NumPixels(), 0);
  double back[2];
  for (int r = 0; r < forward.height; ++r) {
    for (int c = 0; c < forward.width; ++c) {
      const size_t i = forward.Index(r, c);
      const GridCoord t = forward.targets[i];
      if (!(t.x >= 0.0 && t.y >= 0.0 && t.x <= backward.width - 1.0 &&
            t.y <= backward.height - 1.0)) {
        continue;
      }
      BilinearSampleInto(coords, t, back);
      keep[i] = std::hypot(back[0] - c, back[1] - r) <= eps_p ? 1 : 0;
    }
  }
  return keep;
}

std::vector<double> FilterConfidence(const DenseWarpField& warp,
                                     std::span<const uint8_t> keep) {
  MVM_CHECK(keep.size() == warp.NumPixels(), "mask length");
  std::vector<double> out(warp.NumPixels());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = keep[i] ? warp.confidence[i] : 0.0;
  }
  return out;
}

}  // namespace mvm
