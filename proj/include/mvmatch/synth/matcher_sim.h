#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mvmatch/core/types.h"
#include "mvmatch/synth/scene.h"

namespace mvm {

// A pairwise-matcher observation of one source pixel in every group target.
struct MatchSample {
  GridCoord source_pixel;
  // One entry per group target, in group order.
  std::vector<std::optional<GridCoord>> target_pixels;
  // One entry per view slot (slot 0 = source, always 1).
  std::vector<uint8_t> visibility;
};

// Draws n covisible source pixels uniformly (with replacement) and reports
// their noisy ground-truth matches. Each visible observation is replaced by a
// uniform in-image coordinate with probability outlier_rate. The stream is
// seeded by `seed`, or by the scene seed when absent.
std::vector<MatchSample> SimulateMatcher(const SceneOracle& oracle,
                                         const ImageGroup& group, int n,
                                         double noise_sigma,
                                         double outlier_rate,
                                         std::optional<uint64_t> seed = {});

}  // namespace mvm
