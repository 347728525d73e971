#include "mvmatch/synth/matcher_sim.h"

#include <algorithm>

#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"

namespace mvm {

std::vector<MatchSample> SimulateMatcher(const SceneOracle& oracle,
                                         const ImageGroup& group, int n,
                                         double noise_sigma,
                                         double outlier_rate,
                                         std::optional<uint64_t> seed) {
  MVM_CHECK(n >= 1, "n must be positive");
  MVM_CHECK(outlier_rate >= 0.0 && outlier_rate < 1.0, "outlier_rate");
  MVM_CHECK(noise_sigma >= 0.0, "noise_sigma");
  group.Validate();
  const int num_targets = static_cast<int>(group.targets.size());

  // Integer source pixels covisible with at least one target.
  std::vector<GridCoord> pool;
  std::vector<GridCoord> all;
  for (int r = 0; r < oracle.height(); ++r) {
    for (int c = 0; c < oracle.width(); ++c) {
      const GridCoord p{static_cast<double>(c), static_cast<double>(r)};
      all.push_back(p);
      for (int t : group.targets) {
        if (oracle.Covisible(group.source, t, p)) {
          pool.push_back(p);
          break;
        }
      }
    }
  }
  if (pool.empty()) pool = std::move(all);

  Rng rng(seed.value_or(MixSeed(oracle.seed(), 3)));
  const double max_x = oracle.width() - 1.0;
  const double max_y = oracle.height() - 1.0;
  std::vector<MatchSample> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    MatchSample s;
    s.source_pixel = pool[rng.UniformInt(pool.size())];
    s.target_pixels.assign(num_targets, std::nullopt);
    s.visibility.assign(num_targets + 1, 0);
    s.visibility[0] = 1;
    for (int k = 0; k < num_targets; ++k) {
      const int t = group.targets[k];
      if (!oracle.Covisible(group.source, t, s.source_pixel)) continue;
      const GridCoord gt = *oracle.Transfer(group.source, t, s.source_pixel);
      GridCoord obs;
      if (rng.Uniform() < outlier_rate) {
        obs = {rng.Uniform(0.0, max_x), rng.Uniform(0.0, max_y)};
      } else {
        obs = {gt.x + noise_sigma * rng.Normal(),
               gt.y + noise_sigma * rng.Normal()};
        obs.x = std::clamp(obs.x, 0.0, max_x);
        obs.y = std::clamp(obs.y, 0.0, max_y);
      }
      s.target_pixels[k] = obs;
      s.visibility[k + 1] = 1;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace mvm
