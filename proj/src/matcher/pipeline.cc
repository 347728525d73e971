#include "mvmatch/attention/attention.h"
#include "mvmatch/core/check.h"
#include "mvmatch/core/sampling.h"
#include "mvmatch/matcher/matcher.h"

namespace mvm {

GroupResult RunGroup(const ImageGroup& group, const FeatureProvider& provider,
                     std::span<const TrackToken> tracks,
                     const MatcherParams& params) {
  group.Validate();
  const MatcherConfig& cfg = params.config;
  MVM_CHECK(params.levels.size() == cfg.strides.size(), "level params");
  const std::vector<int> views = group.Views();
  for (const auto& t : tracks) {
    MVM_CHECK(t.NumViews() == group.NumViews(),
              "track slot count differs from group size");
  }

  std::vector<FeatureGrid> coarse;
  for (int v : views) {
    coarse.push_back(
        provider.Features(v, cfg.coarse_stride, FeatureKind::kCoarse));
  }
  if (!tracks.empty()) {
    coarse = ExchangeTrackFeatures(coarse, tracks, params.exchange);
  }

  GroupResult result;
  RefinerState state;
  state.stride = cfg.coarse_stride;
  const GlobalMatchOptions gm{cfg.inverse_temperature};
  for (size_t k = 0; k < group.targets.size(); ++k) {
    const FeatureGrid& tgt = coarse[k + 1];
    DenseWarpField w = GlobalMatch(
        coarse[0], tgt, AnchorGrid::ForGrid(tgt.height(), tgt.width()), gm);
    w.source_view = group.source;
    w.target_view = group.targets[k];
    result.coarse.push_back(w);
    state.warps.push_back(std::move(w));
    if (cfg.alignment == AlignmentMode::kReversePass) {
      DenseWarpField b = GlobalMatch(
          tgt, coarse[0],
          AnchorGrid::ForGrid(coarse[0].height(), coarse[0].width()), gm);
      b.source_view = group.targets[k];
      b.target_view = group.source;
      state.reverse_warps.push_back(std::move(b));
    }
  }

  for (const LevelParams& level : params.levels) {
    for (int pass = 0; pass < cfg.passes_per_level; ++pass) {
      state = RefineLevel(state, group, provider, params, level);
    }
    result.level_warps.push_back(state.warps);
  }
  for (auto& w : state.warps) {
    if (cfg.output_upsample > 1) w = UpsampleWarp(w, cfg.output_upsample);
    result.warps.push_back(std::move(w));
  }
  return result;
}

}  // namespace mvm
