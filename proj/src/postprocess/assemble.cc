#include <map>
#include <utility>

#include "json.hpp"
#include "mvmatch/core/check.h"
#include "mvmatch/postprocess/postprocess.h"

namespace mvm {

std::vector<TrackToken> AssembleTracks(
    std::span<const Keypoint> keypoints,
    std::span<const DenseWarpField> selected,
    std::span<const std::vector<uint8_t>> keep, double tau) {
  MVM_CHECK(selected.size() == keep.size(), "warp/mask count mismatch");
  for (size_t k = 0; k < selected.size(); ++k) {
    MVM_CHECK(keep[k].size() == selected[k].NumPixels(), "mask length");
  }
  const size_t num_slots = selected.size() + 1;
  std::vector<TrackToken> tracks;
  for (const Keypoint& kp : keypoints) {
    TrackToken token;
    token.coords.assign(num_slots, kMissing);
    token.visibility.assign(num_slots, 0);
    token.coords[0] = {static_cast<double>(kp.col), static_cast<double>(kp.row)};
    token.visibility[0] = 1;
    bool any = false;
    for (size_t k = 0; k < selected.size(); ++k) {
      const size_t i = selected[k].Index(kp.row, kp.col);
      if (keep[k][i] && selected[k].confidence[i] > tau) {
        token.coords[k + 1] = selected[k].targets[i];
        token.visibility[k + 1] = 1;
        any = true;
      }
    }
    if (any) tracks.push_back(std::move(token));
  }
  return tracks;
}

std::string PostprocessStats::ToJson() const {
  nlohmann::json j;
  j["candidate_matches"] = candidate_matches;
  j["kept_matches"] = kept_matches;
  j["kept_rate"] = KeptRate();
  j["num_tracks"] = num_tracks;
  j["track_length_histogram"] = length_histogram;
  return j.dump(1) + "\n";
}

PostprocessResult PostprocessScene(std::span<const GroupWarps> groups,
                                   const PostprocessOptions& options) {
  using Pair = std::pair<int, int>;
  std::map<Pair, PairMatchBank> banks;
  for (const GroupWarps& g : groups) {
    MVM_CHECK(g.warps.size() == g.group.targets.size(),
              "one warp per target required");
    for (size_t k = 0; k < g.warps.size(); ++k) {
      const Pair key{g.group.source, g.group.targets[k]};
      PairMatchBank& bank = banks[key];
      bank.source_view = key.first;
      bank.target_view = key.second;
      bank.candidates.push_back(g.warps[k]);
    }
  }
  std::map<Pair, DenseWarpField> selected;
  for (const auto& [key, bank] : banks) {
    selected.emplace(key, SelectMatches(bank).warp);
  }

  PostprocessResult result;
  for (const GroupWarps& g : groups) {
    std::vector<DenseWarpField> fwd;
    std::vector<std::vector<uint8_t>> keep;
    std::vector<std::vector<double>> conf;
    for (int t : g.group.targets) {
      const DenseWarpField& f = selected.at({g.group.source, t});
      auto back = selected.find({t, g.group.source});
      std::vector<uint8_t> mask(f.NumPixels(), 0);
      if (back != selected.end()) {
        mask = ReciprocityFilter(f, back->second, options.eps_p);
      }
      for (size_t i = 0; i < f.NumPixels(); ++i) {
        if (f.confidence[i] > options.tau) {
          ++result.stats.candidate_matches;
          if (mask[i]) ++result.stats.kept_matches;
        }
      }
      conf.push_back(FilterConfidence(f, mask));
      keep.push_back(std::move(mask));
      fwd.push_back(f);
    }
    std::vector<TrackToken> tokens;
    if (!fwd.empty()) {
      const ScoreMap score =
          BuildScoreMap(conf, fwd[0].height, fwd[0].width, options.tau);
      const std::vector<Keypoint> kps =
          NmsSelect(score, options.nms_radius, options.max_keypoints);
      tokens = AssembleTracks(kps, fwd, keep, options.tau);
    }
    for (const TrackToken& t : tokens) {
      result.tracks.push_back(ToSceneTrack(t, g.group));
      const size_t len = result.tracks.back().size();
      if (result.stats.length_histogram.size() <= len) {
        result.stats.length_histogram.resize(len + 1, 0);
      }
      ++result.stats.length_histogram[len];
    }
    result.group_tracks.push_back(std::move(tokens));
  }
  result.stats.num_tracks = result.tracks.size();
  return result;
}

}  // namespace mvm
