#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mvmatch/core/track_token.h"
#include "mvmatch/core/types.h"

namespace mvm {

struct TrackObservation {
  int view_id = 0;
  GridCoord coord;
  bool operator==(const TrackObservation&) const = default;
};

// A track in scene view ids; observations in ascending slot order.
using SceneTrack = std::vector<TrackObservation>;

// Maps group slots to scene view ids, dropping invisible slots.
SceneTrack ToSceneTrack(const TrackToken& token, const ImageGroup& group);

struct TrackFile {
  int num_views = 0;
  std::vector<SceneTrack> tracks;
};

// TSV layout: a header line "# V=<views> T=<tracks>", then one row per
// observation: token_id, view_id, x, y (tab separated, 6 decimals).
void WriteTracksTsv(std::ostream& out, int num_views,
                    std::span<const SceneTrack> tracks);
TrackFile ReadTracksTsv(std::istream& in);

void WriteTracksTsv(const std::string& path, int num_views,
                    std::span<const SceneTrack> tracks);
TrackFile ReadTracksTsv(const std::string& path);

}  // namespace mvm
