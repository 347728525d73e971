#include "mvmatch/tracks/track_io.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mvmatch/core/check.h"

namespace mvm {

SceneTrack ToSceneTrack(const TrackToken& token, const ImageGroup& group) {
  const std::vector<int> views = group.Views();
  MVM_CHECK(token.NumViews() == static_cast<int>(views.size()),
            "token does not match group");
  SceneTrack track;
  for (size_t s = 0; s < views.size(); ++s) {
    if (token.visibility[s]) track.push_back({views[s], token.coords[s]});
  }
  return track;
}

void WriteTracksTsv(std::ostream& out, int num_views,
                    std::span<const SceneTrack> tracks) {
  out << "# V=" << num_views << " T=" << tracks.size() << "\n";
  char line[128];
  for (size_t t = 0; t < tracks.size(); ++t) {
    for (const TrackObservation& obs : tracks[t]) {
      std::snprintf(line, sizeof(line), "%zu\t%d\t%.6f\t%.6f\n", t,
                    obs.view_id, obs.coord.x, obs.coord.y);
      out << line;
    }
  }
}

TrackFile ReadTracksTsv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("tracks: empty file");
  TrackFile file;
  size_t num_tracks = 0;
  if (std::sscanf(header.c_str(), "# V=%d T=%zu", &file.num_views,
                  &num_tracks) != 2) {
    throw std::runtime_error("tracks: bad header");
  }
  file.tracks.resize(num_tracks);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    size_t id;
    TrackObservation obs;
    if (!(row >> id >> obs.view_id >> obs.coord.x >> obs.coord.y) ||
        id >= num_tracks) {
      throw std::runtime_error("tracks: bad row: " + line);
    }
    file.tracks[id].push_back(obs);
  }
  return file;
}

void WriteTracksTsv(const std::string& path, int num_views,
                    std::span<const SceneTrack> tracks) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  WriteTracksTsv(out, num_views, tracks);
}

TrackFile ReadTracksTsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadTracksTsv(in);
}

}  // namespace mvm
