#include "mvmatch/core/track_token.h"

#include "mvmatch/core/check.h"

namespace mvm {

int TrackToken::NumVisible() const {
  int n = 0;
  for (uint8_t v : visibility) n += v ? 1 : 0;
  return n;
}

std::vector<double> TrackToken::Stacked() const {
  std::vector<double> out;
  out.reserve(coords.size() * 2);
  for (const GridCoord& c : coords) {
    out.push_back(c.x);
    out.push_back(c.y);
  }
  return out;
}

void TrackToken::Validate() const {
  MVM_CHECK(coords.size() == visibility.size(), "coords/visibility length");
  MVM_CHECK(!coords.empty() && visibility[0] == 1, "source slot invisible");
  bool any_target = false;
  for (size_t v = 0; v < coords.size(); ++v) {
    MVM_CHECK((visibility[v] != 0) != (coords[v] == kMissing),
              "visibility and sentinel disagree");
    if (v > 0 && visibility[v]) any_target = true;
  }
  MVM_CHECK(any_target, "no visible target view");
}

}  // namespace mvm
