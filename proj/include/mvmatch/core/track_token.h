#pragma once

#include <cstdint>
#include <vector>

#include "mvmatch/core/types.h"

namespace mvm {

// One scene point observed across the V view slots of a group. Slot 0 is the
// source and is always visible; invisible slots hold kMissing.
struct TrackToken {
  std::vector<GridCoord> coords;
  std::vector<uint8_t> visibility;

  int NumViews() const { return static_cast<int>(coords.size()); }
  int NumVisible() const;
  // Coordinates stacked as (x_0, y_0, x_1, y_1, ...).
  std::vector<double> Stacked() const;
  void Validate() const;

  bool operator==(const TrackToken&) const = default;
};

}  // namespace mvm
