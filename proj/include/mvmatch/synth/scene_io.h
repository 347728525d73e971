#pragma once

#include <string>

#include "mvmatch/synth/scene.h"

namespace mvm {

// JSON scene file. Common keys: "kind" ("planar" | "point-cloud"),
// "height", "width", "seed". Planar: "homographies" as a list of row-major
// 9-vectors (view pixel -> reference plane). Point cloud: "cameras" with
// row-major "K" (9), "R" (9) and "t" (3); "surfaces" with "center",
// "axis_u", "axis_v" (3 each) and "half_extents" (2); "points" as 3-vectors.
std::string SceneToJson(const SceneOracle& scene);
SceneOracle SceneFromJson(const std::string& text);

void WriteScene(const std::string& path, const SceneOracle& scene);
SceneOracle ReadScene(const std::string& path);

}  // namespace mvm
