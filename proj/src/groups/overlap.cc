#include <algorithm>
#include <cmath>

#include "mvmatch/core/check.h"
#include "mvmatch/groups/group_sampler.h"

namespace mvm {

OverlapMatrix OverlapFromMatches(int num_images,
                                 std::span<const DenseWarpField> warps,
                                 double tau_conf) {
  MVM_CHECK(num_images >= 1, "num_images");
  OverlapMatrix o(num_images, OverlapMode::kVisibility);
  for (const DenseWarpField& w : warps) {
    MVM_CHECK(w.source_view >= 0 && w.source_view < num_images &&
                  w.target_view >= 0 && w.target_view < num_images,
              "view index");
    size_t valid = 0;
    for (double c : w.confidence) valid += c > tau_conf ? 1 : 0;
    o.At(w.source_view, w.target_view) =
        static_cast<double>(valid) / static_cast<double>(w.NumPixels());
  }
  return o;
}

OverlapMatrix OverlapFromDescriptors(const Eigen::MatrixXd& descriptors) {
  const int m = static_cast<int>(descriptors.rows());
  MVM_CHECK(m >= 1, "no descriptors");
  Eigen::MatrixXd unit = descriptors;
  for (int i = 0; i < m; ++i) {
    const double n = descriptors.row(i).norm();
    MVM_CHECK(n > 0.0, "zero-norm descriptor");
    unit.row(i) /= n;
  }
  OverlapMatrix o(m, OverlapMode::kDescriptor);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      o.At(i, j) = std::clamp(unit.row(i).dot(unit.row(j)), 0.0, 1.0);
    }
  }
  return o;
}

}  // namespace mvm
