#include <algorithm>
#include <numeric>

#include "mvmatch/core/check.h"
#include "mvmatch/postprocess/postprocess.h"

namespace mvm {

ScoreMap BuildScoreMap(std::span<const std::vector<double>> confidences,
                       int height, int width, double tau) {
  MVM_CHECK(!confidences.empty(), "need at least one target");
  const size_t n = static_cast<size_t>(height) * width;
  for (const auto& c : confidences) MVM_CHECK(c.size() == n, "map size");
  ScoreMap map;
  map.height = height;
  map.width = width;
  map.length.assign(n, 0);
  map.mean_confidence.assign(n, 0.0);
  map.score.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (const auto& c : confidences) {
      if (c[i] > tau) {
        sum += c[i];
        ++count;
      }
    }
    map.length[i] = count;
    map.mean_confidence[i] = count > 0 ? sum / count : 0.0;
    map.score[i] = count + map.mean_confidence[i];
  }
  return map;
}

std::vector<Keypoint> NmsSelect(const ScoreMap& score, int radius,
                                std::optional<int> max_keypoints) {
  MVM_CHECK(radius >= 1, "radius must be >= 1");
  const int h = score.height;
  const int w = score.width;
  std::vector<int> order;
  for (int i = 0; i < h * w; ++i) {
    if (score.score[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return score.score[a] > score.score[b];
  });
  std::vector<char> suppressed(static_cast<size_t>(h) * w, 0);
  std::vector<Keypoint> out;
  for (int i : order) {
    if (max_keypoints && static_cast<int>(out.size()) >= *max_keypoints) break;
    if (suppressed[i]) continue;
    const int r = i / w;
    const int c = i % w;
    out.push_back({r, c, score.score[i]});
    for (int y = std::max(0, r - radius); y <= std::min(h - 1, r + radius); ++y) {
      for (int x = std::max(0, c - radius); x <= std::min(w - 1, c + radius); ++x) {
        suppressed[static_cast<size_t>(y) * w + x] = 1;
      }
    }
  }
  return out;
}

}  // namespace mvm
