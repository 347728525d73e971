#include <algorithm>
#include <map>
#include <numeric>

#include "mvmatch/core/check.h"
#include "mvmatch/tracks/track_builder.h"

namespace mvm {

std::vector<VisibilityPartition> PartitionByVisibility(
    std::span<const MatchSample> raw) {
  std::map<std::vector<uint8_t>, std::vector<int>> by_mask;
  for (size_t i = 0; i < raw.size(); ++i) {
    by_mask[raw[i].visibility].push_back(static_cast<int>(i));
  }
  std::vector<VisibilityPartition> partitions;
  partitions.reserve(by_mask.size());
  for (auto& [mask, members] : by_mask) {
    partitions.push_back({mask, std::move(members)});
  }
  return partitions;
}

ClusterAllocation AllocateClusters(
    std::span<const VisibilityPartition> partitions, int num_tokens) {
  MVM_CHECK(num_tokens >= 1, "num_tokens must be positive");
  const size_t n = partitions.size();
  ClusterAllocation alloc;
  alloc.counts.assign(n, 0);
  int64_t total = 0;
  for (const auto& p : partitions) total += static_cast<int64_t>(p.members.size());
  if (total <= num_tokens) {
    for (size_t i = 0; i < n; ++i) {
      alloc.counts[i] = static_cast<int>(partitions[i].members.size());
    }
    alloc.capped = total < num_tokens;
    return alloc;
  }

  std::vector<char> active(n, 1);
  int64_t budget = num_tokens;
  while (true) {
    int64_t active_size = 0;
    for (size_t i = 0; i < n; ++i) {
      if (active[i]) active_size += static_cast<int64_t>(partitions[i].members.size());
    }
    // Integer quotas and exact remainders (numerators over active_size).
    std::vector<int64_t> quota(n, 0), remainder(n, 0);
    int64_t assigned = 0;
    std::vector<size_t> order;
    for (size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const int64_t num = budget * static_cast<int64_t>(partitions[i].members.size());
      quota[i] = num / active_size;
      remainder[i] = num % active_size;
      assigned += quota[i];
      order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
      return partitions[a].members.size() > partitions[b].members.size();
    });
    for (size_t k = 0; k < order.size() && assigned < budget; ++k) {
      ++quota[order[k]];
      ++assigned;
    }
    bool any_capped = false;
    for (size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const int64_t size = static_cast<int64_t>(partitions[i].members.size());
      if (quota[i] > size) {
        alloc.counts[i] = static_cast<int>(size);
        active[i] = 0;
        budget -= size;
        any_capped = true;
      }
    }
    if (!any_capped) {
      for (size_t i = 0; i < n; ++i) {
        if (active[i]) alloc.counts[i] = static_cast<int>(quota[i]);
      }
      return alloc;
    }
  }
}

TrackToken ToTrackToken(const MatchSample& sample) {
  MVM_CHECK(sample.visibility.size() == sample.target_pixels.size() + 1,
            "visibility length");
  TrackToken token;
  token.coords.assign(sample.visibility.size(), kMissing);
  token.visibility = sample.visibility;
  token.coords[0] = sample.source_pixel;
  token.visibility[0] = 1;
  for (size_t k = 0; k < sample.target_pixels.size(); ++k) {
    if (sample.visibility[k + 1]) {
      MVM_CHECK(sample.target_pixels[k].has_value(),
                "visible view without coordinate");
      token.coords[k + 1] = *sample.target_pixels[k];
    }
  }
  return token;
}

}  // namespace mvm
