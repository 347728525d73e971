#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "mvmatch/core/check.h"
#include "mvmatch/eval/triangulation.h"

namespace mvm {
namespace {

// Uniform hash grid for radius queries.
class PointGrid {
 public:
  PointGrid(std::span<const Eigen::Vector3d> points, double cell)
      : points_(points), cell_(cell) {
    for (size_t i = 0; i < points.size(); ++i) {
      cells_[Key(Cell(points[i]))].push_back(static_cast<int>(i));
    }
  }

  // Distance to the nearest stored point if it is within cell size.
  double NearestWithinCell(const Eigen::Vector3d& q) const {
    const Eigen::Vector3i c = Cell(q);
    double best = INFINITY;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(Key(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == cells_.end()) continue;
          for (int i : it->second) best = std::min(best, (points_[i] - q).norm());
        }
      }
    }
    return best;
  }

 private:
  Eigen::Vector3i Cell(const Eigen::Vector3d& p) const {
    return {static_cast<int>(std::floor(p.x() / cell_)),
            static_cast<int>(std::floor(p.y() / cell_)),
            static_cast<int>(std::floor(p.z() / cell_))};
  }
  static int64_t Key(const Eigen::Vector3i& c) {
    return (static_cast<int64_t>(c.x()) * 73856093) ^
           (static_cast<int64_t>(c.y()) * 19349663) ^
           (static_cast<int64_t>(c.z()) * 83492791);
  }

  std::span<const Eigen::Vector3d> points_;
  double cell_;
  std::unordered_map<int64_t, std::vector<int>> cells_;
};

}  // namespace

AccuracyCompleteness ComputeAccuracyCompleteness(
    std::span<const Eigen::Vector3d> points,
    std::span<const Eigen::Vector3d> gt_points,
    std::span<const double> thresholds) {
  MVM_CHECK(!gt_points.empty(), "empty ground truth");
  MVM_CHECK(!thresholds.empty(), "no thresholds");
  for (double t : thresholds) MVM_CHECK(t > 0.0, "threshold must be positive");
  const double cell = *std::max_element(thresholds.begin(), thresholds.end());
  AccuracyCompleteness out;
  out.empty_reconstruction = points.empty();

  std::vector<double> to_gt(points.size());
  std::vector<double> to_rec(gt_points.size(), INFINITY);
  PointGrid gt_grid(gt_points, cell);
  for (size_t i = 0; i < points.size(); ++i) {
    to_gt[i] = gt_grid.NearestWithinCell(points[i]);
  }
  if (!points.empty()) {
    PointGrid rec_grid(points, cell);
    for (size_t i = 0; i < gt_points.size(); ++i) {
      to_rec[i] = rec_grid.NearestWithinCell(gt_points[i]);
    }
  }
  for (double t : thresholds) {
    AccuracyCompletenessRow row;
    row.threshold = t;
    if (!points.empty()) {
      row.accuracy = static_cast<double>(std::count_if(
                         to_gt.begin(), to_gt.end(),
                         [t](double d) { return d <= t; })) /
                     points.size();
    }
    row.completeness = static_cast<double>(std::count_if(
                           to_rec.begin(), to_rec.end(),
                           [t](double d) { return d <= t; })) /
                       gt_points.size();
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace mvm
