#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/synth/camera.h"
#include "mvmatch/tracks/track_io.h"

namespace mvm {

struct TriangulatedPoint {
  Eigen::Vector3d position;
  int track_index = 0;
  double max_reprojection_error = 0.0;
};

struct TriangulationResult {
  std::vector<TriangulatedPoint> points;
  int skipped_short = 0;        // fewer than two views
  int cheirality_rejected = 0;  // behind an observing camera
  int degenerate = 0;           // no parallax / rank deficient
};

enum class TriangulationStatus { kOk, kDegenerate };

// Linear multi-view triangulation from the smallest right singular vector of
// the stacked projection constraints.
TriangulationStatus TriangulateDlt(
    std::span<const Eigen::Matrix<double, 3, 4>> projections,
    std::span<const Eigen::Vector2d> pixels, Eigen::Vector3d* point);

double ReprojectionError(const PinholeCamera& camera, const Eigen::Vector3d& x,
                         const Eigen::Vector2d& pixel);

TriangulationResult TriangulateTracks(std::span<const SceneTrack> tracks,
                                      std::span<const PinholeCamera> cameras);

struct AccuracyCompletenessRow {
  double threshold = 0.0;
  double accuracy = 0.0;
  double completeness = 0.0;
};

struct AccuracyCompleteness {
  std::vector<AccuracyCompletenessRow> rows;
  bool empty_reconstruction = false;
};

// Fractions of reconstructed points near ground truth (accuracy) and of
// ground-truth points near the reconstruction (completeness).
AccuracyCompleteness ComputeAccuracyCompleteness(
    std::span<const Eigen::Vector3d> points,
    std::span<const Eigen::Vector3d> gt_points,
    std::span<const double> thresholds);

}  // namespace mvm
