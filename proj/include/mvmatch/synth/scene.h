#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mvmatch/core/track_token.h"
#include "mvmatch/core/types.h"
#include "mvmatch/synth/camera.h"

namespace mvm {

enum class SceneKind { kPlanar, kPointCloud };

// Synthetic scene answering exact correspondence queries.
//
// Planar scenes hold one homography per view mapping view pixels to a
// shared reference plane. Point-cloud scenes hold pinhole cameras, a set of
// opaque rectangular surfaces (used for ray casting and occlusion) and
// ground-truth 3D points sampled on those surfaces.
class SceneOracle {
 public:
  static SceneOracle Planar(int height, int width,
                            std::vector<Eigen::Matrix3d> homographies,
                            uint64_t seed);
  static SceneOracle PointCloud(int height, int width,
                                std::vector<PinholeCamera> cameras,
                                std::vector<SurfacePatch> surfaces,
                                std::vector<Eigen::Vector3d> points,
                                uint64_t seed);

  SceneKind kind() const { return kind_; }
  int height() const { return height_; }
  int width() const { return width_; }
  uint64_t seed() const { return seed_; }
  int NumViews() const;
  const std::vector<Eigen::Matrix3d>& homographies() const {
    return homographies_;
  }
  const std::vector<PinholeCamera>& cameras() const { return cameras_; }
  const std::vector<SurfacePatch>& surfaces() const { return surfaces_; }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }

  bool InFrame(GridCoord p) const;

  // 3D scene point seen at a pixel. Planar scenes return (u, v, 0) on the
  // reference plane. nullopt when the ray misses every surface.
  std::optional<Eigen::Vector3d> SurfacePoint(int view, GridCoord p) const;

  // Geometric transfer of a source pixel into the target image, ignoring
  // frame bounds and occlusion.
  std::optional<GridCoord> Transfer(int source, int target, GridCoord p) const;

  // Transfer exists, lands inside the target frame and is not occluded.
  bool Covisible(int source, int target, GridCoord p) const;

  // Point-cloud scenes: the point is in front of the camera, inside the
  // frame and passes the z-buffer test.
  bool PointVisible(int view, const Eigen::Vector3d& x) const;

  // Z-buffer depth at an integer pixel (infinity where no surface).
  double Depth(int view, int row, int col) const;

  // Procedural scalar texture on scene points.
  double Texture(const Eigen::Vector3d& x) const;

  // Approximate size of one pixel in scene units.
  double UnitsPerPixel() const { return units_per_pixel_; }

  static constexpr double kDepthTolerance = 0.005;
  static constexpr double kMaxCondition = 1e8;

 private:
  SceneOracle() = default;
  void Finalize();
  bool DepthTest(int view, const Eigen::Vector2d& pixel, double depth) const;

  SceneKind kind_ = SceneKind::kPlanar;
  int height_ = 0;
  int width_ = 0;
  uint64_t seed_ = 0;
  std::vector<Eigen::Matrix3d> homographies_;
  std::vector<Eigen::Matrix3d> inverse_homographies_;
  std::vector<PinholeCamera> cameras_;
  std::vector<SurfacePatch> surfaces_;
  std::vector<Eigen::Vector3d> points_;
  std::vector<std::vector<double>> zbuffers_;
  std::vector<Eigen::Vector3d> texture_freqs_;
  std::vector<double> texture_phases_;
  double units_per_pixel_ = 1.0;
};

struct PlanarSceneOptions {
  int num_views = 5;
  int height = 168;
  int width = 168;
  // Per-view random similarity + perspective relative to view 0.
  double max_translation = 0.08;   // fraction of image size
  double max_rotation_deg = 8.0;
  double max_log_scale = 0.08;
  double max_shear = 0.03;
  double max_perspective = 0.05;  // corner displacement fraction
  uint64_t seed = 0;
};

struct PointCloudSceneOptions {
  int num_views = 5;
  int height = 168;
  int width = 168;
  int num_points = 3000;
  double focal_factor = 1.0;  // focal length / image width
  double baseline = 0.6;      // camera spread in scene units
  uint64_t seed = 0;
};

SceneOracle MakePlanarScene(const PlanarSceneOptions& options);
SceneOracle MakePointCloudScene(const PointCloudSceneOptions& options);

// Exact dense correspondence: visible pixels get confidence 1, others 0 and
// their target falls back to the source pixel coordinate.
DenseWarpField GtWarp(const SceneOracle& oracle, int source, int target);

// Distance of each visible slot to the ground-truth transfer of the track's
// source coordinate. Invisible slots are nullopt; slot 0 is 0.
std::vector<std::optional<double>> GtTrackError(const SceneOracle& oracle,
                                                const ImageGroup& group,
                                                const TrackToken& track);

// Planar scenes: homography taking source-view pixels to target-view pixels.
Eigen::Matrix3d PairHomography(const SceneOracle& oracle, int source,
                               int target);

// Condition number (2-norm) of a 3x3 matrix.
double ConditionNumber(const Eigen::Matrix3d& m);

}  // namespace mvm
