#pragma once

#include <optional>

#include <Eigen/Core>

namespace mvm {

// Pinhole camera x ~ K (R X + t). No distortion.
struct PinholeCamera {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d Center() const { return -rotation.transpose() * translation; }
  Eigen::Vector3d ToCamera(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }
  Eigen::Matrix<double, 3, 4> ProjectionMatrix() const;

  // Pixel of a world point, or nullopt when the point is not strictly in
  // front of the camera. Writes the camera-frame depth if requested.
  std::optional<Eigen::Vector2d> Project(const Eigen::Vector3d& x,
                                         double* depth = nullptr) const;

  // World-frame ray direction through a pixel, scaled so that its
  // camera-frame z component is 1 (ray parameter = depth).
  Eigen::Vector3d Ray(const Eigen::Vector2d& pixel) const;

  void Validate() const;

  // Camera at eye looking at target with the given up hint (y down image).
  static PinholeCamera LookAt(const Eigen::Matrix3d& intrinsics,
                              const Eigen::Vector3d& eye,
                              const Eigen::Vector3d& target,
                              const Eigen::Vector3d& up);
};

// Rectangle center + s * axis_u + t * axis_v, |s| <= half_u, |t| <= half_v.
struct SurfacePatch {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_v = Eigen::Vector3d::UnitY();
  double half_u = 1.0;
  double half_v = 1.0;

  // Ray parameter of the first intersection with t > 0, if any.
  std::optional<double> Intersect(const Eigen::Vector3d& origin,
                                  const Eigen::Vector3d& direction) const;
  double Area() const { return 4.0 * half_u * half_v; }
};

}  // namespace mvm
