#include "mvmatch/synth/camera.h"

#include <cmath>

#include <Eigen/Geometry>

#include "mvmatch/core/check.h"

namespace mvm {

Eigen::Matrix<double, 3, 4> PinholeCamera::ProjectionMatrix() const {
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = rotation;
  rt.col(3) = translation;
  return intrinsics * rt;
}

std::optional<Eigen::Vector2d> PinholeCamera::Project(const Eigen::Vector3d& x,
                                                      double* depth) const {
  const Eigen::Vector3d xc = ToCamera(x);
  if (depth != nullptr) *depth = xc.z();
  if (!(xc.z() > 0.0)) return std::nullopt;
  const Eigen::Vector3d h = intrinsics * xc;
  return Eigen::Vector2d(h.x() / h.z(), h.y() / h.z());
}

Eigen::Vector3d PinholeCamera::Ray(const Eigen::Vector2d& pixel) const {
  Eigen::Vector3d dir_cam = intrinsics.inverse() * pixel.homogeneous();
  dir_cam /= dir_cam.z();
  return rotation.transpose() * dir_cam;
}

void PinholeCamera::Validate() const {
  const double err =
      (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).norm();
  MVM_CHECK(err < 1e-9, "rotation not orthonormal");
  MVM_CHECK(rotation.determinant() > 0.0, "rotation is a reflection");
  MVM_CHECK(intrinsics(0, 0) > 0.0 && intrinsics(1, 1) > 0.0,
            "focal lengths must be positive");
  MVM_CHECK(intrinsics.allFinite() && translation.allFinite(),
            "non-finite camera");
}

PinholeCamera PinholeCamera::LookAt(const Eigen::Matrix3d& intrinsics,
                                    const Eigen::Vector3d& eye,
                                    const Eigen::Vector3d& target,
                                    const Eigen::Vector3d& up) {
  const Eigen::Vector3d z = (target - eye).normalized();
  const Eigen::Vector3d x = (-up).cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  PinholeCamera cam;
  cam.intrinsics = intrinsics;
  cam.rotation.row(0) = x.transpose();
  cam.rotation.row(1) = y.transpose();
  cam.rotation.row(2) = z.transpose();
  cam.translation = -cam.rotation * eye;
  return cam;
}

std::optional<double> SurfacePatch::Intersect(
    const Eigen::Vector3d& origin, const Eigen::Vector3d& direction) const {
  const Eigen::Vector3d normal = axis_u.cross(axis_v);
  const double denom = normal.dot(direction);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = normal.dot(center - origin) / denom;
  if (!(t > 0.0)) return std::nullopt;
  const Eigen::Vector3d rel = origin + t * direction - center;
  if (std::abs(rel.dot(axis_u)) > half_u || std::abs(rel.dot(axis_v)) > half_v) {
    return std::nullopt;
  }
  return t;
}

}  // namespace mvm
