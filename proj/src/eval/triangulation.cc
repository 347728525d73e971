#include "mvmatch/eval/triangulation.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "mvmatch/core/check.h"

namespace mvm {

TriangulationStatus TriangulateDlt(
    std::span<const Eigen::Matrix<double, 3, 4>> projections,
    std::span<const Eigen::Vector2d> pixels, Eigen::Vector3d* point) {
  MVM_CHECK(projections.size() == pixels.size(), "observation count mismatch");
  MVM_CHECK(projections.size() >= 2, "need at least two views");
  Eigen::MatrixXd a(2 * projections.size(), 4);
  for (size_t i = 0; i < projections.size(); ++i) {
    const auto& p = projections[i];
    a.row(2 * i) = pixels[i].x() * p.row(2) - p.row(0);
    a.row(2 * i + 1) = pixels[i].y() * p.row(2) - p.row(1);
    a.row(2 * i).normalize();
    a.row(2 * i + 1).normalize();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  if (s(2) < 1e-9 * s(0)) return TriangulationStatus::kDegenerate;
  const Eigen::Vector4d x = svd.matrixV().col(3);
  if (std::abs(x(3)) < 1e-14 * x.head<3>().norm()) {
    return TriangulationStatus::kDegenerate;
  }
  *point = x.head<3>() / x(3);
  return TriangulationStatus::kOk;
}

double ReprojectionError(const PinholeCamera& camera, const Eigen::Vector3d& x,
                         const Eigen::Vector2d& pixel) {
  const auto q = camera.Project(x);
  if (!q) return INFINITY;
  return (*q - pixel).norm();
}

TriangulationResult TriangulateTracks(std::span<const SceneTrack> tracks,
                                      std::span<const PinholeCamera> cameras) {
  TriangulationResult result;
  std::vector<Eigen::Matrix<double, 3, 4>> all_proj;
  for (const PinholeCamera& c : cameras) all_proj.push_back(c.ProjectionMatrix());
  for (size_t t = 0; t < tracks.size(); ++t) {
    const SceneTrack& track = tracks[t];
    if (track.size() < 2) {
      ++result.skipped_short;
      continue;
    }
    std::vector<Eigen::Matrix<double, 3, 4>> proj;
    std::vector<Eigen::Vector2d> pix;
    for (const TrackObservation& obs : track) {
      MVM_CHECK(obs.view_id >= 0 &&
                    obs.view_id < static_cast<int>(cameras.size()),
                "track view id has no camera");
      proj.push_back(all_proj[obs.view_id]);
      pix.emplace_back(obs.coord.x, obs.coord.y);
    }
    Eigen::Vector3d x;
    if (TriangulateDlt(proj, pix, &x) != TriangulationStatus::kOk) {
      ++result.degenerate;
      continue;
    }
    bool in_front = true;
    double max_err = 0.0;
    for (size_t i = 0; i < track.size(); ++i) {
      const PinholeCamera& cam = cameras[track[i].view_id];
      if (!(cam.ToCamera(x).z() > 0.0)) {
        in_front = false;
        break;
      }
      max_err = std::max(max_err, ReprojectionError(cam, x, pix[i]));
    }
    if (!in_front) {
      ++result.cheirality_rejected;
      continue;
    }
    result.points.push_back({x, static_cast<int>(t), max_err});
  }
  return result;
}

}  // namespace mvm
