#include "mvmatch/synth/scene.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"

namespace mvm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTextureTerms = 6;

Eigen::Matrix3d Translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return m;
}

}  // namespace

double ConditionNumber(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto s = svd.singularValues();
  if (s(2) <= 0.0) return kInf;
  return s(0) / s(2);
}

SceneOracle SceneOracle::Planar(int height, int width,
                                std::vector<Eigen::Matrix3d> homographies,
                                uint64_t seed) {
  MVM_CHECK(height > 0 && width > 0, "image size");
  MVM_CHECK(homographies.size() >= 2, "need at least two views");
  SceneOracle scene;
  scene.kind_ = SceneKind::kPlanar;
  scene.height_ = height;
  scene.width_ = width;
  scene.seed_ = seed;
  for (const Eigen::Matrix3d& h : homographies) {
    MVM_CHECK(h.allFinite(), "non-finite homography");
    MVM_CHECK(ConditionNumber(h) < kMaxCondition, "degenerate homography");
    scene.inverse_homographies_.push_back(h.inverse());
  }
  scene.homographies_ = std::move(homographies);
  scene.Finalize();
  return scene;
}

SceneOracle SceneOracle::PointCloud(int height, int width,
                                    std::vector<PinholeCamera> cameras,
                                    std::vector<SurfacePatch> surfaces,
                                    std::vector<Eigen::Vector3d> points,
                                    uint64_t seed) {
  MVM_CHECK(height > 0 && width > 0, "image size");
  MVM_CHECK(cameras.size() >= 2, "need at least two views");
  for (const PinholeCamera& cam : cameras) cam.Validate();
  SceneOracle scene;
  scene.kind_ = SceneKind::kPointCloud;
  scene.height_ = height;
  scene.width_ = width;
  scene.seed_ = seed;
  scene.cameras_ = std::move(cameras);
  scene.surfaces_ = std::move(surfaces);
  scene.points_ = std::move(points);
  scene.Finalize();
  return scene;
}

void SceneOracle::Finalize() {
  if (kind_ == SceneKind::kPointCloud) {
    zbuffers_.assign(cameras_.size(),
                     std::vector<double>(static_cast<size_t>(height_) * width_,
                                         kInf));
    std::vector<double> finite_depths;
    for (size_t v = 0; v < cameras_.size(); ++v) {
      const Eigen::Vector3d origin = cameras_[v].Center();
      for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) {
          const Eigen::Vector3d dir = cameras_[v].Ray(Eigen::Vector2d(c, r));
          double best = kInf;
          for (const SurfacePatch& s : surfaces_) {
            if (auto t = s.Intersect(origin, dir); t && *t < best) best = *t;
          }
          zbuffers_[v][static_cast<size_t>(r) * width_ + c] = best;
          if (v == 0 && std::isfinite(best)) finite_depths.push_back(best);
        }
      }
    }
    if (!finite_depths.empty()) {
      auto mid = finite_depths.begin() + finite_depths.size() / 2;
      std::nth_element(finite_depths.begin(), mid, finite_depths.end());
      units_per_pixel_ = *mid / cameras_[0].intrinsics(0, 0);
    }
  } else {
    units_per_pixel_ = 1.0;
  }

  Rng rng(MixSeed(seed_, 17));
  texture_freqs_.clear();
  texture_phases_.clear();
  for (int k = 0; k < kTextureTerms; ++k) {
    Eigen::Vector3d dir;
    if (kind_ == SceneKind::kPlanar) {
      const double a = rng.Uniform(0.0, std::numbers::pi);
      dir = Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
    } else {
      dir = Eigen::Vector3d(rng.Normal(), rng.Normal(), rng.Normal())
                .normalized();
    }
    const double wavelength = rng.Uniform(10.0, 30.0) * units_per_pixel_;
    texture_freqs_.push_back(dir * (2.0 * std::numbers::pi / wavelength));
    texture_phases_.push_back(rng.Uniform(0.0, 2.0 * std::numbers::pi));
  }
}

int SceneOracle::NumViews() const {
  return kind_ == SceneKind::kPlanar ? static_cast<int>(homographies_.size())
                                     : static_cast<int>(cameras_.size());
}

bool SceneOracle::InFrame(GridCoord p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ - 1.0 &&
         p.y <= height_ - 1.0;
}

std::optional<Eigen::Vector3d> SceneOracle::SurfacePoint(int view,
                                                         GridCoord p) const {
  MVM_CHECK(view >= 0 && view < NumViews(), "view index");
  if (kind_ == SceneKind::kPlanar) {
    const Eigen::Vector3d r = homographies_[view] * Eigen::Vector3d(p.x, p.y, 1);
    if (!(r.z() > 0.0)) return std::nullopt;
    return Eigen::Vector3d(r.x() / r.z(), r.y() / r.z(), 0.0);
  }
  const PinholeCamera& cam = cameras_[view];
  const Eigen::Vector3d origin = cam.Center();
  const Eigen::Vector3d dir = cam.Ray(Eigen::Vector2d(p.x, p.y));
  double best = kInf;
  for (const SurfacePatch& s : surfaces_) {
    if (auto t = s.Intersect(origin, dir); t && *t < best) best = *t;
  }
  if (!std::isfinite(best)) return std::nullopt;
  return origin + best * dir;
}

std::optional<GridCoord> SceneOracle::Transfer(int source, int target,
                                               GridCoord p) const {
  MVM_CHECK(source >= 0 && source < NumViews(), "source index");
  MVM_CHECK(target >= 0 && target < NumViews(), "target index");
  if (kind_ == SceneKind::kPlanar) {
    const Eigen::Vector3d r = homographies_[source] * Eigen::Vector3d(p.x, p.y, 1);
    if (!(r.z() > 0.0)) return std::nullopt;
    const Eigen::Vector3d q = inverse_homographies_[target] * r;
    if (!(q.z() > 0.0)) return std::nullopt;
    return GridCoord{q.x() / q.z(), q.y() / q.z()};
  }
  const auto x = SurfacePoint(source, p);
  if (!x) return std::nullopt;
  const auto q = cameras_[target].Project(*x);
  if (!q) return std::nullopt;
  return GridCoord{q->x(), q->y()};
}

bool SceneOracle::DepthTest(int view, const Eigen::Vector2d& pixel,
                            double depth) const {
  const int c = std::clamp(static_cast<int>(std::lround(pixel.x())), 0,
                           width_ - 1);
  const int r = std::clamp(static_cast<int>(std::lround(pixel.y())), 0,
                           height_ - 1);
  const double z = zbuffers_[view][static_cast<size_t>(r) * width_ + c];
  return !std::isfinite(z) || depth <= z * (1.0 + kDepthTolerance);
}

bool SceneOracle::Covisible(int source, int target, GridCoord p) const {
  if (kind_ == SceneKind::kPlanar) {
    const auto q = Transfer(source, target, p);
    return q && InFrame(*q);
  }
  const auto x = SurfacePoint(source, p);
  if (!x) return false;
  return PointVisible(target, *x);
}

bool SceneOracle::PointVisible(int view, const Eigen::Vector3d& x) const {
  MVM_CHECK(kind_ == SceneKind::kPointCloud, "point-cloud scenes only");
  MVM_CHECK(view >= 0 && view < NumViews(), "view index");
  double depth = 0.0;
  const auto q = cameras_[view].Project(x, &depth);
  if (!q || !InFrame({q->x(), q->y()})) return false;
  return DepthTest(view, *q, depth);
}

double SceneOracle::Depth(int view, int row, int col) const {
  MVM_CHECK(kind_ == SceneKind::kPointCloud, "point-cloud scenes only");
  return zbuffers_.at(view).at(static_cast<size_t>(row) * width_ + col);
}

double SceneOracle::Texture(const Eigen::Vector3d& x) const {
  double v = 0.0;
  for (size_t k = 0; k < texture_freqs_.size(); ++k) {
    v += std::cos(texture_freqs_[k].dot(x) + texture_phases_[k]);
  }
  return v / std::sqrt(static_cast<double>(texture_freqs_.size()));
}

SceneOracle MakePlanarScene(const PlanarSceneOptions& o) {
  MVM_CHECK(o.num_views >= 2, "need at least two views");
  Rng rng(MixSeed(o.seed, 1));
  const double cx = (o.width - 1) / 2.0;
  const double cy = (o.height - 1) / 2.0;
  std::vector<Eigen::Matrix3d> homographies;
  homographies.push_back(Eigen::Matrix3d::Identity());
  for (int v = 1; v < o.num_views; ++v) {
    const double angle =
        rng.Uniform(-1.0, 1.0) * o.max_rotation_deg * std::numbers::pi / 180.0;
    const double scale = std::exp(rng.Uniform(-1.0, 1.0) * o.max_log_scale);
    const double shear = rng.Uniform(-1.0, 1.0) * o.max_shear;
    const double tx = rng.Uniform(-1.0, 1.0) * o.max_translation * o.width;
    const double ty = rng.Uniform(-1.0, 1.0) * o.max_translation * o.height;
    const double px = rng.Uniform(-1.0, 1.0) * o.max_perspective / (o.width / 2.0);
    const double py = rng.Uniform(-1.0, 1.0) * o.max_perspective / (o.height / 2.0);

    Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
    a(0, 0) = scale * std::cos(angle);
    a(0, 1) = -scale * std::sin(angle);
    a(1, 0) = scale * std::sin(angle);
    a(1, 1) = scale * std::cos(angle);
    Eigen::Matrix3d sh = Eigen::Matrix3d::Identity();
    sh(0, 1) = shear;
    Eigen::Matrix3d persp = Eigen::Matrix3d::Identity();
    persp(2, 0) = px;
    persp(2, 1) = py;
    // Reference plane -> view pixels.
    const Eigen::Matrix3d ref_to_view = Translation(cx + tx, cy + ty) * a * sh *
                                        persp * Translation(-cx, -cy);
    Eigen::Matrix3d h = ref_to_view.inverse();
    h /= h(2, 2);
    homographies.push_back(h);
  }
  return SceneOracle::Planar(o.height, o.width, std::move(homographies),
                             o.seed);
}

SceneOracle MakePointCloudScene(const PointCloudSceneOptions& o) {
  MVM_CHECK(o.num_views >= 2, "need at least two views");
  MVM_CHECK(o.num_points >= 1, "need points");
  Rng rng(MixSeed(o.seed, 2));
  auto jitter = [&](double s) { return rng.Uniform(-s, s); };

  // World frame: x right, y down, z forward.
  std::vector<SurfacePatch> surfaces;
  surfaces.push_back({Eigen::Vector3d(0, 0, 3.0 + jitter(0.2)),
                      Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), 2.4,
                      1.8});
  surfaces.push_back({Eigen::Vector3d(0, 1.0 + jitter(0.1), 2.0),
                      Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(), 2.4,
                      1.2});
  surfaces.push_back(
      {Eigen::Vector3d(-0.5 + jitter(0.1), 0.3 + jitter(0.1), 2.0 + jitter(0.1)),
       Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), 0.3, 0.45});
  surfaces.push_back(
      {Eigen::Vector3d(0.55 + jitter(0.1), 0.2 + jitter(0.1), 2.3 + jitter(0.1)),
       Eigen::Vector3d(1, 0, 0.6).normalized(), Eigen::Vector3d::UnitY(), 0.3,
       0.55});

  const double f = o.focal_factor * o.width;
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = f;
  k(1, 1) = f;
  k(0, 2) = (o.width - 1) / 2.0;
  k(1, 2) = (o.height - 1) / 2.0;

  std::vector<PinholeCamera> cameras;
  const Eigen::Vector3d look(jitter(0.1), 0.25 + jitter(0.05), 2.6);
  for (int v = 0; v < o.num_views; ++v) {
    const double s = o.num_views == 1 ? 0.0 : 2.0 * v / (o.num_views - 1) - 1.0;
    const Eigen::Vector3d eye(s * o.baseline + jitter(0.05), jitter(0.15),
                              -0.4 + jitter(0.1));
    const Eigen::Vector3d target = look + Eigen::Vector3d(jitter(0.15), jitter(0.1), 0);
    cameras.push_back(
        PinholeCamera::LookAt(k, eye, target, Eigen::Vector3d(0, -1, 0)));
  }

  // First pass builds z-buffers so point visibility can be tested.
  SceneOracle probe = SceneOracle::PointCloud(o.height, o.width, cameras,
                                              surfaces, {}, o.seed);
  double total_area = 0.0;
  for (const SurfacePatch& s : surfaces) total_area += s.Area();
  std::vector<Eigen::Vector3d> points;
  const int max_attempts = 50 * o.num_points;
  for (int attempt = 0;
       attempt < max_attempts && static_cast<int>(points.size()) < o.num_points;
       ++attempt) {
    double pick = rng.Uniform() * total_area;
    size_t idx = 0;
    while (idx + 1 < surfaces.size() && pick > surfaces[idx].Area()) {
      pick -= surfaces[idx].Area();
      ++idx;
    }
    const SurfacePatch& s = surfaces[idx];
    const Eigen::Vector3d x = s.center +
                              rng.Uniform(-s.half_u, s.half_u) * s.axis_u +
                              rng.Uniform(-s.half_v, s.half_v) * s.axis_v;
    int seen = 0;
    for (int v = 0; v < o.num_views; ++v) seen += probe.PointVisible(v, x);
    if (seen >= 2) points.push_back(x);
  }
  return SceneOracle::PointCloud(o.height, o.width, std::move(cameras),
                                 std::move(surfaces), std::move(points),
                                 o.seed);
}

Eigen::Matrix3d PairHomography(const SceneOracle& oracle, int source,
                               int target) {
  MVM_CHECK(oracle.kind() == SceneKind::kPlanar, "scene is not planar");
  MVM_CHECK(source >= 0 && source < oracle.NumViews() && target >= 0 &&
                target < oracle.NumViews(),
            "view index");
  const auto& h = oracle.homographies();
  Eigen::Matrix3d m = h[target].inverse() * h[source];
  return m / m(2, 2);
}

DenseWarpField GtWarp(const SceneOracle& oracle, int source, int target) {
  MVM_CHECK(source != target, "source == target");
  MVM_CHECK(source >= 0 && source < oracle.NumViews() && target >= 0 &&
                target < oracle.NumViews(),
            "view index");
  if (oracle.kind() == SceneKind::kPlanar) {
    MVM_CHECK(ConditionNumber(oracle.homographies()[source]) <
                      SceneOracle::kMaxCondition &&
                  ConditionNumber(oracle.homographies()[target]) <
                      SceneOracle::kMaxCondition,
              "degenerate homography");
  }
  DenseWarpField warp(oracle.height(), oracle.width(), 1, source, target);
  for (int r = 0; r < oracle.height(); ++r) {
    for (int c = 0; c < oracle.width(); ++c) {
      const GridCoord p{static_cast<double>(c), static_cast<double>(r)};
      const size_t i = warp.Index(r, c);
      const auto q = oracle.Transfer(source, target, p);
      if (!q) {
        warp.targets[i] = p;
        warp.confidence[i] = 0.0;
        continue;
      }
      warp.targets[i] = *q;
      warp.confidence[i] = oracle.Covisible(source, target, p) ? 1.0 : 0.0;
    }
  }
  return warp;
}

std::vector<std::optional<double>> GtTrackError(const SceneOracle& oracle,
                                                const ImageGroup& group,
                                                const TrackToken& track) {
  const std::vector<int> views = group.Views();
  MVM_CHECK(track.NumViews() == static_cast<int>(views.size()),
            "track does not match group");
  MVM_CHECK(track.NumVisible() >= 2, "track visible only in source");
  std::vector<std::optional<double>> errors(views.size());
  errors[0] = 0.0;
  for (size_t v = 1; v < views.size(); ++v) {
    if (!track.visibility[v]) continue;
    const auto gt = oracle.Transfer(views[0], views[v], track.coords[0]);
    if (!gt) {
      errors[v] = std::numeric_limits<double>::infinity();
      continue;
    }
    errors[v] = std::hypot(track.coords[v].x - gt->x, track.coords[v].y - gt->y);
  }
  return errors;
}

}  // namespace mvm
