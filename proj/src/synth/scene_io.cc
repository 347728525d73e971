#include "mvmatch/synth/scene_io.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mvm {
namespace {

using nlohmann::json;

template <typename Derived>
json ToArray(const Eigen::MatrixBase<Derived>& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  }
  return a;
}

Eigen::Matrix3d Mat3(const json& a) {
  if (!a.is_array() || a.size() != 9) {
    throw std::runtime_error("scene: expected 9 numbers");
  }
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = a[i].get<double>();
  return m;
}

Eigen::Vector3d Vec3(const json& a) {
  if (!a.is_array() || a.size() != 3) {
    throw std::runtime_error("scene: expected 3 numbers");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace

std::string SceneToJson(const SceneOracle& scene) {
  json j;
  j["kind"] = scene.kind() == SceneKind::kPlanar ? "planar" : "point-cloud";
  j["height"] = scene.height();
  j["width"] = scene.width();
  j["seed"] = scene.seed();
  if (scene.kind() == SceneKind::kPlanar) {
    json hs = json::array();
    for (const auto& h : scene.homographies()) hs.push_back(ToArray(h));
    j["homographies"] = hs;
  } else {
    json cams = json::array();
    for (const auto& c : scene.cameras()) {
      cams.push_back({{"K", ToArray(c.intrinsics)},
                      {"R", ToArray(c.rotation)},
                      {"t", ToArray(c.translation)}});
    }
    j["cameras"] = cams;
    json surfs = json::array();
    for (const auto& s : scene.surfaces()) {
      surfs.push_back({{"center", ToArray(s.center)},
                       {"axis_u", ToArray(s.axis_u)},
                       {"axis_v", ToArray(s.axis_v)},
                       {"half_extents", {s.half_u, s.half_v}}});
    }
    j["surfaces"] = surfs;
    json pts = json::array();
    for (const auto& p : scene.points()) pts.push_back(ToArray(p));
    j["points"] = pts;
  }
  return j.dump(1) + "\n";
}

SceneOracle SceneFromJson(const std::string& text) {
  const json j = json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  const int height = j.at("height").get<int>();
  const int width = j.at("width").get<int>();
  const uint64_t seed = j.at("seed").get<uint64_t>();
  if (kind == "planar") {
    std::vector<Eigen::Matrix3d> hs;
    for (const auto& h : j.at("homographies")) hs.push_back(Mat3(h));
    return SceneOracle::Planar(height, width, std::move(hs), seed);
  }
  if (kind != "point-cloud") throw std::runtime_error("scene: unknown kind");
  std::vector<PinholeCamera> cams;
  for (const auto& c : j.at("cameras")) {
    PinholeCamera cam;
    cam.intrinsics = Mat3(c.at("K"));
    cam.rotation = Mat3(c.at("R"));
    cam.translation = Vec3(c.at("t"));
    cams.push_back(cam);
  }
  std::vector<SurfacePatch> surfs;
  for (const auto& s : j.value("surfaces", json::array())) {
    SurfacePatch patch;
    patch.center = Vec3(s.at("center"));
    patch.axis_u = Vec3(s.at("axis_u"));
    patch.axis_v = Vec3(s.at("axis_v"));
    patch.half_u = s.at("half_extents").at(0).get<double>();
    patch.half_v = s.at("half_extents").at(1).get<double>();
    surfs.push_back(patch);
  }
  std::vector<Eigen::Vector3d> pts;
  for (const auto& p : j.value("points", json::array())) pts.push_back(Vec3(p));
  return SceneOracle::PointCloud(height, width, std::move(cams),
                                 std::move(surfs), std::move(pts), seed);
}

void WriteScene(const std::string& path, const SceneOracle& scene) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path);
  file << SceneToJson(scene);
}

SceneOracle ReadScene(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return SceneFromJson(buffer.str());
}

}  // namespace mvm
