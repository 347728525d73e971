#include "mvmatch/app/config.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mvmatch/core/check.h"

namespace mvm {
namespace {

using nlohmann::json;

// Copies known keys of one section into `out`, rejecting unknown keys.
class Section {
 public:
  Section(const json& root, const char* name) : name_(name) {
    if (root.contains(name)) {
      MVM_CHECK(root.at(name).is_object(),
                std::string("config section must be an object: ") + name);
      obj_ = root.at(name);
    } else {
      obj_ = json::object();
    }
  }

  template <typename T>
  void Get(const char* key, T* out) {
    seen_.push_back(key);
    if (!obj_.contains(key)) return;
    try {
      *out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      MVM_CHECK(false, std::string("bad value for ") + name_ + "." + key);
    }
  }

  void Finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (const std::string& k : seen_) known = known || k == it.key();
      MVM_CHECK(known, std::string("unknown config key ") + name_ + "." +
                           it.key());
    }
  }

 private:
  std::string name_;
  json obj_;
  std::vector<std::string> seen_;
};

}  // namespace

void AppConfig::Validate() const {
  MVM_CHECK(scene.kind == "planar" || scene.kind == "point_cloud",
            "scene.kind must be planar or point_cloud");
  MVM_CHECK(scene.num_views >= 2, "scene.num_views must be >= 2");
  MVM_CHECK(scene.downscale >= 1 && scene.base_resolution % scene.downscale == 0,
            "scene.downscale must divide scene.base_resolution");
  MVM_CHECK(ImageSize() >= 16, "working image size must be >= 16");
  MVM_CHECK(scene.num_points >= 1, "scene.num_points must be >= 1");
  MVM_CHECK(tracks.num_tracks >= 1 && tracks.raw_matches >= 1,
            "tracks counts must be >= 1");
  MVM_CHECK(tracks.noise_sigma >= 0.0, "tracks.noise_sigma must be >= 0");
  MVM_CHECK(tracks.outlier_rate >= 0.0 && tracks.outlier_rate <= 1.0,
            "tracks.outlier_rate must be in [0, 1]");
  MVM_CHECK(matcher.kind == "oracle" || matcher.kind == "ground_truth",
            "matcher.kind must be oracle or ground_truth");
  MVM_CHECK(matcher.targets_per_group >= 1,
            "matcher.targets_per_group must be >= 1");
  MVM_CHECK(matcher.alignment == "inverse_warp" ||
                matcher.alignment == "reverse_pass" ||
                matcher.alignment == "gather",
            "matcher.alignment must be inverse_warp, reverse_pass or gather");
  MVM_CHECK(postprocess.eps_p > 0.0, "postprocess.eps_p must be > 0");
  MVM_CHECK(postprocess.nms_radius >= 1, "postprocess.nms_radius must be >= 1");
  MVM_CHECK(groups.budget == "full" || groups.budget == "half",
            "groups.budget must be full or half");
  MVM_CHECK(groups.max_targets >= 1, "groups.max_targets must be >= 1");
  MVM_CHECK(!eval.homography_thresholds.empty() &&
                !eval.triangulation_thresholds_cm.empty(),
            "eval thresholds must be non-empty");
  for (double t : eval.homography_thresholds) {
    MVM_CHECK(t > 0.0, "homography thresholds must be > 0");
  }
  for (double t : eval.triangulation_thresholds_cm) {
    MVM_CHECK(t > 0.0, "triangulation thresholds must be > 0");
  }
  MVM_CHECK(eval.units_per_cm > 0.0, "eval.units_per_cm must be > 0");
  MVM_CHECK(eval.max_matches >= 4, "eval.max_matches must be >= 4");
}

AppConfig ConfigFromJson(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    MVM_CHECK(false, std::string("config is not valid JSON: ") + e.what());
  }
  MVM_CHECK(root.is_object(), "config must be a JSON object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string& k = it.key();
    MVM_CHECK(k == "scene" || k == "tracks" || k == "matcher" ||
                  k == "postprocess" || k == "groups" || k == "eval",
              "unknown config section " + k);
  }
  AppConfig c;
  {
    Section s(root, "scene");
    s.Get("kind", &c.scene.kind);
    s.Get("num_views", &c.scene.num_views);
    s.Get("base_resolution", &c.scene.base_resolution);
    s.Get("downscale", &c.scene.downscale);
    s.Get("num_points", &c.scene.num_points);
    s.Get("baseline", &c.scene.baseline);
    s.Finish();
  }
  {
    Section s(root, "tracks");
    s.Get("num_tracks", &c.tracks.num_tracks);
    s.Get("raw_matches", &c.tracks.raw_matches);
    s.Get("noise_sigma", &c.tracks.noise_sigma);
    s.Get("outlier_rate", &c.tracks.outlier_rate);
    s.Get("normalize", &c.tracks.normalize);
    s.Finish();
  }
  {
    Section s(root, "matcher");
    s.Get("kind", &c.matcher.kind);
    s.Get("targets_per_group", &c.matcher.targets_per_group);
    s.Get("use_tracks", &c.matcher.use_tracks);
    s.Get("coarse_stride", &c.matcher.coarse_stride);
    s.Get("strides", &c.matcher.strides);
    s.Get("windows", &c.matcher.windows);
    s.Get("mvfuse_strides", &c.matcher.mvfuse_strides);
    s.Get("mvfuse_iterations", &c.matcher.mvfuse_iterations);
    s.Get("hidden", &c.matcher.hidden);
    s.Get("inverse_temperature", &c.matcher.inverse_temperature);
    s.Get("alignment", &c.matcher.alignment);
    s.Get("confidence_sigma_px", &c.matcher.confidence_sigma_px);
    s.Finish();
  }
  {
    Section s(root, "postprocess");
    s.Get("eps_p", &c.postprocess.eps_p);
    s.Get("tau", &c.postprocess.tau);
    s.Get("nms_radius", &c.postprocess.nms_radius);
    s.Finish();
  }
  {
    Section s(root, "groups");
    s.Get("tau", &c.groups.tau);
    s.Get("beta", &c.groups.beta);
    s.Get("tau_conf", &c.groups.tau_conf);
    s.Get("alpha_src", &c.groups.alpha_src);
    s.Get("alpha_tgt", &c.groups.alpha_tgt);
    s.Get("lambda", &c.groups.lambda);
    s.Get("max_targets", &c.groups.max_targets);
    s.Get("budget", &c.groups.budget);
    s.Get("stochastic", &c.groups.stochastic);
    s.Finish();
  }
  {
    Section s(root, "eval");
    s.Get("homography_thresholds", &c.eval.homography_thresholds);
    s.Get("max_matches", &c.eval.max_matches);
    s.Get("ransac_threshold", &c.eval.ransac_threshold);
    s.Get("ransac_max_iterations", &c.eval.ransac_max_iterations);
    s.Get("triangulation_thresholds_cm", &c.eval.triangulation_thresholds_cm);
    s.Get("units_per_cm", &c.eval.units_per_cm);
    s.Finish();
  }
  c.Validate();
  return c;
}

std::string ConfigToJson(const AppConfig& c) {
  json j;
  j["scene"] = {{"kind", c.scene.kind},
                {"num_views", c.scene.num_views},
                {"base_resolution", c.scene.base_resolution},
                {"downscale", c.scene.downscale},
                {"num_points", c.scene.num_points},
                {"baseline", c.scene.baseline}};
  j["tracks"] = {{"num_tracks", c.tracks.num_tracks},
                 {"raw_matches", c.tracks.raw_matches},
                 {"noise_sigma", c.tracks.noise_sigma},
                 {"outlier_rate", c.tracks.outlier_rate},
                 {"normalize", c.tracks.normalize}};
  j["matcher"] = {{"kind", c.matcher.kind},
                  {"targets_per_group", c.matcher.targets_per_group},
                  {"use_tracks", c.matcher.use_tracks},
                  {"coarse_stride", c.matcher.coarse_stride},
                  {"strides", c.matcher.strides},
                  {"windows", c.matcher.windows},
                  {"mvfuse_strides", c.matcher.mvfuse_strides},
                  {"mvfuse_iterations", c.matcher.mvfuse_iterations},
                  {"hidden", c.matcher.hidden},
                  {"inverse_temperature", c.matcher.inverse_temperature},
                  {"alignment", c.matcher.alignment},
                  {"confidence_sigma_px", c.matcher.confidence_sigma_px}};
  j["postprocess"] = {{"eps_p", c.postprocess.eps_p},
                      {"tau", c.postprocess.tau},
                      {"nms_radius", c.postprocess.nms_radius}};
  j["groups"] = {{"tau", c.groups.tau},
                 {"beta", c.groups.beta},
                 {"tau_conf", c.groups.tau_conf},
                 {"alpha_src", c.groups.alpha_src},
                 {"alpha_tgt", c.groups.alpha_tgt},
                 {"lambda", c.groups.lambda},
                 {"max_targets", c.groups.max_targets},
                 {"budget", c.groups.budget},
                 {"stochastic", c.groups.stochastic}};
  j["eval"] = {{"homography_thresholds", c.eval.homography_thresholds},
               {"max_matches", c.eval.max_matches},
               {"ransac_threshold", c.eval.ransac_threshold},
               {"ransac_max_iterations", c.eval.ransac_max_iterations},
               {"triangulation_thresholds_cm",
                c.eval.triangulation_thresholds_cm},
               {"units_per_cm", c.eval.units_per_cm}};
  return j.dump(2) + "\n";
}

AppConfig LoadConfig(const std::string& path) {
  if (path.empty()) return AppConfig{};
  std::ifstream in(path);
  MVM_CHECK(in.good(), "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ConfigFromJson(ss.str());
}

}  // namespace mvm
