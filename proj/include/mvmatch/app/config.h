#pragma once

#include <string>
#include <vector>

namespace mvm {

// Every tunable of the command-line workflows. The JSON form mirrors this
// layout section by section; missing keys keep their defaults and unknown
// keys are rejected.
struct AppConfig {
  struct Scene {
    std::string kind = "planar";  // planar | point_cloud
    int num_views = 5;
    int base_resolution = 672;
    int downscale = 4;  // working size = base_resolution / downscale
    int num_points = 3000;
    double baseline = 0.6;
  } scene;

  struct Tracks {
    int num_tracks = 512;
    int raw_matches = 4096;
    double noise_sigma = 0.5;
    double outlier_rate = 0.05;
    bool normalize = false;
  } tracks;

  struct Matcher {
    std::string kind = "oracle";  // oracle | ground_truth
    int targets_per_group = 4;
    bool use_tracks = true;
    int coarse_stride = 8;
    std::vector<int> strides = {8, 4, 2, 1};
    std::vector<int> windows = {5, 3, 3, 3};
    std::vector<int> mvfuse_strides = {8, 1};
    int mvfuse_iterations = 2;
    int hidden = 16;
    double inverse_temperature = 160.0;
    std::string alignment = "inverse_warp";  // inverse_warp | reverse_pass | gather
    double confidence_sigma_px = 0.25;
  } matcher;

  struct Postprocess {
    double eps_p = 3.0;
    double tau = 0.3;
    int nms_radius = 2;
  } postprocess;

  struct Groups {
    double tau = 0.3;
    double beta = 0.75;
    double tau_conf = 0.3;
    double alpha_src = 1.0;
    double alpha_tgt = 0.25;
    double lambda = 1.0;
    int max_targets = 4;
    std::string budget = "full";  // full | half
    bool stochastic = false;
  } groups;

  struct Eval {
    std::vector<double> homography_thresholds = {1.0, 3.0, 5.0};
    int max_matches = 5000;
    double ransac_threshold = 3.0;
    int ransac_max_iterations = 2000;
    std::vector<double> triangulation_thresholds_cm = {1.0, 2.0, 5.0};
    double units_per_cm = 0.01;
  } eval;

  int ImageSize() const { return scene.base_resolution / scene.downscale; }
  void Validate() const;
};

AppConfig ConfigFromJson(const std::string& text);
std::string ConfigToJson(const AppConfig& config);
// Empty path returns the defaults.
AppConfig LoadConfig(const std::string& path);

}  // namespace mvm
