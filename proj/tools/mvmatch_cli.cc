// Command-line front end. Every subcommand is a pure function of its config,
// seed and input files; outputs are written single-threaded in a fixed order.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "mvmatch/app/config.h"
#include "mvmatch/app/workflows.h"
#include "mvmatch/core/check.h"
#include "mvmatch/core/warp_io.h"
#include "mvmatch/synth/scene_io.h"
#include "mvmatch/tracks/track_io.h"

namespace fs = std::filesystem;
using namespace mvm;

namespace {

struct Args {
  std::string config;
  uint64_t seed = 0;
  std::string scene;
  std::string out = ".";
  std::string input;
  std::string groups;
  std::string budget;
  std::vector<double> thresholds;
};

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  MVM_CHECK(out.good(), "cannot write " + path.string());
  out << text;
  spdlog::info("wrote {}", path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  MVM_CHECK(in.good(), "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AppConfig Config(const Args& a) {
  AppConfig c = LoadConfig(a.config);
  if (!a.budget.empty()) c.groups.budget = a.budget;
  c.Validate();
  return c;
}

fs::path OutDir(const Args& a) {
  fs::create_directories(a.out);
  return a.out;
}

SceneOracle Scene(const Args& a) {
  MVM_CHECK(!a.scene.empty(), "--scene is required");
  return ReadScene(a.scene);
}

std::string TracksName(size_t g) { return "tracks_g" + std::to_string(g) + ".tsv"; }

std::string WarpName(size_t g, size_t k) {
  return "warp_g" + std::to_string(g) + "_t" + std::to_string(k) + ".mvwf";
}

// Groups from --groups, else <input>/groups.json, else one group per view.
std::vector<ImageGroup> Groups(const Args& a, const SceneOracle& scene,
                               const AppConfig& c, bool allow_input) {
  if (!a.groups.empty()) return GroupsFromManifestJson(ReadText(a.groups));
  if (allow_input && !a.input.empty() &&
      fs::exists(fs::path(a.input) / "groups.json")) {
    return GroupsFromManifestJson(ReadText(fs::path(a.input) / "groups.json"));
  }
  return AllSourceGroups(SceneOverlap(scene, c.groups.tau_conf),
                         c.matcher.targets_per_group);
}

std::string ManifestFor(const std::vector<ImageGroup>& groups,
                        const AppConfig& c, uint64_t seed) {
  GroupPlan plan;
  plan.budget = static_cast<int>(groups.size());
  plan.stage1 = groups;
  return GroupManifestJson(plan, MakeSamplerOptions(c, seed));
}

void GenScene(const Args& a) {
  const AppConfig c = Config(a);
  const fs::path dir = OutDir(a);
  WriteScene((dir / "scene.json").string(), GenerateScene(c, a.seed));
  spdlog::info("wrote {}", (dir / "scene.json").string());
  WriteText(dir / "config.json", ConfigToJson(c));
}

void SampleGroupsCmd(const Args& a) {
  const AppConfig c = Config(a);
  const SceneOracle scene = Scene(a);
  const fs::path dir = OutDir(a);
  const OverlapMatrix overlap = SceneOverlap(scene, c.groups.tau_conf);
  const SamplerOptions opts = MakeSamplerOptions(c, a.seed);
  const GroupPlan plan = SampleGroups(overlap, opts);
  WriteText(dir / "groups.json", GroupManifestJson(plan, opts));
  WriteText(dir / "overlap.csv", OverlapCsv(overlap));
  std::string s = "metric,value\n";
  s += "budget," + std::to_string(plan.budget) + "\n";
  s += "stage1_groups," + std::to_string(plan.stage1.size()) + "\n";
  s += "stage2_groups," + std::to_string(plan.stage2.size()) + "\n";
  s += "dropped_empty," + std::to_string(plan.dropped_empty) + "\n";
  WriteText(dir / "groups.csv", s);
}

void BuildTracksCmd(const Args& a) {
  const AppConfig c = Config(a);
  const SceneOracle scene = Scene(a);
  const fs::path dir = OutDir(a);
  const std::vector<ImageGroup> groups = Groups(a, scene, c, true);
  WriteText(dir / "groups.json", ManifestFor(groups, c, a.seed));
  for (size_t g = 0; g < groups.size(); ++g) {
    std::vector<SceneTrack> tracks;
    for (const TrackToken& t : BuildGroupTracks(scene, groups[g], c, a.seed)) {
      tracks.push_back(ToSceneTrack(t, groups[g]));
    }
    WriteTracksTsv((dir / TracksName(g)).string(), scene.NumViews(), tracks);
    spdlog::info("wrote {}", (dir / TracksName(g)).string());
  }
}

void MatchCmd(const Args& a) {
  const AppConfig c = Config(a);
  const SceneOracle scene = Scene(a);
  const fs::path dir = OutDir(a);
  const std::vector<ImageGroup> groups = Groups(a, scene, c, true);
  std::vector<std::vector<TrackToken>> tracks;
  if (!a.input.empty() && fs::exists(fs::path(a.input) / TracksName(0))) {
    for (size_t g = 0; g < groups.size(); ++g) {
      const TrackFile f =
          ReadTracksTsv((fs::path(a.input) / TracksName(g)).string());
      std::vector<TrackToken> tokens;
      for (const SceneTrack& t : f.tracks) {
        tokens.push_back(TokenFromSceneTrack(t, groups[g]));
      }
      tracks.push_back(std::move(tokens));
    }
  }
  const std::vector<GroupWarps> warps =
      MatchGroups(scene, groups, tracks, c, a.seed);
  WriteText(dir / "groups.json", ManifestFor(groups, c, a.seed));
  for (size_t g = 0; g < warps.size(); ++g) {
    for (size_t k = 0; k < warps[g].warps.size(); ++k) {
      WriteWarpField((dir / WarpName(g, k)).string(), warps[g].warps[k]);
    }
  }
  spdlog::info("wrote warps for {} groups", warps.size());
}

std::vector<GroupWarps> ReadWarps(const Args& a) {
  MVM_CHECK(!a.input.empty(), "--input (match output directory) is required");
  const fs::path in = a.input;
  const std::vector<ImageGroup> groups =
      GroupsFromManifestJson(ReadText(in / "groups.json"));
  std::vector<GroupWarps> out;
  for (size_t g = 0; g < groups.size(); ++g) {
    GroupWarps gw{groups[g], {}};
    for (size_t k = 0; k < groups[g].targets.size(); ++k) {
      gw.warps.push_back(ReadWarpField((in / WarpName(g, k)).string()));
    }
    out.push_back(std::move(gw));
  }
  return out;
}

void PostprocessCmd(const Args& a) {
  const AppConfig c = Config(a);
  const std::vector<GroupWarps> warps = ReadWarps(a);
  const fs::path dir = OutDir(a);
  int num_views = 0;
  for (const GroupWarps& g : warps) {
    for (int v : g.group.Views()) num_views = std::max(num_views, v + 1);
  }
  if (!a.scene.empty()) num_views = Scene(a).NumViews();
  const PostprocessResult r = PostprocessScene(warps, MakePostprocessOptions(c));
  WriteTracksTsv((dir / "tracks.tsv").string(), num_views, r.tracks);
  spdlog::info("wrote {}", (dir / "tracks.tsv").string());
  std::string s = "metric,value\n";
  s += "candidate_matches," + std::to_string(r.stats.candidate_matches) + "\n";
  s += "kept_matches," + std::to_string(r.stats.kept_matches) + "\n";
  s += "num_tracks," + std::to_string(r.stats.num_tracks) + "\n";
  for (size_t len = 0; len < r.stats.length_histogram.size(); ++len) {
    s += "tracks_of_length_" + std::to_string(len) + "," +
         std::to_string(r.stats.length_histogram[len]) + "\n";
  }
  WriteText(dir / "postprocess.csv", s);
}

void EvalHomographyCmd(const Args& a) {
  AppConfig c = Config(a);
  if (!a.thresholds.empty()) c.eval.homography_thresholds = a.thresholds;
  c.Validate();
  const SceneOracle scene = Scene(a);
  const std::vector<GroupWarps> warps = ReadWarps(a);
  const fs::path dir = OutDir(a);
  const HomographyReport r = EvaluateHomographies(scene, warps, c, a.seed);
  WriteText(dir / "homography.csv", HomographyCsv(r));
  WriteText(dir / "homography_pairs.csv", HomographyPairsCsv(r));
}

void EvalTriangulationCmd(const Args& a) {
  AppConfig c = Config(a);
  if (!a.thresholds.empty()) c.eval.triangulation_thresholds_cm = a.thresholds;
  c.Validate();
  const SceneOracle scene = Scene(a);
  MVM_CHECK(!a.input.empty(), "--input (tracks TSV or directory) is required");
  fs::path tracks_path = a.input;
  if (fs::is_directory(tracks_path)) tracks_path /= "tracks.tsv";
  const TrackFile f = ReadTracksTsv(tracks_path.string());
  const fs::path dir = OutDir(a);
  const TriangulationReport r = EvaluateTriangulation(scene, f.tracks, c);
  WriteText(dir / "triangulation.csv", TriangulationCsv(r));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view dense matching pipeline on synthetic scenes"};
  app.require_subcommand(1);
  spdlog::set_default_logger(spdlog::stderr_logger_st("mvmatch"));

  Args a;
  struct Sub {
    const char* name;
    const char* help;
    void (*run)(const Args&);
  };
  const Sub subs[] = {
      {"gen-scene", "Generate a synthetic scene (scene.json, config.json)",
       GenScene},
      {"build-tracks", "Simulate pairwise matches and sample track tokens",
       BuildTracksCmd},
      {"match", "Run the multi-view matcher on every group (MVWF warps)",
       MatchCmd},
      {"postprocess", "Select, filter and assemble scene tracks",
       PostprocessCmd},
      {"sample-groups", "Covisibility-based group sampling", SampleGroupsCmd},
      {"eval-homography", "Homography AUC of match output (planar scenes)",
       EvalHomographyCmd},
      {"eval-triangulation",
       "Triangulation accuracy and completeness (point-cloud scenes)",
       EvalTriangulationCmd},
  };
  std::vector<std::pair<CLI::App*, void (*)(const Args&)>> commands;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", a.config, "JSON config (defaults if absent)");
    sub->add_option("--seed", a.seed, "Base seed");
    sub->add_option("--scene", a.scene, "Scene JSON");
    sub->add_option("--out", a.out, "Output directory");
    sub->add_option("--input", a.input, "Output directory of a prior step");
    sub->add_option("--groups", a.groups, "Group manifest JSON");
    sub->add_option("--budget", a.budget, "Group budget")
        ->check(CLI::IsMember({"full", "half"}));
    sub->add_option("--threshold", a.thresholds,
                    "Evaluation thresholds (px or cm)")
        ->delimiter(',');
    commands.emplace_back(sub, s.run);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (const auto& [sub, run] : commands) {
      if (sub->parsed()) run(a);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
