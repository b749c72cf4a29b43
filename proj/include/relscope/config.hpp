#ifndef RELSCOPE_CONFIG_HPP
#define RELSCOPE_CONFIG_HPP

#include "relscope/features.hpp"
#include "relscope/influence.hpp"
#include "relscope/mlp.hpp"
#include "relscope/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace relscope {

struct PathsConfig {
  std::string data = "data";                 // dataset root
  std::string features = "features";         // holds train.rscf / test.rscf
  std::string model = "model/model.rscm";
  std::string out = "out";
};

struct OcclusionRunConfig {
  OcclusionConfig scan;
  double threshold = 0.0;
  int per_relation = 50;       // correctly classified images scanned per relation
  std::string split = "train";
  bool smooth = false;
  int shuffles = 1000;         // permutation draws for the localization check
};

struct AblationRunConfig {
  int layer = 0;
  double fraction = 0.25;
  bool correct_only = true;    // restrict scans to the correctly classified subset
};

struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  PathsConfig paths;
  SynthConfig data;
  ExtractorSpec extractor;
  bool extractor_seed_set = false;
  TrainConfig train;
  OcclusionRunConfig occlusion;
  AblationRunConfig ablation;

  // Fills values that derive from others (extractor seed, train seed).
  void resolve();
  // Range checks plus command-specific combinations; throws UsageError or
  // UnsupportedConfiguration.
  void validate(std::string_view command = {}) const;
};

// INI text with sections [run] [paths] [data] [extractor] [train] [occlusion]
// [ablation]. Unknown sections or keys and malformed values throw UsageError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Fully resolved config in the same INI format. Worker count is omitted since
// it never changes results.
std::string config_to_ini(const RunConfig& config);

// "16" or "16x12" -> (w, h).
std::pair<int, int> parse_mask_size(std::string_view text);
// "128" (gray) or "r,g,b".
Rgb parse_color(std::string_view text);

}  // namespace relscope

#endif  // RELSCOPE_CONFIG_HPP
