#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialkit/geometry.h"

namespace spatialkit {

enum class DistanceMode { kCentroid, kClosestPoint };

std::string_view to_string(DistanceMode mode);

struct SynthConfig {
  std::uint64_t seed = 0;
  // Values above 1 are accepted and simply reject every object.
  double min_visibility = 0.40;
  double rel_dist_ratio = 2.0;
  double size_min_cm = 10.0;
  double size_max_cm = 300.0;
  int per_scene_cap = 20;
  int per_scene_category_cap = 2;
  std::set<std::string> category_blacklist{"wall", "floor", "ceiling"};
  int views_per_multiview = 8;
  DistanceMode abs_distance_mode = DistanceMode::kClosestPoint;
  DirectionMargins margins;
  std::int64_t appearance_gap_frames = 5;

  // Throws ConfigError.
  void validate() const;
};

struct RewardConfig {
  std::vector<double> thresholds{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
  double coldstart_lambda = 0.5;

  void validate() const;
};

struct GrpoConfig {
  int group_size = 8;
  double clip_eps = 0.2;
  double kl_beta = 0.01;
  double std_floor = 1e-8;

  void validate() const;
};

struct RunConfig {
  SynthConfig synth;
  RewardConfig reward;
  GrpoConfig grpo;
};

// Reads a document with optional `synth`, `reward` and `grpo` sections.
// Unknown keys anywhere are rejected with ConfigError; the merged result
// is validated.
RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Sets `dotted` (e.g. "synth.min_visibility") in `doc`. The value is parsed
// as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view dotted, std::string_view value);

RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace spatialkit
