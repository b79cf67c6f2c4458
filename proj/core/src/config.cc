#include "spatialkit/config.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "spatialkit/errors.h"

namespace spatialkit {

using nlohmann::json;

std::string_view to_string(DistanceMode mode) {
  return mode == DistanceMode::kCentroid ? "centroid" : "closest_point";
}

void SynthConfig::validate() const {
  if (!std::isfinite(min_visibility) || min_visibility < 0.0) {
    throw ConfigError("synth.min_visibility must be a finite value >= 0");
  }
  if (!(rel_dist_ratio > 1.0) || !std::isfinite(rel_dist_ratio)) {
    throw ConfigError("synth.rel_dist_ratio must be > 1");
  }
  if (!(size_min_cm >= 0.0 && size_min_cm <= size_max_cm)) {
    throw ConfigError("synth.size_range_cm must satisfy 0 <= min <= max");
  }
  if (per_scene_cap < 1 || per_scene_category_cap < 1) {
    throw ConfigError("synth caps must be >= 1");
  }
  if (views_per_multiview < 2) throw ConfigError("synth.views_per_multiview must be >= 2");
  if (!(margins.eps_x >= 0.0 && margins.eps_z >= 0.0)) {
    throw ConfigError("synth direction margins must be >= 0");
  }
  if (!(margins.axis_margin_deg >= 0.0 && margins.axis_margin_deg < 45.0)) {
    throw ConfigError("synth.axis_margin_deg must lie in [0, 45)");
  }
  if (appearance_gap_frames < 0) throw ConfigError("synth.appearance_gap_frames must be >= 0");
}

void RewardConfig::validate() const {
  if (thresholds.empty()) throw ConfigError("reward.thresholds must not be empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
      throw ConfigError("reward.thresholds must lie in (0, 1)");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw ConfigError("reward.thresholds must be strictly increasing");
    }
  }
  if (!(coldstart_lambda >= 0.0 && coldstart_lambda <= 1.0)) {
    throw ConfigError("reward.coldstart_lambda must lie in [0, 1]");
  }
}

void GrpoConfig::validate() const {
  if (group_size < 2) throw ConfigError("grpo.group_size must be >= 2");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("grpo.clip_eps must lie in (0, 1)");
  if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) throw ConfigError("grpo.kl_beta must be >= 0");
  if (!(std_floor >= 0.0)) throw ConfigError("grpo.std_floor must be >= 0");
}

namespace {

template <typename T>
T get(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": wrong type");
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + path + "." + key + "'");
  }
}

void read_synth(const json& s, SynthConfig& c) {
  check_keys(s,
             {"seed", "min_visibility", "rel_dist_ratio", "size_range_cm", "per_scene_cap",
              "per_scene_category_cap", "category_blacklist", "views_per_multiview",
              "abs_distance_mode", "eps_x", "eps_z", "axis_margin_deg", "appearance_gap_frames"},
             "synth");
  for (const auto& [key, v] : s.items()) {
    const std::string path = "synth." + key;
    if (key == "seed") {
      if (!v.is_number_integer()) throw ConfigError(path + ": expected integer");
      c.seed = v.is_number_unsigned() ? v.get<std::uint64_t>()
                                      : static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else if (key == "min_visibility") {
      c.min_visibility = get<double>(v, path);
    } else if (key == "rel_dist_ratio") {
      c.rel_dist_ratio = get<double>(v, path);
    } else if (key == "size_range_cm") {
      auto r = get<std::vector<double>>(v, path);
      if (r.size() != 2) throw ConfigError(path + ": expected [min, max]");
      c.size_min_cm = r[0];
      c.size_max_cm = r[1];
    } else if (key == "per_scene_cap") {
      c.per_scene_cap = get<int>(v, path);
    } else if (key == "per_scene_category_cap") {
      c.per_scene_category_cap = get<int>(v, path);
    } else if (key == "category_blacklist") {
      auto list = get<std::vector<std::string>>(v, path);
      c.category_blacklist = {list.begin(), list.end()};
    } else if (key == "views_per_multiview") {
      c.views_per_multiview = get<int>(v, path);
    } else if (key == "abs_distance_mode") {
      auto mode = get<std::string>(v, path);
      if (mode == "centroid") c.abs_distance_mode = DistanceMode::kCentroid;
      else if (mode == "closest_point") c.abs_distance_mode = DistanceMode::kClosestPoint;
      else throw ConfigError(path + ": expected 'centroid' or 'closest_point'");
    } else if (key == "eps_x") {
      c.margins.eps_x = get<double>(v, path);
    } else if (key == "eps_z") {
      c.margins.eps_z = get<double>(v, path);
    } else if (key == "axis_margin_deg") {
      c.margins.axis_margin_deg = get<double>(v, path);
    } else if (key == "appearance_gap_frames") {
      c.appearance_gap_frames = get<std::int64_t>(v, path);
    }
  }
}

void read_reward(const json& s, RewardConfig& c) {
  check_keys(s, {"thresholds", "coldstart_lambda"}, "reward");
  if (s.contains("thresholds")) c.thresholds = get<std::vector<double>>(s["thresholds"], "reward.thresholds");
  if (s.contains("coldstart_lambda")) {
    c.coldstart_lambda = get<double>(s["coldstart_lambda"], "reward.coldstart_lambda");
  }
}

void read_grpo(const json& s, GrpoConfig& c) {
  check_keys(s, {"group_size", "clip_eps", "kl_beta", "std_floor"}, "grpo");
  if (s.contains("group_size")) c.group_size = get<int>(s["group_size"], "grpo.group_size");
  if (s.contains("clip_eps")) c.clip_eps = get<double>(s["clip_eps"], "grpo.clip_eps");
  if (s.contains("kl_beta")) c.kl_beta = get<double>(s["kl_beta"], "grpo.kl_beta");
  if (s.contains("std_floor")) c.std_floor = get<double>(s["std_floor"], "grpo.std_floor");
}

}  // namespace

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  if (doc.is_null()) return cfg;
  check_keys(doc, {"synth", "reward", "grpo"}, "$");
  if (doc.contains("synth")) read_synth(doc["synth"], cfg.synth);
  if (doc.contains("reward")) read_reward(doc["reward"], cfg.reward);
  if (doc.contains("grpo")) read_grpo(doc["grpo"], cfg.grpo);
  cfg.synth.validate();
  cfg.reward.validate();
  cfg.grpo.validate();
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  const auto& s = cfg.synth;
  json synth = {{"seed", s.seed},
                {"min_visibility", s.min_visibility},
                {"rel_dist_ratio", s.rel_dist_ratio},
                {"size_range_cm", {s.size_min_cm, s.size_max_cm}},
                {"per_scene_cap", s.per_scene_cap},
                {"per_scene_category_cap", s.per_scene_category_cap},
                {"category_blacklist", s.category_blacklist},
                {"views_per_multiview", s.views_per_multiview},
                {"abs_distance_mode", std::string(to_string(s.abs_distance_mode))},
                {"eps_x", s.margins.eps_x},
                {"eps_z", s.margins.eps_z},
                {"axis_margin_deg", s.margins.axis_margin_deg},
                {"appearance_gap_frames", s.appearance_gap_frames}};
  json reward = {{"thresholds", cfg.reward.thresholds},
                 {"coldstart_lambda", cfg.reward.coldstart_lambda}};
  json grpo = {{"group_size", cfg.grpo.group_size},
               {"clip_eps", cfg.grpo.clip_eps},
               {"kl_beta", cfg.grpo.kl_beta},
               {"std_floor", cfg.grpo.std_floor}};
  return {{"synth", synth}, {"reward", reward}, {"grpo", grpo}};
}

void apply_override(json& doc, std::string_view dotted, std::string_view value) {
  if (doc.is_null()) doc = json::object();
  json* node = &doc;
  std::string_view rest = dotted;
  while (true) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (key.empty()) throw ConfigError("malformed override key '" + std::string(dotted) + "'");
    if (dot == std::string_view::npos) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (const json::parse_error&) {
        parsed = std::string(value);
      }
      (*node)[key] = std::move(parsed);
      return;
    }
    json& child = (*node)[key];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw ConfigError("override path '" + std::string(dotted) + "' crosses a value");
    node = &child;
    rest = rest.substr(dot + 1);
  }
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file " + path->string());
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("malformed config " + path->string() + ": " + e.what());
    }
  }
  for (const auto& [key, value] : overrides) apply_override(doc, key, value);
  return run_config_from_json(doc);
}

}  // namespace spatialkit
