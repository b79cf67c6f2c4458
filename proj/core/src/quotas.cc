#include <algorithm>
#include <numeric>

#include "spatialkit/qa_synth.h"
#include "spatialkit/rng.h"

namespace spatialkit {

QuotaResult apply_quotas(std::vector<QASample> samples, const SynthConfig& cfg) {
  std::vector<std::size_t> visit(samples.size());
  std::iota(visit.begin(), visit.end(), std::size_t{0});
  auto rng = derive_rng(cfg.seed, "quota");
  rng.shuffle(visit);

  std::map<std::string, int> per_scene_task;
  std::map<std::string, int> per_category;
  std::vector<bool> keep(samples.size(), false);
  QuotaResult result;

  for (std::size_t idx : visit) {
    const QASample& s = samples[idx];
    if (s.task == TaskFamily::kObjectLocalization) {
      keep[idx] = true;
      continue;
    }
    const std::string scene_task = s.scene_id + "\x1f" + std::string(to_string(s.task));
    if (per_scene_task[scene_task] >= cfg.per_scene_cap) {
      ++result.dropped[std::string(reasons::kSceneCap)];
      continue;
    }
    std::vector<std::string> keys;
    if (auto it = s.provenance.find("categories"); it != s.provenance.end()) {
      for (const auto& c : *it) keys.push_back(scene_task + "\x1f" + c.get<std::string>());
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    const bool over = std::any_of(keys.begin(), keys.end(), [&](const std::string& k) {
      return per_category[k] >= cfg.per_scene_category_cap;
    });
    if (over) {
      ++result.dropped[std::string(reasons::kCategoryCap)];
      continue;
    }
    ++per_scene_task[scene_task];
    for (const auto& k : keys) ++per_category[k];
    keep[idx] = true;
  }

  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) result.kept.push_back(std::move(samples[i]));
  }
  return result;
}

}  // namespace spatialkit
