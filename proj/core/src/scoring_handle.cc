#include "spatialkit/scoring_handle.h"

#include "spatialkit/grpo.h"

namespace spatialkit {

ScoringHandle::ScoringHandle(RunConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.reward.validate();
  cfg_.grpo.validate();
}

ScoringHandle ScoringHandle::from_json(const nlohmann::json& doc) {
  return ScoringHandle(run_config_from_json(doc));
}

ScoringHandle ScoringHandle::from_path(const std::filesystem::path& path) {
  return ScoringHandle(load_run_config(path));
}

RewardBreakdown ScoringHandle::score(std::string_view raw_response, const Answer& gold) const {
  return total_reward(parse_response(raw_response, hint_for(gold)), gold, cfg_.reward);
}

RewardBreakdown ScoringHandle::score_choice(std::string_view raw_response, char gold_letter) const {
  return score(raw_response, ChoiceAnswer{gold_letter});
}

RewardBreakdown ScoringHandle::score_numeric(std::string_view raw_response, double gold_value) const {
  return score(raw_response, NumericAnswer{gold_value, ""});
}

std::vector<double> ScoringHandle::advantages(std::span<const double> rewards) const {
  return group_advantages(rewards, cfg_.grpo);
}

}  // namespace spatialkit
