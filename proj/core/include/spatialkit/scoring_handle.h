#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialkit/config.h"
#include "spatialkit/reward.h"

namespace spatialkit {

// Immutable reward + advantage configuration for callers embedding the
// scorer in a training loop (e.g. through a foreign-language binding).
// All methods are const and safe to call concurrently.
class ScoringHandle {
 public:
  ScoringHandle() = default;
  explicit ScoringHandle(RunConfig cfg);

  // Same schema as the CLI config document.
  static ScoringHandle from_json(const nlohmann::json& doc);
  static ScoringHandle from_path(const std::filesystem::path& path);

  RewardBreakdown score(std::string_view raw_response, const Answer& gold) const;
  RewardBreakdown score_choice(std::string_view raw_response, char gold_letter) const;
  RewardBreakdown score_numeric(std::string_view raw_response, double gold_value) const;

  std::vector<double> advantages(std::span<const double> rewards) const;

  const RunConfig& config() const { return cfg_; }

 private:
  RunConfig cfg_;
};

}  // namespace spatialkit
