#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spatialkit/config.h"
#include "spatialkit/geometry.h"
#include "spatialkit/qa_synth.h"

namespace spatialkit {

// Which fallback to use when a response carries no <answer> block.
enum class AnswerHint { kAny, kChoice, kNumeric };

AnswerHint hint_for(const Answer& gold);

struct ParsedResponse {
  std::string raw;
  std::optional<std::string> think;
  std::optional<std::string> answer_text;
  // Exactly one <think> block followed by exactly one <answer> block, with
  // only whitespace around and between them.
  bool format_ok = false;
};

// Total. Tag contents are used when present; otherwise answer_text comes
// from the fallback selected by `hint` (last A-D letter, last decimal
// number, or for kAny the last number and then the last letter).
ParsedResponse parse_response(std::string_view raw, AnswerHint hint = AnswerHint::kAny);

// Canonical tagged form of a parsed response.
std::string render_response(const ParsedResponse& parsed);

double format_reward(const ParsedResponse& parsed);

// 1 iff the trimmed, upper-cased prediction without trailing punctuation
// equals the gold letter.
double mcq_reward(std::string_view prediction, char gold);

// Mean over thresholds of [|pred - gold| / |gold| < tau]. A zero gold scores
// 1 only for an exact zero prediction; non-finite predictions score 0.
double numerical_reward(double prediction, double gold, const RewardConfig& cfg);

// Whole-string decimal when the text is a bare number, else the last
// decimal number embedded in it.
std::optional<double> parse_number(std::string_view text);

struct RewardBreakdown {
  double format = 0.0;    // 0 or 1
  double accuracy = 0.0;  // [0, 1]
  double total = 0.0;     // format + accuracy
};

// Throws std::invalid_argument for localization (boxes) answers.
RewardBreakdown total_reward(const ParsedResponse& parsed, const Answer& gold, const RewardConfig& cfg);
RewardBreakdown total_reward(const ParsedResponse& parsed, const QASample& sample,
                             const RewardConfig& cfg);

struct ColdStartCandidate {
  ParsedResponse response;
  QASample sample;
};

// Keeps, in input order, the candidates whose total reward is strictly
// greater than 1 + coldstart_lambda.
std::vector<ColdStartCandidate> coldstart_filter(std::span<const ColdStartCandidate> candidates,
                                                 const RewardConfig& cfg);
bool coldstart_keep(const RewardBreakdown& reward, const RewardConfig& cfg);

struct LocalizationParse {
  std::vector<LabeledBox> boxes;
  std::vector<std::string> warnings;
};

// Reads the first JSON array of {"label", "bbox": [x1, y1, x2, y2]} objects
// embedded in a response ("bbox_2d" is accepted as an alias). Invalid
// entries are skipped with a warning; reversed corners are swapped. Throws
// NoJsonFound when no JSON array or object can be located.
LocalizationParse parse_localization(std::string_view raw);

// Zero when the union has no area, including two identical degenerate boxes.
double bbox_iou(const BBox2D& a, const BBox2D& b);

// Mean over gold boxes of the best IoU with a same-label prediction.
double localization_score(std::span<const LabeledBox> predicted, std::span<const LabeledBox> gold);

}  // namespace spatialkit
