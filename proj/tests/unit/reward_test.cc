#include <cmath>

#include <gtest/gtest.h>

#include "oracles.h"
#include "spatialkit/errors.h"
#include "spatialkit/reward.h"
#include "spatialkit/rng.h"

namespace spatialkit {
namespace {

const RewardConfig kCfg;

TEST(ParseResponse, WellFormed) {
  const auto p = parse_response("<think>x</think><answer>A</answer>");
  EXPECT_TRUE(p.format_ok);
  EXPECT_EQ(p.think, "x");
  EXPECT_EQ(p.answer_text, "A");
  EXPECT_TRUE(parse_response("  \n<think>a\nb</think>\n\n<answer> 3.5 </answer>\n").format_ok);
}

TEST(ParseResponse, Fallbacks) {
  auto p = parse_response("The answer is 3.1");
  EXPECT_FALSE(p.format_ok);
  EXPECT_EQ(p.answer_text, "3.1");
  p = parse_response("I pick B, not 4 chairs", AnswerHint::kChoice);
  EXPECT_EQ(p.answer_text, "B");
  p = parse_response("Option C has 2.5 meters", AnswerHint::kNumeric);
  EXPECT_EQ(p.answer_text, "2.5");
  p = parse_response("nothing useful here", AnswerHint::kNumeric);
  EXPECT_FALSE(p.answer_text);
}

TEST(ParseResponse, StructureViolations) {
  for (const char* raw : {
           "<think>x</think><answer>A</answer><answer>B</answer>",
           "<think>x</think><answer><answer>A</answer></answer>",
           "<answer>A</answer><think>x</think>",
           "<answer>A</answer>",
           "<think>x</think>",
           "prefix <think>x</think><answer>A</answer>",
           "<think>x</think>between<answer>A</answer>",
           "<think>x</think><answer>A</answer> trailing",
           "<think><think>x</think></think><answer>A</answer>",
       }) {
    const auto p = parse_response(raw);
    EXPECT_FALSE(p.format_ok) << raw;
    EXPECT_EQ(format_reward(p), 0.0) << raw;
  }
}

TEST(ParseResponse, TagContentPreferredOverFallback) {
  // Malformed structure, but a single answer block still supplies the text.
  const auto p = parse_response("<answer>B</answer> though maybe 7", AnswerHint::kChoice);
  EXPECT_FALSE(p.format_ok);
  EXPECT_EQ(p.answer_text, "B");
}

TEST(FormatReward, Idempotent) {
  for (const char* raw : {"<think>x</think><answer>A</answer>", "A", "<think>y</think>\n<answer>12</answer>"}) {
    const auto p = parse_response(raw);
    const auto again = parse_response(render_response(p));
    EXPECT_EQ(format_reward(p) == 1.0, p.format_ok);
    if (p.format_ok) {
      EXPECT_EQ(format_reward(again), format_reward(p));
      EXPECT_EQ(again.answer_text, p.answer_text);
    }
    if (p.answer_text) EXPECT_EQ(mcq_reward(*again.answer_text, 'A'), mcq_reward(*p.answer_text, 'A'));
  }
}

TEST(McqReward, Normalization) {
  EXPECT_EQ(mcq_reward("A", 'A'), 1.0);
  EXPECT_EQ(mcq_reward("a.", 'A'), 1.0);
  EXPECT_EQ(mcq_reward("  c !", 'C'), 1.0);
  EXPECT_EQ(mcq_reward("B", 'A'), 0.0);
  EXPECT_EQ(mcq_reward("A. chair", 'A'), 0.0);
  EXPECT_EQ(mcq_reward("", 'A'), 0.0);
  EXPECT_EQ(mcq_reward("(A)", 'A'), 0.0);
}

TEST(NumericalReward, Examples) {
  EXPECT_DOUBLE_EQ(numerical_reward(10, 10, kCfg), 1.0);
  EXPECT_DOUBLE_EQ(numerical_reward(4, 10, kCfg), 0.7);
  EXPECT_DOUBLE_EQ(numerical_reward(20, 10, kCfg), 0.0);
  EXPECT_DOUBLE_EQ(numerical_reward(16, 10, kCfg), 0.7);
  EXPECT_DOUBLE_EQ(numerical_reward(0, 0, kCfg), 1.0);
  EXPECT_DOUBLE_EQ(numerical_reward(0.1, 0, kCfg), 0.0);
  EXPECT_DOUBLE_EQ(numerical_reward(NAN, 3, kCfg), 0.0);
  EXPECT_DOUBLE_EQ(numerical_reward(INFINITY, 3, kCfg), 0.0);
  EXPECT_DOUBLE_EQ(numerical_reward(-4, -10, kCfg), 0.7);
}

TEST(NumericalReward, MatchesOracle) {
  SplitMix64 rng(1);
  for (int i = 0; i < 20000; ++i) {
    const double gold = rng.uniform(-50, 50);
    const double pred = gold + rng.normal() * std::fabs(gold) * rng.uniform(0, 1.5);
    EXPECT_EQ(numerical_reward(pred, gold, kCfg), testing::oracle_numerical_reward(pred, gold, kCfg.thresholds));
  }
}

TEST(NumericalReward, MonotoneSymmetricScaleInvariant) {
  SplitMix64 rng(2);
  for (int i = 0; i < 5000; ++i) {
    const double gold = rng.uniform(0.1, 100);
    const double e1 = rng.uniform(0, 2) * gold;
    const double e2 = e1 + rng.uniform(0, 1) * gold;
    EXPECT_GE(numerical_reward(gold + e1, gold, kCfg), numerical_reward(gold + e2, gold, kCfg));
    EXPECT_EQ(numerical_reward(gold + e1, gold, kCfg), numerical_reward(gold - e1, gold, kCfg));
    // Powers of two scale without rounding, so equality is exact.
    const double k = std::ldexp(1.0, static_cast<int>(rng.below(20)) - 10);
    EXPECT_EQ(numerical_reward(k * (gold + e1), k * gold, kCfg), numerical_reward(gold + e1, gold, kCfg));
  }
}

TEST(NumericalReward, Granularity) {
  SplitMix64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double gold = rng.uniform(0.01, 1000);
    const double r = numerical_reward(gold * rng.uniform(0, 2.5), gold, kCfg);
    const double k = std::round(r * 10);
    EXPECT_EQ(r, k / 10.0);
  }
}

TEST(ParseNumber, Forms) {
  EXPECT_EQ(parse_number("3.1"), 3.1);
  EXPECT_EQ(parse_number(" -2 "), -2.0);
  EXPECT_EQ(parse_number("about 4 or 5 m"), 5.0);
  EXPECT_EQ(parse_number("1e3"), 1000.0);
  EXPECT_FALSE(parse_number("none"));
}

TEST(TotalReward, Examples) {
  const ParsedResponse good = parse_response("<think>t</think><answer>A</answer>", AnswerHint::kChoice);
  auto r = total_reward(good, ChoiceAnswer{'A'}, kCfg);
  EXPECT_DOUBLE_EQ(r.total, 2.0);

  r = total_reward(parse_response("<think>t</think><answer>4</answer>"), NumericAnswer{10, "m"}, kCfg);
  EXPECT_DOUBLE_EQ(r.format, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(r.total, 1.7);

  r = total_reward(parse_response("A", AnswerHint::kChoice), ChoiceAnswer{'A'}, kCfg);
  EXPECT_DOUBLE_EQ(r.total, 1.0);

  r = total_reward(parse_response("<think>t</think><answer>many</answer>"), NumericAnswer{3, "count"}, kCfg);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(r.total, 1.0);

  EXPECT_THROW(total_reward(good, BoxesAnswer{}, kCfg), std::invalid_argument);
}

TEST(TotalReward, Decomposition) {
  SplitMix64 rng(4);
  const char* shells[] = {"<think>t</think><answer>%s</answer>", "%s", "<answer>%s</answer>"};
  for (int i = 0; i < 2000; ++i) {
    char buf[128];
    const double gold = rng.uniform(1, 20);
    const std::string ans = std::to_string(gold * rng.uniform(0.3, 1.7));
    std::snprintf(buf, sizeof buf, shells[rng.below(3)], ans.c_str());
    const auto r = total_reward(parse_response(buf), NumericAnswer{gold, "m"}, kCfg);
    EXPECT_EQ(r.total, r.format + r.accuracy);
  }
}

RewardBreakdown breakdown(double format, double accuracy) { return {format, accuracy, format + accuracy}; }

TEST(ColdStart, Strictness) {
  EXPECT_TRUE(coldstart_keep(breakdown(1, 0.7), kCfg));
  EXPECT_FALSE(coldstart_keep(breakdown(1, 0.5), kCfg));
  EXPECT_FALSE(coldstart_keep(breakdown(0, 1.0), kCfg));
  RewardConfig strict = kCfg;
  strict.coldstart_lambda = 1.0;
  // 2.0 > 2.0 is false: with lambda = 1 nothing survives.
  EXPECT_FALSE(coldstart_keep(breakdown(1, 1.0), strict));
  EXPECT_FALSE(coldstart_keep(breakdown(1, 0.9), strict));
  strict.coldstart_lambda = 0.95;
  EXPECT_TRUE(coldstart_keep(breakdown(1, 1.0), strict));
}

TEST(ColdStart, FilterKeepsOrder) {
  std::vector<ColdStartCandidate> cands;
  const char* responses[] = {"<think>a</think><answer>10</answer>", "<think>a</think><answer>4</answer>",
                             "10", "<think>b</think><answer>9</answer>", "<think>a</think><answer>17.2</answer>"};
  for (int i = 0; i < 5; ++i) {
    QASample s;
    s.id = "s" + std::to_string(i);
    s.task = TaskFamily::kAbsoluteDistance;
    s.answer = NumericAnswer{10, "m"};
    cands.push_back({parse_response(responses[i]), s});
  }
  const auto kept = coldstart_filter(cands, kCfg);
  // totals: 2.0, 1.7, 1.0, 1.9, 1.5 (dropped: equal to 1 + lambda)
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].sample.id, "s0");
  EXPECT_EQ(kept[1].sample.id, "s1");
  EXPECT_EQ(kept[2].sample.id, "s3");
}

TEST(Localization, Parse) {
  auto p = parse_localization(R"(Sure: [{"label": "chair", "bbox": [10, 20, 30, 40]}])");
  ASSERT_EQ(p.boxes.size(), 1u);
  EXPECT_EQ(p.boxes[0].label, "chair");
  EXPECT_EQ(p.boxes[0].box, (BBox2D{10, 20, 30, 40}));

  p = parse_localization(R"(```json
[{"label": "sofa", "bbox_2d": [50, 60, 5, 6]}, {"label": "bad"}, {"label": "x", "bbox": [1, 2]}]
```)");
  ASSERT_EQ(p.boxes.size(), 1u);
  EXPECT_EQ(p.boxes[0].box, (BBox2D{5, 6, 50, 60}));
  EXPECT_EQ(p.warnings.size(), 2u);

  p = parse_localization(R"({"label": "lamp", "bbox": [1, 2, 3, 4]})");
  ASSERT_EQ(p.boxes.size(), 1u);

  EXPECT_THROW(parse_localization("no boxes here"), NoJsonFound);
  EXPECT_THROW(parse_localization("broken [ {"), NoJsonFound);
}

TEST(Localization, Iou) {
  EXPECT_DOUBLE_EQ(bbox_iou({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(bbox_iou({0, 0, 1, 1}, {2, 2, 3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(bbox_iou({0, 0, 1, 1}, {0.5, 0, 1.5, 1}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(bbox_iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);

  const std::vector<LabeledBox> gold{{"chair", {0, 0, 1, 1}}, {"table", {5, 5, 6, 6}}};
  const std::vector<LabeledBox> pred{{"chair", {0, 0, 1, 1}}, {"table", {0, 0, 1, 1}}};
  EXPECT_DOUBLE_EQ(localization_score(pred, gold), 0.5);
  EXPECT_DOUBLE_EQ(localization_score({}, gold), 0.0);
}

}  // namespace
}  // namespace spatialkit
