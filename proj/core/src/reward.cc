#include "spatialkit/reward.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spatialkit/errors.h"

namespace spatialkit {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

std::size_t count(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

struct NumberSpan {
  std::size_t begin;
  std::size_t end;
};

// Last token shaped like [-]digits[.digits].
std::optional<NumberSpan> last_number(std::string_view s) {
  std::optional<NumberSpan> last;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_digit(s[i])) {
      std::size_t begin = i;
      if (begin > 0 && s[begin - 1] == '-') --begin;
      while (i < s.size() && is_digit(s[i])) ++i;
      if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i;
      }
      last = NumberSpan{begin, i};
    } else {
      ++i;
    }
  }
  return last;
}

std::optional<std::string> last_choice_letter(std::string_view s) {
  for (std::size_t i = s.size(); i-- > 0;) {
    const char c = s[i];
    if (c < 'A' || c > 'D') continue;
    const bool left_ok = i == 0 || !is_alnum(s[i - 1]);
    const bool right_ok = i + 1 == s.size() || !is_alnum(s[i + 1]);
    if (left_ok && right_ok) return std::string(1, c);
  }
  return std::nullopt;
}

std::optional<std::string> fallback_answer(std::string_view raw, AnswerHint hint) {
  if (hint != AnswerHint::kChoice) {
    if (auto n = last_number(raw)) return std::string(raw.substr(n->begin, n->end - n->begin));
    if (hint == AnswerHint::kNumeric) return std::nullopt;
  }
  return last_choice_letter(raw);
}

}  // namespace

AnswerHint hint_for(const Answer& gold) {
  switch (answer_kind(gold)) {
    case AnswerKind::kNumeric: return AnswerHint::kNumeric;
    case AnswerKind::kChoice: return AnswerHint::kChoice;
    case AnswerKind::kBoxes: return AnswerHint::kAny;
  }
  return AnswerHint::kAny;
}

ParsedResponse parse_response(std::string_view raw, AnswerHint hint) {
  ParsedResponse out;
  out.raw = std::string(raw);

  const auto think_open = raw.find(kThinkOpen);
  const auto think_close = raw.find(kThinkClose);
  if (think_open != std::string_view::npos && think_close != std::string_view::npos &&
      think_open < think_close) {
    const auto begin = think_open + kThinkOpen.size();
    out.think = std::string(raw.substr(begin, think_close - begin));
  }

  const auto answer_open = raw.rfind(kAnswerOpen);
  std::size_t answer_close = std::string_view::npos;
  if (answer_open != std::string_view::npos) answer_close = raw.find(kAnswerClose, answer_open);
  if (answer_open != std::string_view::npos && answer_close != std::string_view::npos) {
    const auto begin = answer_open + kAnswerOpen.size();
    out.answer_text = std::string(trim(raw.substr(begin, answer_close - begin)));
  }

  const bool one_each = count(raw, kThinkOpen) == 1 && count(raw, kThinkClose) == 1 &&
                        count(raw, kAnswerOpen) == 1 && count(raw, kAnswerClose) == 1;
  if (one_each && think_open < think_close && think_close < answer_open && answer_open < answer_close) {
    out.format_ok = blank(raw.substr(0, think_open)) &&
                    blank(raw.substr(think_close + kThinkClose.size(),
                                     answer_open - think_close - kThinkClose.size())) &&
                    blank(raw.substr(answer_close + kAnswerClose.size()));
  }

  if (!out.answer_text) out.answer_text = fallback_answer(raw, hint);
  return out;
}

std::string render_response(const ParsedResponse& parsed) {
  return std::string(kThinkOpen) + parsed.think.value_or("") + std::string(kThinkClose) +
         std::string(kAnswerOpen) + parsed.answer_text.value_or("") + std::string(kAnswerClose);
}

double format_reward(const ParsedResponse& parsed) { return parsed.format_ok ? 1.0 : 0.0; }

double mcq_reward(std::string_view prediction, char gold) {
  std::string_view p = trim(prediction);
  while (!p.empty() && std::string_view(".,;:!?").find(p.back()) != std::string_view::npos) {
    p.remove_suffix(1);
  }
  p = trim(p);
  if (p.size() != 1) return 0.0;
  const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(p.front())));
  return c == static_cast<char>(std::toupper(static_cast<unsigned char>(gold))) ? 1.0 : 0.0;
}

double numerical_reward(double prediction, double gold, const RewardConfig& cfg) {
  if (!std::isfinite(prediction) || !std::isfinite(gold)) return 0.0;
  if (gold == 0.0) return prediction == 0.0 ? 1.0 : 0.0;
  const double rel = std::abs(prediction - gold) / std::abs(gold);
  std::size_t hits = 0;
  for (double tau : cfg.thresholds) {
    if (rel < tau) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cfg.thresholds.size());
}

std::optional<double> parse_number(std::string_view text) {
  std::string_view t = trim(text);
  double value = 0.0;
  if (!t.empty()) {
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(value)) return value;
  }
  auto n = last_number(t);
  if (!n) return std::nullopt;
  auto [ptr, ec] = std::from_chars(t.data() + n->begin, t.data() + n->end, value);
  if (ec != std::errc()) return std::nullopt;
  return value;
}

RewardBreakdown total_reward(const ParsedResponse& parsed, const Answer& gold, const RewardConfig& cfg) {
  RewardBreakdown r;
  r.format = format_reward(parsed);
  if (const auto* numeric = std::get_if<NumericAnswer>(&gold)) {
    if (parsed.answer_text) {
      if (auto value = parse_number(*parsed.answer_text)) {
        r.accuracy = numerical_reward(*value, numeric->value, cfg);
      }
    }
  } else if (const auto* choice = std::get_if<ChoiceAnswer>(&gold)) {
    if (parsed.answer_text) r.accuracy = mcq_reward(*parsed.answer_text, choice->letter);
  } else {
    throw std::invalid_argument("total_reward does not score localization answers");
  }
  r.total = r.format + r.accuracy;
  return r;
}

RewardBreakdown total_reward(const ParsedResponse& parsed, const QASample& sample,
                             const RewardConfig& cfg) {
  return total_reward(parsed, sample.answer, cfg);
}

bool coldstart_keep(const RewardBreakdown& reward, const RewardConfig& cfg) {
  return reward.total > 1.0 + cfg.coldstart_lambda;
}

std::vector<ColdStartCandidate> coldstart_filter(std::span<const ColdStartCandidate> candidates,
                                                 const RewardConfig& cfg) {
  std::vector<ColdStartCandidate> kept;
  for (const auto& c : candidates) {
    if (coldstart_keep(total_reward(c.response, c.sample, cfg), cfg)) kept.push_back(c);
  }
  return kept;
}

namespace {

// End (exclusive) of the bracketed region opening at `begin`, honoring
// JSON string literals.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = begin; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') ++depth;
    else if (c == ']' || c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

}  // namespace

LocalizationParse parse_localization(std::string_view raw) {
  using nlohmann::json;
  std::optional<json> doc;
  for (std::size_t i = 0; i < raw.size() && !doc; ++i) {
    if (raw[i] != '[' && raw[i] != '{') continue;
    auto end = balanced_end(raw, i);
    if (!end) continue;
    try {
      json parsed = json::parse(raw.substr(i, *end - i));
      if (parsed.is_array() || (parsed.is_object() && parsed.contains("label"))) doc = std::move(parsed);
    } catch (const json::parse_error&) {
    }
  }
  if (!doc) throw NoJsonFound("no JSON array of boxes found in response");
  if (doc->is_object()) doc = json::array({*doc});

  LocalizationParse out;
  for (std::size_t i = 0; i < doc->size(); ++i) {
    const json& entry = (*doc)[i];
    const std::string where = "entry " + std::to_string(i);
    if (!entry.is_object()) {
      out.warnings.push_back(where + ": not an object");
      continue;
    }
    auto label = entry.find("label");
    if (label == entry.end() || !label->is_string()) {
      out.warnings.push_back(where + ": missing string label");
      continue;
    }
    auto bbox = entry.find("bbox");
    if (bbox == entry.end()) bbox = entry.find("bbox_2d");
    if (bbox == entry.end() || !bbox->is_array() || bbox->size() != 4 ||
        !std::all_of(bbox->begin(), bbox->end(), [](const json& v) { return v.is_number(); })) {
      out.warnings.push_back(where + ": bbox must be four numbers");
      continue;
    }
    const double x1 = (*bbox)[0].get<double>();
    const double y1 = (*bbox)[1].get<double>();
    const double x2 = (*bbox)[2].get<double>();
    const double y2 = (*bbox)[3].get<double>();
    out.boxes.push_back({label->get<std::string>(),
                         {std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)}});
  }
  return out;
}

double bbox_iou(const BBox2D& a, const BBox2D& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;  // zero-area boxes never match
  return inter / uni;
}

double localization_score(std::span<const LabeledBox> predicted, std::span<const LabeledBox> gold) {
  if (gold.empty()) return predicted.empty() ? 1.0 : 0.0;
  double sum = 0.0;
  for (const auto& g : gold) {
    double best = 0.0;
    for (const auto& p : predicted) {
      if (p.label == g.label) best = std::max(best, bbox_iou(p.box, g.box));
    }
    sum += best;
  }
  return sum / static_cast<double>(gold.size());
}

}  // namespace spatialkit
